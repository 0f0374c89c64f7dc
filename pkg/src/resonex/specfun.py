"""Complex-argument cylinder functions of orders 0 and 1.

Values come from the AMOS routines wrapped by :mod:`scipy.special`, behind
a guard that enforces the branch window used for the analytic continuation
of the layer-potential kernels into ``Im k < 0``: principal branch, with
arguments closer than ``BRANCH_MARGIN`` to the negative real axis refused.
All functions accept scalars or arrays.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.special as sc

__all__ = [
    "CylinderPair",
    "BranchCutError",
    "EULER_GAMMA",
    "BRANCH_MARGIN",
    "Z_MAX",
    "bessel_j01",
    "hankel1_01",
    "bessel_j",
    "hankel1",
    "check_branch",
]

EULER_GAMMA = 0.57721566490153286061
BRANCH_MARGIN = 0.01
Z_MAX = 1.0e4


class BranchCutError(ValueError):
    """Argument is zero, non-finite, too large, or too close to the branch cut."""


class CylinderPair(NamedTuple):
    order0: complex | np.ndarray
    order1: complex | np.ndarray


def _finite(z, zmax: float) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise BranchCutError("non-finite argument")
    if np.any(np.abs(z) > zmax):
        raise BranchCutError(f"|z| exceeds Z_max = {zmax:g}")
    return z


def check_branch(z, margin: float = BRANCH_MARGIN, zmax: float = Z_MAX) -> np.ndarray:
    """Validate arguments for the Hankel functions and return them as a complex array."""
    z = _finite(z, zmax)
    if np.any(z == 0):
        raise BranchCutError("Hankel functions are singular at z = 0")
    if np.any(np.abs(np.angle(z)) > np.pi - margin):
        raise BranchCutError(
            f"arg z outside (-pi + {margin}, pi - {margin}); no second-sheet convention is used"
        )
    return z


def _out(v):
    return v[()] if isinstance(v, np.ndarray) and v.ndim == 0 else v


def _jv(order: int, z: np.ndarray) -> np.ndarray:
    v = sc.jv(order, z)
    bad = ~np.isfinite(v)
    if np.any(bad):
        # AMOS gives up near |Im z| ~ 700 although the value may still be a
        # finite double; undo the exponential scaling by hand there
        zb = z[bad]
        v = np.array(v, copy=True)
        v[bad] = sc.jve(order, zb) * np.exp(np.abs(zb.imag))
    return v


def _h1(order: int, z: np.ndarray) -> np.ndarray:
    v = sc.hankel1(order, z)
    # AMOS also flushes tiny values (|Im z| near 700, upper half plane) to 0
    bad = ~np.isfinite(v) | (v == 0)
    if np.any(bad):
        zb = z[bad]
        v = np.array(v, copy=True)
        v[bad] = sc.hankel1e(order, zb) * np.exp(1j * zb)
    return v


def bessel_j(order: int, z, zmax: float = Z_MAX):
    """Bessel function of the first kind, integer order, entire in ``z``."""
    z = _finite(z, zmax)
    return _out(_jv(order, z))


def hankel1(order: int, z, margin: float = BRANCH_MARGIN, zmax: float = Z_MAX):
    """Hankel function of the first kind, integer order, principal branch."""
    z = check_branch(z, margin, zmax)
    return _out(_h1(order, z))


def bessel_j01(z, zmax: float = Z_MAX) -> CylinderPair:
    """``(J0(z), J1(z))``."""
    z = _finite(z, zmax)
    return CylinderPair(_out(_jv(0, z)), _out(_jv(1, z)))


def hankel1_01(z, margin: float = BRANCH_MARGIN, zmax: float = Z_MAX) -> CylinderPair:
    """``(H0^(1)(z), H1^(1)(z))`` on the principal branch.

    Raises
    ------
    BranchCutError
        For ``z = 0`` or ``|arg z| > pi - margin``.
    """
    z = check_branch(z, margin, zmax)
    return CylinderPair(_out(_h1(0, z)), _out(_h1(1, z)))
