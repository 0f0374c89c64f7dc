"""Contour-integral (Sakurai-Sugiura) solver for holomorphic matrix eigenproblems.

For ``A(k)`` holomorphic inside a circle ``Gamma``, the moments

    mu_j = (1/2 pi i) \\oint s^j U^H A(k)^{-1} V dk,   s = (k - c)/rho,

feed block Hankel matrices ``H = [mu_{i+j}]`` and ``H< = [mu_{i+j+1}]``;
the eigenvalues of the pencil ``(H<, H)`` after rank truncation are the
eigenvalues of ``A`` inside ``Gamma`` (in the scaled variable ``s``).
Candidates are then polished by a Newton iteration on the Rayleigh
functional ``u^H A(k) v / u^H A'(k) v``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import linalg
from .bie import NystromGrid, assemble, assemble_derivative, cauchy_derivative

__all__ = [
    "ContourSpec",
    "SSParams",
    "Resonance",
    "SpectrumResult",
    "RefineResult",
    "ContourError",
    "moments",
    "hankel_eigs",
    "refine",
    "solve_nep",
    "resonances",
    "residual_of",
]

log = logging.getLogger(__name__)

MatrixFunction = Callable[[complex], np.ndarray]
ProbeMap = Callable[[np.ndarray], np.ndarray]


class ContourError(ArithmeticError):
    """``A(k)`` is singular at a quadrature node, or the contour is invalid."""


@dataclass(frozen=True)
class ContourSpec:
    center: complex
    radius: float
    nodes: int = 64

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if not self.radius > 0:
            raise ValueError(f"contour radius must be positive, got {self.radius}")
        if self.nodes < 8 or self.nodes % 2:
            raise ValueError(f"contour needs an even node count >= 8, got {self.nodes}")

    def points(self) -> np.ndarray:
        theta = 2 * np.pi * (np.arange(self.nodes) + 0.5) / self.nodes
        return self.center + self.radius * np.exp(1j * theta)

    def contains(self, k, margin: float = 1e-8) -> bool:
        return abs(complex(k) - self.center) < self.radius * (1 - margin)


@dataclass
class SSParams:
    """Sakurai-Sugiura parameters.

    ``probe_rank`` (L) must be at least the largest geometric multiplicity
    inside the contour, and ``probe_rank * moment_span`` at least the
    eigenvalue count.
    """

    probe_rank: int = 8
    moment_span: int = 8
    svd_cutoff: float = 1e-10
    seed: int = 42
    residual_tol: float = 1e-6
    dedup_tol: float = 1e-9
    refine: bool = True
    cluster_gap: float = 1e-4
    derivative_radius: float = 1e-2
    derivative_nodes: int = 16

    def probes(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        rng = np.random.default_rng(self.seed)
        L = self.probe_rank
        U = rng.standard_normal((n, L)) + 1j * rng.standard_normal((n, L))
        V = rng.standard_normal((n, L)) + 1j * rng.standard_normal((n, L))
        return U, V


class Resonance(NamedTuple):
    k: complex
    vector: np.ndarray
    residual: float
    multiplicity: int = 1
    refined: bool = False


@dataclass
class SpectrumResult:
    entries: list = field(default_factory=list)
    hankel_rank: int = 0
    raw: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def values(self) -> np.ndarray:
        """Eigenvalues repeated by multiplicity."""
        return np.array([e.k for e in self.entries for _ in range(e.multiplicity)], dtype=complex)

    @property
    def count(self) -> int:
        return sum(e.multiplicity for e in self.entries)


class RefineResult(NamedTuple):
    k: complex
    residual: float
    iterations: int
    converged: bool
    diverged: bool


def moments(A_eval: MatrixFunction, contour: ContourSpec, params: SSParams,
            n: int | None = None, probe_map: ProbeMap | None = None,
            return_scale: bool = False):
    """Moments ``mu_0 .. mu_{2 N_Gamma - 1}`` on the scaled contour variable.

    ``probe_map`` is applied to both probe blocks; projecting them onto an
    invariant subspace of ``A`` restricts the spectrum to that subspace.
    With ``return_scale`` the size of the integrand,
    ``radius * max ||U^H A(k)^{-1} V||`` over the nodes, is returned too; it
    is the reference against which the Hankel singular values are judged.
    """
    scale = 0.0
    pts = contour.points()
    s = (pts - contour.center) / contour.radius
    count = 2 * params.moment_span
    mu = None
    U = V = None
    for q, z in enumerate(pts):
        Az = A_eval(z)
        if U is None:
            U, V = params.probes(Az.shape[0] if n is None else n)
            if probe_map is not None:
                U, V = probe_map(U), probe_map(V)
            mu = np.zeros((count, params.probe_rank, params.probe_rank), dtype=complex)
        try:
            X = linalg.LUFactor(Az).solve(V)
        except linalg.SingularMatrixError as exc:
            raise ContourError(
                f"A(k) is singular at contour node {z:.6g}; move the contour or change "
                f"its node count ({exc})"
            ) from exc
        F = U.conj().T @ X
        scale = max(scale, contour.radius * float(np.max(np.abs(F))))
        # dk = i rho s dtheta, and (1/2 pi i) * 2 pi / nodes = 1/(i nodes)
        w = s[q] * contour.radius / contour.nodes
        power = 1.0 + 0j
        for j in range(count):
            mu[j] += (w * power) * F
            power *= s[q]
    return (list(mu), scale) if return_scale else list(mu)


def hankel_eigs(mu, params: SSParams, contour: ContourSpec | None = None,
                return_rank: bool = False, scale: float = 0.0):
    """Eigenvalues of the truncated block-Hankel pencil.

    Singular values of ``H`` below ``svd_cutoff * max(sigma_1, scale)`` are
    discarded; a positive ``scale`` (integrand size, see :func:`moments`)
    keeps quadrature noise from posing as eigenvalues when the contour
    encloses none. Returns eigenvalues in the original variable when
    ``contour`` is given (discarding those outside it), otherwise in the
    scaled variable.
    """
    L = mu[0].shape[0]
    K = params.moment_span
    H = np.block([[mu[i + j] for j in range(K)] for i in range(K)])
    Hs = np.block([[mu[i + j + 1] for j in range(K)] for i in range(K)])
    U, s, Vh = linalg.svd(H)
    if s.size == 0 or s[0] == 0.0:
        vals = np.zeros(0, complex)
        return (vals, 0) if return_rank else vals
    r = int(np.sum(s > params.svd_cutoff * max(s[0], scale)))
    if r == 0:
        vals = np.zeros(0, complex)
        return (vals, 0) if return_rank else vals
    Ur, Vr = U[:, :r], Vh[:r].conj().T
    red = (Ur.conj().T @ Hs @ Vr) / s[:r][None, :]
    vals = np.linalg.eigvals(red)
    if contour is not None:
        inside = np.abs(vals) < 1 - 1e-8
        vals = contour.center + contour.radius * vals[inside]
    return (vals, r) if return_rank else vals


def residual_of(A: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """``sigma_min / sigma_max`` with the smallest right and left singular vectors.

    For a 1 x 1 matrix the ratio is always one, so ``|a|`` is returned instead.
    """
    if A.shape == (1, 1):
        one = np.ones(1, dtype=complex)
        return float(abs(A[0, 0])), one, one
    v, s = linalg.null_vectors(A, "right", 1, return_values=True)
    v = v[:, 0]
    Av = A @ v
    smin = float(np.linalg.norm(Av))
    u = Av / smin if smin > 0 else np.zeros_like(Av)
    if smin == 0:
        u = linalg.null_vectors(A, "left", 1)[:, 0].conj()
    smax = linalg.spectral_norm(A)
    if smax == 0:
        return 0.0, v, u
    return smin / smax, v, u


def refine(k0: complex, A_eval: MatrixFunction, dA_eval: MatrixFunction | None = None,
           tol: float = 1e-12, max_iter: int = 20) -> RefineResult:
    """Newton iteration ``k <- k - u^H A(k) v / u^H A'(k) v``.

    ``u, v`` are the smallest left/right singular vectors of ``A(k)``. The
    best iterate by residual is returned; if ``|dk|`` grows for three
    consecutive steps the input is returned with ``diverged=True``.
    """
    if dA_eval is None:
        dA_eval = lambda z: cauchy_derivative(A_eval, z)  # noqa: E731
    k = complex(k0)
    best_k, best_res = k, np.inf
    prev_step = np.inf
    growth = 0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        try:
            A = A_eval(k)
            res, v, u = residual_of(A)
            if res < best_res:
                best_k, best_res = k, res
            denom = u.conj() @ (dA_eval(k) @ v)
        except (ArithmeticError, ValueError) as exc:
            # the iterate left the region where A is defined
            log.debug("refinement from %s stopped at %s: %s", k0, k, exc)
            return RefineResult(complex(k0), _res_at(A_eval, k0), it, False, True)
        if denom == 0:
            break
        step = (u.conj() @ (A @ v)) / denom
        if not np.isfinite(step):
            break
        if abs(step) > prev_step:
            growth += 1
            if growth >= 3:
                return RefineResult(complex(k0), _res_at(A_eval, k0), it, False, True)
        else:
            growth = 0
        prev_step = abs(step)
        k = k - step
        if abs(step) <= tol:
            converged = True
            res = residual_of(A_eval(k))[0]
            if res <= best_res:
                best_k, best_res = k, res
            break
    return RefineResult(best_k, float(best_res), it, converged, False)


def _res_at(A_eval, k) -> float:
    return residual_of(A_eval(k))[0]


def solve_nep(A_eval: MatrixFunction, contour: ContourSpec, params: SSParams | None = None,
              dA_eval: MatrixFunction | None = None,
              with_vectors: bool = True, probe_map: ProbeMap | None = None) -> SpectrumResult:
    """All eigenvalues of ``A(k)`` inside ``contour`` with null vectors and residuals.

    With ``with_vectors=False`` the per-eigenvalue residual check is skipped
    (``vector`` is None and ``residual`` is nan); this is the cheap path used
    inside optimization loops. Candidates closer than ``cluster_gap * radius`` to another candidate
    are kept at their contour-integral values: Newton on a near-defective
    pair is ill-conditioned and would merge them.
    """
    params = params or SSParams()
    mu, scale = moments(A_eval, contour, params, probe_map=probe_map, return_scale=True)
    raw, rank = hankel_eigs(mu, params, contour, return_rank=True, scale=scale)
    raw = raw[np.lexsort((raw.imag, raw.real))]
    gap = params.cluster_gap * contour.radius
    entries = []
    for i, k in enumerate(raw):
        others = np.delete(raw, i)
        near = others.size and np.min(np.abs(others - k)) < gap
        refined = False
        if params.refine and not near:
            rr = refine(k, A_eval, dA_eval)
            limit = 0.5 * np.min(np.abs(others - k)) if others.size else contour.radius
            if rr.converged or not rr.diverged:
                if abs(rr.k - k) < limit and contour.contains(rr.k):
                    k, refined = rr.k, True
        if not with_vectors:
            entries.append(Resonance(complex(k), None, float("nan"), 1, refined))
            continue
        res, v, _ = residual_of(A_eval(k))
        if res > params.residual_tol:
            log.warning("eigenvalue %s has residual %.2e > %.1e", k, res, params.residual_tol)
        entries.append(Resonance(complex(k), v, float(res), 1, refined))
    return SpectrumResult(_dedup(entries, params.dedup_tol), rank, raw)


def _dedup(entries: list, tol: float) -> list:
    out: list = []
    for e in entries:
        for i, o in enumerate(out):
            if abs(o.k - e.k) <= tol:
                out[i] = o._replace(multiplicity=o.multiplicity + e.multiplicity)
                break
        else:
            out.append(e)
    return out


def resonances(grid: NystromGrid, contour: ContourSpec, params: SSParams | None = None,
               perturbation: np.ndarray | None = None, eps: complex = 0.0,
               allow_upper: bool = False, with_vectors: bool = True,
               parity: int | None = None) -> SpectrumResult:
    """Scattering resonances of the grid's obstacle inside ``contour``.

    With ``perturbation`` the family ``A_N(k) + eps * B`` is solved instead.
    ``parity`` (+1 or -1) keeps only resonances whose densities are even or
    odd under the reflection about the vertical line through the mean curve
    center; the domain must be mirror-symmetric, and so must ``B``.
    Contours must sit in ``Im k <= -0.05`` (away from real-axis interior
    Dirichlet eigenvalues) unless ``allow_upper`` is set.
    """
    params = params or SSParams()
    if not allow_upper and contour.center.imag + contour.radius > -0.05:
        raise ContourError(
            "contour reaches above Im k = -0.05; pass allow_upper=True to override"
        )
    if perturbation is None or eps == 0:
        A_eval = lambda z: assemble(z, grid)  # noqa: E731
    else:
        A_eval = lambda z: assemble(z, grid) + eps * perturbation  # noqa: E731
    # B does not depend on k, so dA/dk is the same for both families
    dA = lambda z: assemble_derivative(  # noqa: E731
        z, grid, params.derivative_radius, params.derivative_nodes)
    probe_map = None
    if parity is not None:
        if parity not in (1, -1):
            raise ValueError(f"parity must be +1 or -1, got {parity}")
        perm = grid.mirror_permutation()
        probe_map = lambda X: 0.5 * (X + parity * X[perm])  # noqa: E731
    return solve_nep(A_eval, contour, params, dA, with_vectors=with_vectors,
                     probe_map=probe_map)
