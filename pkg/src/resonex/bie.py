"""Nystrom discretization of the sound-hard boundary integral operators.

The unknown density on curve ``m`` is sampled at ``t_j = j*pi/N``,
``j = 0..2N-1``; densities of all curves are concatenated curve-major.
``assemble(k, grid)`` returns the matrix ``A_N(k)`` discretizing ``I - D_k``,
where ``D_k`` is twice the double-layer operator with kernel
``dPhi/dnu(y)`` and ``Phi = (i/4) H0(k|x-y|)``. Interactions between
distinct curves use the trapezoidal rule (weight ``pi/N``); the self
interaction splits off the logarithmic part of the kernel and integrates it
with the Kussmaul-Martensen weights ``R_j``.

Blocks are cached by relative geometry: two curve pairs that are
translates of each other share one kernel evaluation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .geometry import Domain, GeometryError, sample
from .specfun import EULER_GAMMA, BranchCutError, bessel_j, check_branch, hankel1

__all__ = [
    "NystromGrid",
    "km_weights",
    "assemble",
    "assemble_adjoint",
    "assemble_derivative",
    "assemble_perturbation",
    "assemble_single_layer",
    "cauchy_derivative",
    "bilinear",
    "weighted_norm",
    "evaluate_field",
    "solve_scattering",
    "FieldPointError",
    "ScatteringSolveError",
]

log = logging.getLogger(__name__)

K_IM_MAX = 1.0


class FieldPointError(ValueError):
    """Evaluation point inside or too close to an obstacle."""


class ScatteringSolveError(ArithmeticError):
    """The boundary integral system is singular at the requested wavenumber."""


def km_weights(N: int) -> np.ndarray:
    """Kussmaul-Martensen weights ``R(t_i - t_j)`` for the ``2N``-point rule.

    Returns the ``2N x 2N`` matrix with entries
    ``-(pi/N^2) cos(N d) - (2 pi/N) sum_{m<N} cos(m d)/m``, ``d = t_i - t_j``.
    Together they integrate ``log(4 sin^2((t - tau)/2)) f(tau)`` exactly for
    trigonometric polynomials ``f`` of degree below ``N``.
    """
    t = np.arange(2 * N) * np.pi / N
    m = np.arange(1, N)
    d = t  # weights depend on i - j mod 2N only
    row = -(np.pi / N**2) * np.cos(N * d) - (2 * np.pi / N) * (np.cos(np.outer(d, m)) @ (1.0 / m))
    idx = (np.arange(2 * N)[:, None] - np.arange(2 * N)[None, :]) % (2 * N)
    return row[idx]


@dataclass
class _Block:
    """Geometry of one (target curve, source curve) interaction."""

    self_block: bool
    r: np.ndarray          # |x_i - y_j|
    proj: np.ndarray       # nu(y_j).(x_i - y_j)/r * |gamma'(tau_j)|
    proj_adj: np.ndarray   # -nu(x_i).(x_i - y_j)/r * |gamma'(tau_j)|
    speed_src: np.ndarray  # |gamma'(tau_j)|
    diag_limit: np.ndarray | None = None  # K-hat(t, t) for self blocks


@dataclass
class NystromGrid:
    """Quadrature nodes and cached kernel geometry for a domain.

    Parameters
    ----------
    domain : Domain
    N : int
        Half the number of nodes per curve; each curve carries ``2N`` nodes.
    """

    domain: Domain
    N: int
    t: np.ndarray = field(init=False)
    pos: np.ndarray = field(init=False)
    normal: np.ndarray = field(init=False)
    speed: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.N < 4:
            raise ValueError(f"N must be at least 4, got {self.N}")
        N = self.N
        self.t = np.arange(2 * N) * np.pi / N
        samples = [sample(c, self.t) for c in self.domain.curves]
        self.pos = np.stack([s.position for s in samples])
        self.normal = np.stack([s.normal for s in samples])
        self.speed = np.stack([s.speed for s in samples])
        self._local = [c.local(self.t) for c in self.domain.curves]
        self._samples = samples
        self.R = km_weights(N)
        dt = self.t[:, None] - self.t[None, :]
        with np.errstate(divide="ignore"):
            self.logsin = np.log(4.0 * np.sin(0.5 * dt) ** 2)
        np.fill_diagonal(self.logsin, 0.0)
        self._build_blocks()

    @property
    def n_curves(self) -> int:
        return len(self.domain.curves)

    @property
    def size(self) -> int:
        return 2 * self.N * self.n_curves

    @property
    def weights(self) -> np.ndarray:
        """Quadrature weights ``(pi/N)|gamma'(t_j)|``, curve-major."""
        return (np.pi / self.N) * self.speed.reshape(-1)

    @property
    def points(self) -> np.ndarray:
        return self.pos.reshape(-1, 2)

    @property
    def normals(self) -> np.ndarray:
        return self.normal.reshape(-1, 2)

    def _build_blocks(self):
        curves = self.domain.curves
        M = len(curves)
        self.block_key = np.empty((M, M), dtype=object)
        self.blocks: dict = {}
        for m in range(M):
            for l in range(M):
                if m == l:
                    key = ("self", curves[m].shape_key())
                else:
                    offset = (curves[m].center[0] - curves[l].center[0],
                              curves[m].center[1] - curves[l].center[1])
                    key = ("pair", curves[m].shape_key(), curves[l].shape_key(), offset)
                self.block_key[m, l] = key
                if key not in self.blocks:
                    self.blocks[key] = self._make_block(m, l, key)

    def _make_block(self, m: int, l: int, key) -> _Block:
        cm, cl = self.domain.curves[m], self.domain.curves[l]
        loc_m, d1_m, d2_m = self._local[m]
        loc_l, _, _ = self._local[l]
        offset = np.array([cm.center[0] - cl.center[0], cm.center[1] - cl.center[1]])
        diff = offset + loc_m[:, None, :] - loc_l[None, :, :]
        r = np.hypot(diff[..., 0], diff[..., 1])
        nu_src = self.normal[l][None, :, :]
        nu_tgt = self.normal[m][:, None, :]
        sp = self.speed[l]
        self_block = key[0] == "self"
        with np.errstate(invalid="ignore", divide="ignore"):
            proj = np.sum(nu_src * diff, axis=-1) / r * sp[None, :]
            proj_adj = -np.sum(nu_tgt * diff, axis=-1) / r * sp[None, :]
        diag = None
        if self_block:
            np.fill_diagonal(proj, 0.0)
            np.fill_diagonal(proj_adj, 0.0)
            np.fill_diagonal(r, 1.0)  # placeholder, never used on the diagonal
            g1, g2 = d1_m[:, 0], d1_m[:, 1]
            h1, h2 = d2_m[:, 0], d2_m[:, 1]
            diag = (g2 * h1 - g1 * h2) / (2 * np.pi * (g1**2 + g2**2))
        elif np.min(r) == 0.0:
            raise ValueError(f"curves {m} and {l} share a quadrature node")
        return _Block(self_block, r, proj, proj_adj, sp, diag)

    def curve_slice(self, m: int) -> slice:
        n = 2 * self.N
        return slice(m * n, (m + 1) * n)

    def min_spacing(self) -> float:
        return float(np.max(self.speed)) * np.pi / self.N

    def mirror_permutation(self, axis: float | None = None) -> np.ndarray:
        """Node permutation induced by the reflection ``x -> 2 axis - x``.

        ``axis`` defaults to the mean x of the curve centers. The discrete
        system commutes with the permutation when the domain, including its
        node layout, is symmetric; otherwise a ``GeometryError`` is raised.
        """
        curves = self.domain.curves
        centers = np.array([c.center for c in curves])
        if axis is None:
            axis = float(np.mean(centers[:, 0]))
        scale = max(1.0, float(np.max(np.abs(self.points))))
        tol = 1e-10 * scale
        n = 2 * self.N
        perm = np.empty(self.size, dtype=int)
        for m, c in enumerate(curves):
            mirrored = np.array([2 * axis - c.center[0], c.center[1]])
            d = np.hypot(*(centers - mirrored).T)
            l = int(np.argmin(d))
            if d[l] > tol:
                raise GeometryError(f"curve {m} has no mirror image about x = {axis}")
            ref = self.pos[m].copy()
            ref[:, 0] = 2 * axis - ref[:, 0]
            dist = np.hypot(*(ref[:, None, :] - self.pos[l][None, :, :]).transpose(2, 0, 1))
            j = np.argmin(dist, axis=1)
            if np.max(dist[np.arange(n), j]) > tol:
                raise GeometryError(f"nodes of curve {m} do not map onto curve {l}")
            perm[m * n:(m + 1) * n] = l * n + j
        return perm


def _check_k(k) -> complex:
    k = complex(k)
    if not (math.isfinite(k.real) and math.isfinite(k.imag)):
        raise BranchCutError("non-finite wavenumber")
    if k == 0:
        raise BranchCutError("k = 0 is excluded")
    check_branch(k)
    return k


def _block_values(k: complex, grid: NystromGrid, adjoint: bool) -> dict:
    """Evaluate every distinct block of ``A_N(k)`` (or its adjoint system)."""
    N = grid.N
    w = np.pi / N
    ik2 = 0.5j * k
    out = {}
    eye = np.eye(2 * N)
    for key, b in grid.blocks.items():
        proj = b.proj_adj if adjoint else b.proj
        kr = k * b.r
        if b.self_block:
            h1 = hankel1(1, kr)
            j1 = bessel_j(1, kr)
            K = ik2 * h1 * proj
            Kt = (-k / (2 * np.pi)) * j1 * proj
            Kh = K - Kt * grid.logsin
            np.fill_diagonal(Kt, 0.0)
            np.fill_diagonal(Kh, b.diag_limit)
            out[key] = eye - w * Kh - grid.R * Kt
        else:
            out[key] = -w * ik2 * hankel1(1, kr) * proj
    return out


def _fill(grid: NystromGrid, values: dict) -> np.ndarray:
    n = 2 * grid.N
    M = grid.n_curves
    A = np.empty((M * n, M * n), dtype=complex)
    for m in range(M):
        for l in range(M):
            A[m * n:(m + 1) * n, l * n:(l + 1) * n] = values[grid.block_key[m, l]]
    return A


def assemble(k, grid: NystromGrid) -> np.ndarray:
    """Nystrom matrix ``A_N(k)`` of ``I - D_k``; singular exactly at resonances."""
    k = _check_k(k)
    return _fill(grid, _block_values(k, grid, adjoint=False))


def assemble_adjoint(k, grid: NystromGrid) -> np.ndarray:
    """Nystrom matrix of ``I - D*_k``, the adjoint under the bilinear pairing.

    The kernel is ``2 dPhi/dnu(x)``: the normal sits at the target point,
    which flips the sign of the projection relative to ``D_k``. With the
    quadrature weights ``W`` the two matrices satisfy
    ``A*_N = W^{-1} A_N^T W`` to rounding.
    """
    k = _check_k(k)
    return _fill(grid, _block_values(k, grid, adjoint=True))


def cauchy_derivative(func, k, radius: float = 1e-2, nodes: int = 16) -> np.ndarray:
    """Derivative of a holomorphic matrix function by the Cauchy integral formula.

    Trapezoidal rule for ``(1/2 pi i) \\oint F(z)/(z-k)^2 dz`` on the circle
    ``|z - k| = radius``.
    """
    theta = 2 * np.pi * np.arange(nodes) / nodes
    phase = np.exp(1j * theta)
    acc = None
    for p in range(nodes):
        term = func(k + radius * phase[p]) * (np.conj(phase[p]) / (nodes * radius))
        acc = term if acc is None else acc + term
    return acc


def assemble_derivative(k, grid: NystromGrid, radius: float = 1e-2, nodes: int = 16) -> np.ndarray:
    """``dA_N/dk`` at ``k`` via :func:`cauchy_derivative`."""
    k = _check_k(k)
    if abs(k.imag) + radius >= K_IM_MAX or abs(k) <= radius:
        raise BranchCutError("derivative contour leaves the analyticity window")
    return cauchy_derivative(lambda z: assemble(z, grid), k, radius, nodes)


def assemble_perturbation(grid: NystromGrid) -> np.ndarray:
    """Trapezoidal discretization of ``(B phi)(x) = \\int sin|x-y| phi(y) ds(y)``.

    Entry ``(i, j)`` is ``(pi/N) sin|x_i - y_j| |gamma'(tau_j)|``; the
    diagonal is exactly zero. The perturbed family is ``A_N(k) + eps * B``.
    """
    n = 2 * grid.N
    w = np.pi / grid.N
    values = {}
    for key, b in grid.blocks.items():
        blk = w * np.sin(b.r) * b.speed_src[None, :]
        if b.self_block:
            np.fill_diagonal(blk, 0.0)
        values[key] = blk
    M = grid.n_curves
    B = np.empty((M * n, M * n))
    for m in range(M):
        for l in range(M):
            B[m * n:(m + 1) * n, l * n:(l + 1) * n] = values[grid.block_key[m, l]]
    return B


def assemble_single_layer(k, grid: NystromGrid) -> np.ndarray:
    """Nystrom matrix of ``S_k`` (twice the single-layer operator).

    The self interaction splits ``(i/2) H0(k r)|gamma'|`` into
    ``M1 log(4 sin^2((t-tau)/2)) + M2`` with ``M1 = -J0(k r)|gamma'|/(2 pi)``;
    ``M2(t, t) = (i/2 - C/pi - log(k|gamma'(t)|/2)/pi) |gamma'(t)|``.
    """
    k = _check_k(k)
    N = grid.N
    w = np.pi / N
    values = {}
    for key, b in grid.blocks.items():
        sp = b.speed_src[None, :]
        kr = k * b.r
        if b.self_block:
            Mfull = 0.5j * hankel1(0, kr) * sp
            M1 = -bessel_j(0, kr) * sp / (2 * np.pi)
            M2 = Mfull - M1 * grid.logsin
            spd = b.speed_src
            np.fill_diagonal(M1, -spd / (2 * np.pi))
            np.fill_diagonal(
                M2, (0.5j - EULER_GAMMA / np.pi - np.log(k * spd / 2) / np.pi) * spd
            )
            values[key] = grid.R * M1 + w * M2
        else:
            values[key] = w * 0.5j * hankel1(0, kr) * sp
    return _fill(grid, values)


def _check_density(x, grid: NystromGrid, name: str) -> np.ndarray:
    x = np.asarray(x)
    if x.shape[0] != grid.size:
        raise ValueError(f"{name} has length {x.shape[0]}, grid expects {grid.size}")
    return x


def bilinear(phi, psi, grid: NystromGrid) -> complex:
    """``<phi, psi> = \\int phi psi ds`` without conjugation (trapezoidal)."""
    phi = _check_density(phi, grid, "phi")
    psi = _check_density(psi, grid, "psi")
    # spelled out so that swapping phi and psi gives bitwise the same sum
    re = phi.real * psi.real - phi.imag * psi.imag
    im = phi.real * psi.imag + phi.imag * psi.real
    w = grid.weights
    return complex(np.sum(w * re), np.sum(w * im))


def weighted_norm(phi, grid: NystromGrid) -> float:
    """Discrete L2 norm ``sqrt(sum (pi/N)|gamma'||phi_j|^2)``."""
    phi = _check_density(phi, grid, "phi")
    return float(np.sqrt(np.sum(grid.weights * np.abs(phi) ** 2)))


def _classify_points(points: np.ndarray, grid: NystromGrid, min_distance: float):
    """Return (inside, too_close) masks and the index of the offending curve."""
    inside = np.zeros(len(points), bool)
    close = np.zeros(len(points), bool)
    which = np.full(len(points), -1)
    for m, c in enumerate(grid.domain.curves):
        a, b = c.axes
        rel = points - np.asarray(c.center)
        ins = (rel[:, 0] / a) ** 2 + (rel[:, 1] / b) ** 2 <= 1.0
        d = np.min(np.hypot(points[:, None, 0] - grid.pos[m][None, :, 0],
                            points[:, None, 1] - grid.pos[m][None, :, 1]), axis=1)
        near = ~ins & (d < min_distance)
        which[(ins | near) & (which < 0)] = m
        inside |= ins
        close |= near
    return inside, close, which


def evaluate_field(k, phi, grid: NystromGrid, points, g=None, min_distance: float | None = None,
                   mask: bool = False):
    """Exterior field ``u(x) = \\int dPhi/dnu(y) phi ds - \\int Phi g ds``.

    Parameters
    ----------
    points : (P, 2) array
        Evaluation points, at least ``min_distance`` (default three node
        spacings) away from every curve.
    g : density, optional
        Neumann data; omitted for resonant states.
    mask : bool
        When true, points inside or near an obstacle get the value 0 and a
        boolean ``valid`` array is returned alongside the values instead of
        raising :class:`FieldPointError`.
    """
    k = _check_k(k)
    phi = _check_density(phi, grid, "phi")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if min_distance is None:
        min_distance = 3 * grid.min_spacing()
    inside, close, which = _classify_points(pts, grid, min_distance)
    bad = inside | close
    if np.any(bad) and not mask:
        i = int(np.flatnonzero(bad)[0])
        where = "inside" if inside[i] else "too close to"
        raise FieldPointError(f"point {pts[i].tolist()} is {where} curve {which[i]}")
    valid = ~bad
    u = np.zeros(len(pts), dtype=complex)
    y = grid.points
    nu = grid.normals
    wts = grid.weights
    chunk = max(1, 2_000_000 // max(1, len(y)))
    idx = np.flatnonzero(valid)
    for s in range(0, len(idx), chunk):
        sel = idx[s:s + chunk]
        diff = pts[sel, None, :] - y[None, :, :]
        r = np.hypot(diff[..., 0], diff[..., 1])
        kern = 0.25j * k * hankel1(1, k * r) * np.sum(nu[None] * diff, axis=-1) / r
        u[sel] = kern @ (wts * phi)
        if g is not None:
            u[sel] -= (0.25j * hankel1(0, k * r)) @ (wts * np.asarray(g))
    return (u, valid) if mask else u


def solve_scattering(k, g, grid: NystromGrid) -> np.ndarray:
    """Density ``phi`` solving ``(I - D_k) phi = -S_k g`` for Neumann data ``g``.

    With this sign ``phi`` is the boundary trace of the exterior solution and
    :func:`evaluate_field` with the same ``g`` reproduces the field (exterior
    jump ``+phi/2`` of the double layer with outward normals).
    """
    k = _check_k(k)
    g = _check_density(g, grid, "g")
    if not np.any(g):
        return np.zeros(grid.size, dtype=complex)
    A = assemble(k, grid)
    rhs = -(assemble_single_layer(k, grid) @ g)
    try:
        lu = linalg.LUFactor(A)
    except linalg.SingularMatrixError as exc:
        raise ScatteringSolveError(
            f"I - D_k is singular at k = {k}: a resonance or interior Dirichlet "
            f"eigenvalue is nearby ({exc})"
        ) from exc
    phi = lu.solve(rhs)
    res = np.linalg.norm(A @ phi - rhs) / max(np.linalg.norm(rhs), 1e-300)
    if res > 1e-10:
        log.warning("scattering solve residual %.2e at k=%s", res, k)
    return phi
