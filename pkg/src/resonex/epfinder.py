"""Exceptional-point workbench.

Searches obstacle radii where two resonances coalesce (Nelder-Mead on
their distance) and diagnoses the result: rank of the eigenvector pair,
solvability of the first Jordan-chain equation, the exponent with which a
perturbation splits the pair, and the permutation picked up when the
perturbation parameter encircles zero.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import linalg
from .bie import (
    NystromGrid,
    assemble,
    assemble_adjoint,
    assemble_derivative,
    weighted_norm,
    bilinear,
)
from .geometry import GeometryError, grid_domain
from .nep import ContourSpec, SSParams, resonances, solve_nep

__all__ = [
    "NMResult",
    "nelder_mead",
    "EPContext",
    "coalescence_objective",
    "degeneracy_ratio",
    "JordanReport",
    "jordan_functional",
    "jordan_solvability",
    "AdjointNullSpaceError",
    "SweepResult",
    "fit_power_law",
    "epsilon_sweep",
    "MatchingAmbiguityError",
    "match_step",
    "LoopResult",
    "track_loop",
    "encircle",
    "permutation_cycles",
]

log = logging.getLogger(__name__)


# -- Nelder-Mead -------------------------------------------------------------

class NMResult(NamedTuple):
    x: np.ndarray
    fun: float
    nfev: int
    converged: bool
    budget_exhausted: bool
    history: list


def nelder_mead(
    f: Callable[[np.ndarray], float],
    x0,
    *,
    reflection: float = 1.0,
    expansion: float = 2.0,
    contraction: float = 0.5,
    shrink: float = 0.5,
    fatol: float = 0.0,
    xatol: float = 1e-12,
    max_evals: int = 500,
    steps=None,
) -> NMResult:
    """Minimize ``f`` with the Nelder-Mead simplex method.

    The initial simplex is ``x0`` plus one vertex per coordinate, offset by
    ``max(1e-3, 1e-3 |x0_i|)`` unless ``steps`` is given. Iteration stops
    when the best value drops to ``fatol``, the simplex diameter to
    ``xatol``, or after ``max_evals`` evaluations. Non-finite objective
    values count as ``+inf``. Ties between vertices are broken by
    lexicographic order of their coordinates. The best point ever evaluated
    is returned.
    """
    x0 = np.asarray(x0, dtype=float)
    d = x0.size
    history: list = []
    best = [None, math.inf]

    def call(x):
        try:
            v = float(f(x))
        except (ArithmeticError, ValueError) as exc:
            log.warning("objective failed at %s: %s", x, exc)
            v = math.inf
        if not math.isfinite(v):
            v = math.inf
        history.append((x.copy(), v))
        if v < best[1] or best[0] is None:
            best[0], best[1] = x.copy(), v
        return v

    if steps is None:
        steps = np.maximum(1e-3, 1e-3 * np.abs(x0))
    steps = np.broadcast_to(np.asarray(steps, dtype=float), (d,))
    simplex = [x0.copy()] + [x0 + steps[i] * np.eye(d)[i] for i in range(d)]
    values = []
    for x in simplex:
        if len(history) >= max_evals:
            break
        values.append(call(x))
    simplex = simplex[:len(values)]

    def order():
        idx = sorted(range(len(simplex)), key=lambda i: (values[i], tuple(simplex[i])))
        return [simplex[i] for i in idx], [values[i] for i in idx]

    converged = False
    while len(history) < max_evals and len(simplex) == d + 1:
        simplex, values = order()
        if values[0] <= fatol:
            converged = True
            break
        diam = max(np.max(np.abs(x - simplex[0])) for x in simplex[1:])
        if diam <= xatol:
            converged = True
            break
        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]
        xr = centroid + reflection * (centroid - worst)
        fr = call(xr)
        if fr < values[0]:
            if len(history) >= max_evals:
                simplex[-1], values[-1] = xr, fr
                break
            xe = centroid + expansion * (xr - centroid)
            fe = call(xe)
            simplex[-1], values[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
            continue
        if len(history) >= max_evals:
            break
        if fr < values[-1]:
            xc = centroid + contraction * (xr - centroid)
            fc = call(xc)
            if fc <= fr:
                simplex[-1], values[-1] = xc, fc
                continue
        else:
            xc = centroid + contraction * (worst - centroid)
            fc = call(xc)
            if fc < values[-1]:
                simplex[-1], values[-1] = xc, fc
                continue
        for i in range(1, d + 1):
            if len(history) >= max_evals:
                break
            simplex[i] = simplex[0] + shrink * (simplex[i] - simplex[0])
            values[i] = call(simplex[i])
    budget = not converged and len(history) >= max_evals
    return NMResult(best[0], best[1], len(history), converged, budget, history)


# -- coalescence objective ---------------------------------------------------

@dataclass
class EPContext:
    """Everything but the radii needed to evaluate the coalescence objective."""

    columns: int
    contour: ContourSpec
    N: int
    rows: int = 2
    pitch_x: float = 1.0
    pitch_y: float = 1.0
    params: SSParams = field(default_factory=lambda: SSParams(refine=False))
    parity: int | None = None  # restrict to one mirror-symmetry sector

    def grid(self, R1: float, R2: float) -> NystromGrid:
        dom = grid_domain(self.columns, self.rows, R1, R2, self.pitch_x, self.pitch_y)
        return NystromGrid(dom, self.N)

    @property
    def penalty(self) -> float:
        return 10.0 * self.contour.radius


def _pair_distance(values: np.ndarray) -> float:
    if values.size < 2:
        return math.inf
    D = np.abs(values[:, None] - values[None, :])
    D[np.diag_indices_from(D)] = np.inf
    return float(D.min())


def coalescence_objective(R1: float, R2: float, ctx: EPContext) -> float:
    """Smallest distance between resonances inside the context contour.

    Returns ``10 * radius`` when fewer than two resonances are enclosed and
    ``+inf`` when the radii are invalid or the solver fails.
    """
    if not (0 < R1 < 0.5 and 0 < R2 < 0.5):
        return math.inf
    try:
        grid = ctx.grid(R1, R2)
        spec = resonances(grid, ctx.contour, ctx.params, with_vectors=False, parity=ctx.parity)
    except (GeometryError, ArithmeticError, ValueError) as exc:
        log.warning("objective failed at R=(%r, %r): %s", R1, R2, exc)
        return math.inf
    vals = spec.values
    if vals.size < 2:
        return ctx.penalty
    return _pair_distance(vals)


# -- degeneracy and Jordan-chain diagnostics --------------------------------

def degeneracy_ratio(psi1, psi2, weights=None) -> float:
    """``sigma_2 / sigma_1`` of ``[psi1, psi2]`` after normalizing both columns.

    ``weights`` (quadrature weights of the grid) define the norm used for
    the normalization; Euclidean when omitted.
    """
    psi1 = np.asarray(psi1, dtype=complex)
    psi2 = np.asarray(psi2, dtype=complex)
    if psi1.shape != psi2.shape:
        raise ValueError("eigenvectors have different lengths")
    w = np.ones(psi1.shape) if weights is None else np.asarray(weights, dtype=float)
    sq = np.sqrt(w)
    cols = []
    for v in (psi1, psi2):
        nrm = np.linalg.norm(sq * v)
        if nrm == 0:
            raise ValueError("zero eigenvector")
        cols.append(sq * v / nrm)
    s = np.linalg.svd(np.stack(cols, axis=1), compute_uv=False)
    return float(s[1] / s[0])


class AdjointNullSpaceError(ArithmeticError):
    """The adjoint null space is not one-dimensional at the working tolerance."""


class JordanReport(NamedTuple):
    derivative_ratio: float
    functional: float
    adjoint_alignment: float
    adjoint_gap: float


def jordan_functional(A: np.ndarray, dA: np.ndarray, psi0=None, adjoint_vector=None,
                      weights=None) -> tuple[float, float]:
    """``(||A' psi0|| / ||psi0||, |<A' psi0/||psi0||, psi/||psi||>|)``.

    The pairing is ``<x, y> = sum w_i x_i y_i`` (no conjugation) and norms are
    ``w``-weighted. ``psi0`` defaults to the right null vector of ``A`` and
    ``adjoint_vector`` to ``w^{-1}`` times its left (transpose) null vector.
    The second value vanishes exactly when the chain equation
    ``A psi1 = -A' psi0`` is solvable.
    """
    n = A.shape[0]
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if psi0 is None:
        psi0 = linalg.null_vectors(A, "right", 1)[:, 0]
    if adjoint_vector is None:
        adjoint_vector = linalg.null_vectors(A, "left", 1)[:, 0] / w

    def norm(v):
        return float(np.sqrt(np.sum(w * np.abs(v) ** 2)))

    Dp = dA @ psi0 / norm(psi0)
    ratio = norm(Dp)
    functional = abs(np.sum(w * Dp * adjoint_vector)) / norm(adjoint_vector)
    return ratio, float(functional)


def jordan_solvability(k0: complex, grid: NystromGrid, psi0=None, null_tol: float = 1e-6,
                       derivative_radius: float = 1e-2, derivative_nodes: int = 16,
                       A: np.ndarray | None = None) -> JordanReport:
    """Test whether a Jordan chain of length two starts at ``k0``.

    The adjoint eigenvector comes from the directly assembled adjoint system
    and is cross-checked against the weighted left null vector of ``A_N``
    (``adjoint_alignment`` is ``|cos|`` of the angle between them).

    Raises
    ------
    AdjointNullSpaceError
        When the adjoint system has a second singular value below
        ``null_tol * sigma_max`` (geometric multiplicity above one) or no
        small singular value at all.
    """
    if A is None:
        A = assemble(k0, grid)
    dA = assemble_derivative(k0, grid, derivative_radius, derivative_nodes)
    Aadj = assemble_adjoint(k0, grid)
    smax = linalg.spectral_norm(Aadj)
    vecs, svals = linalg.null_vectors(Aadj, "right", 2, return_values=True)
    if svals[0] > null_tol * smax or svals[1] <= null_tol * smax:
        raise AdjointNullSpaceError(
            f"adjoint singular values {svals / smax} do not bracket the null tolerance {null_tol}"
        )
    psi = vecs[:, 0]
    w = grid.weights
    left = linalg.null_vectors(A, "left", 1)[:, 0] / w
    align = abs(np.vdot(psi, left)) / (np.linalg.norm(psi) * np.linalg.norm(left))
    ratio, functional = jordan_functional(A, dA, psi0, psi, w)
    return JordanReport(ratio, functional, float(align), float(svals[1] / smax))


# -- perturbation sweep ------------------------------------------------------

@dataclass
class SweepResult:
    eps: np.ndarray
    values: list           # eigenvalues tracked at each eps
    distance: np.ndarray   # pair distance or displacement
    slope: float
    stderr: float
    dropped: list


def fit_power_law(x, y) -> tuple[float, float]:
    """Least-squares slope of ``log y`` against ``log x`` and its standard error."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    if lx.size < 2:
        return math.nan, math.nan
    if lx.size == 2:
        return float((ly[1] - ly[0]) / (lx[1] - lx[0])), 0.0
    (slope, _), cov = np.polyfit(lx, ly, 1, cov=True)
    return float(slope), float(math.sqrt(cov[0, 0]))


def epsilon_sweep(
    eigenvalues: Callable[[float], np.ndarray],
    k0: complex,
    eps_values: Sequence[float],
    mode: str = "pair",
    min_eps: float = 0.0,
) -> SweepResult:
    """Distance between the two eigenvalues nearest ``k0`` as ``eps`` varies.

    ``eigenvalues(eps)`` returns the eigenvalues of the perturbed problem in
    the contour. ``mode="pair"`` measures ``|k1(eps) - k2(eps)|``;
    ``mode="shift"`` measures ``|k(eps) - k0|`` for the single nearest one.
    The power-law fit uses ``eps >= min_eps`` only.
    """
    need = 2 if mode == "pair" else 1
    kept_eps, kept_vals, dist, dropped = [], [], [], []
    for eps in eps_values:
        vals = np.asarray(eigenvalues(eps), dtype=complex)
        if vals.size < need:
            log.warning("eps=%g: only %d eigenvalue(s) in the contour; dropped", eps, vals.size)
            dropped.append(eps)
            continue
        near = vals[np.argsort(np.abs(vals - k0))[:need]]
        kept_eps.append(eps)
        kept_vals.append(near)
        dist.append(abs(near[0] - near[1]) if mode == "pair" else abs(near[0] - k0))
    e = np.array(kept_eps, dtype=float)
    d = np.array(dist, dtype=float)
    use = (e >= min_eps) & (d > 0)
    slope, err = fit_power_law(e[use], d[use])
    return SweepResult(e, kept_vals, d, slope, err, dropped)


def grid_eigenvalue_function(grid: NystromGrid, B: np.ndarray, contour: ContourSpec,
                             params: SSParams | None = None):
    """``eps -> eigenvalues of A_N(k) + eps B`` inside ``contour``."""
    params = params or SSParams()

    def fn(eps):
        return resonances(grid, contour, params, perturbation=B, eps=eps).values

    return fn


# -- encircling --------------------------------------------------------------

class MatchingAmbiguityError(ArithmeticError):
    """Two candidates are equally close to a tracked eigenvalue."""


def match_step(prev: np.ndarray, current: np.ndarray, ambiguity: float = 1e-12) -> np.ndarray:
    """Assign each tracked value in ``prev`` to a value of ``current``.

    Greedy over all pairs sorted by distance. Returns ``current`` reordered
    to follow ``prev``.
    """
    prev = np.asarray(prev, complex)
    current = np.asarray(current, complex)
    if current.size < prev.size:
        raise MatchingAmbiguityError(
            f"lost track: {prev.size} eigenvalues followed, {current.size} found"
        )
    D = np.abs(prev[:, None] - current[None, :])
    for i in range(prev.size):
        row = np.sort(D[i])
        if row.size > 1 and row[1] - row[0] <= ambiguity:
            raise MatchingAmbiguityError(
                f"eigenvalue {prev[i]:.6g} has two candidates within {ambiguity:g}; use more steps"
            )
    pairs = sorted(((D[i, j], i, j) for i in range(prev.size) for j in range(current.size)))
    out = np.empty(prev.size, complex)
    used_i, used_j = set(), set()
    for _, i, j in pairs:
        if i in used_i or j in used_j:
            continue
        out[i] = current[j]
        used_i.add(i)
        used_j.add(j)
        if len(used_i) == prev.size:
            break
    return out


def permutation_cycles(perm: Sequence[int]) -> list[tuple[int, ...]]:
    seen, cycles = set(), []
    for s in range(len(perm)):
        if s in seen:
            continue
        c, i = [], s
        while i not in seen:
            seen.add(i)
            c.append(i)
            i = perm[i]
        cycles.append(tuple(c))
    return cycles


@dataclass
class LoopResult:
    theta: np.ndarray
    trajectories: np.ndarray  # (steps + 1, tracked)
    permutation: list

    @property
    def cycles(self) -> list:
        return permutation_cycles(self.permutation)

    @property
    def is_identity(self) -> bool:
        return all(len(c) == 1 for c in self.cycles)

    @property
    def swaps(self) -> list:
        return [c for c in self.cycles if len(c) == 2]


def track_loop(eigenvalues: Callable[[float], np.ndarray], start: np.ndarray, steps: int,
               theta_start: float = 0.0, orientation: int = 1,
               ambiguity: float = 1e-12) -> LoopResult:
    """Follow ``start`` through ``eigenvalues(theta)`` for one full turn.

    ``eigenvalues(theta)`` returns the candidate eigenvalues at angle
    ``theta``; nearest-neighbour matching links consecutive steps. The
    permutation maps each tracked index to the index of the start value it
    ends on.
    """
    if steps < 16:
        raise ValueError("need at least 16 steps for a loop")
    thetas = theta_start + orientation * 2 * np.pi * np.arange(steps + 1) / steps
    cur = np.asarray(start, complex)
    traj = [cur]
    for th in thetas[1:]:
        cur = match_step(cur, eigenvalues(th), ambiguity)
        traj.append(cur)
    traj = np.array(traj)
    start_vals = traj[0]
    perm = [int(np.argmin(np.abs(start_vals - v))) for v in traj[-1]]
    return LoopResult(thetas, traj, perm)


def encircle(
    eigenvalues_at: Callable[[complex], np.ndarray],
    k0: complex,
    eps_radius: float,
    steps: int = 64,
    count: int = 2,
    orientation: int = 1,
) -> LoopResult:
    """Track the ``count`` eigenvalues nearest ``k0`` along ``eps = r e^{i theta}``.

    ``eigenvalues_at(eps)`` returns the eigenvalues of the perturbed problem
    for complex ``eps``.
    """
    def at_theta(th):
        return np.asarray(eigenvalues_at(eps_radius * np.exp(1j * th)), complex)

    first = at_theta(0.0)
    if first.size < count:
        raise MatchingAmbiguityError(f"only {first.size} eigenvalues at theta = 0")
    start = first[np.argsort(np.abs(first - k0))[:count]]
    return track_loop(at_theta, start, steps, orientation=orientation)
