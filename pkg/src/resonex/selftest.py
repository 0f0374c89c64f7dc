"""Quick end-to-end checks with exactly known answers.

Each check exercises one public operation on an input whose result is
known in closed form (identity matrices, diagonal pencils, analytic
minima, penalty branches). The whole set runs in a few seconds and is
what ``resonex selftest`` executes.
"""

from __future__ import annotations

import tempfile
import time
from pathlib import Path
from typing import Callable

import numpy as np

from . import linalg
from .bie import (
    NystromGrid,
    assemble,
    assemble_perturbation,
    bilinear,
    cauchy_derivative,
    evaluate_field,
    solve_scattering,
)
from .epfinder import (
    EPContext,
    coalescence_objective,
    degeneracy_ratio,
    encircle,
    nelder_mead,
)
from .geometry import Domain, GeometryError, circle, grid_domain, sample
from .mech import (
    FIG5_PARAMS,
    TwoMassParams,
    bloch_band,
    finite_chain,
    jordan_structure,
    two_mass_exact,
    two_mass_perturbed_exact,
)
from .nep import ContourSpec, SSParams, refine, resonances, solve_nep
from .specfun import bessel_j01, hankel1_01

CHECKS: list[tuple[str, Callable[[], bool]]] = []


def check(name: str):
    def deco(fn):
        CHECKS.append((name, fn))
        return fn
    return deco


def _close(a, b, tol) -> bool:
    return bool(np.max(np.abs(np.asarray(a) - np.asarray(b))) <= tol)


# -- linalg ------------------------------------------------------------------

@check("lu_solve identity and diagonal")
def _lu():
    b = np.array([1.0, -2.0, 3.0j])
    return _close(linalg.lu_solve(np.eye(3), b), b, 1e-15) and _close(
        linalg.lu_solve(np.diag([2.0, 3.0]), [2.0, 3.0]), [1, 1], 1e-15)


@check("svd of I2 and diag(3, 0)")
def _svd():
    return _close(linalg.svd(np.eye(2)).s, [1, 1], 1e-15) and _close(
        linalg.svd(np.diag([3.0, 0.0])).s, [3, 0], 1e-15)


@check("eig of diag(1, 2, 3)")
def _eig():
    return _close(np.sort(linalg.eig(np.diag([1.0, 2.0, 3.0])).values.real), [1, 2, 3], 1e-14)


@check("null vectors of diag(1, 0)")
def _null():
    A = np.diag([1.0, 0.0])
    r = linalg.null_vectors(A, "right")[:, 0]
    l = linalg.null_vectors(A, "left")[:, 0]
    return _close(np.abs(r), [0, 1], 1e-14) and _close(np.abs(l), [0, 1], 1e-14)


# -- specfun -----------------------------------------------------------------

@check("J0(0) = 1, J1(0) = 0")
def _origin():
    j0, j1 = bessel_j01(0.0)
    return j0 == 1 and j1 == 0


@check("Bessel parity")
def _parity():
    z = np.array([0.3 + 0.2j, 2.0 - 1.0j, 7.5 + 0.1j])
    a, b = bessel_j01(z), bessel_j01(-z)
    return _close(a[0], b[0], 1e-13) and _close(a[1], -b[1], 1e-13)


@check("Wronskian J1 H0 - J0 H1 = 2i/(pi z)")
def _wronskian():
    rng = np.random.default_rng(3)
    z = rng.uniform(0.1, 30, 50) + 1j * rng.uniform(-1, 1, 50)
    j0, j1 = bessel_j01(z)
    h0, h1 = hankel1_01(z)
    t = 2j / (np.pi * z)
    return bool(np.max(np.abs(j1 * h0 - j0 * h1 - t) / np.abs(t)) <= 1e-11)


# -- geometry ----------------------------------------------------------------

@check("single-disk grid and touching radii")
def _grid():
    d = grid_domain(1, 1, 0.4)
    ok = len(d) == 1 and d.curves[0].center == (0.0, 0.5)
    try:
        grid_domain(2, 1, 0.5)
    except GeometryError:
        return ok
    return False


@check("circle samples")
def _circle():
    s = sample(circle((1.0, 2.0), 1.0), 0.0)
    t = sample(circle((0, 0), 0.7), np.linspace(0, 6, 7))
    return (_close(s.position, [2, 2], 1e-15) and _close(s.normal, [1, 0], 1e-15)
            and _close(s.speed, 1.0, 1e-15) and _close(t.speed, 0.7, 1e-15))


# -- bie ---------------------------------------------------------------------

@check("singular values invariant under circle phase")
def _phase():
    k = 2.0 - 0.3j
    s = [linalg.svd(assemble(k, NystromGrid(Domain((circle((0, 0), 1.0, ph),)), 8))).s
         for ph in (0.0, 0.37)]
    return _close(s[0], s[1], 1e-10)


@check("derivative of a constant matrix vanishes")
def _deriv():
    B = assemble_perturbation(NystromGrid(grid_domain(2, 1, 0.3), 6))
    return bool(np.max(np.abs(cauchy_derivative(lambda k: B, 1.0 - 0.5j))) <= 1e-12)


@check("perturbation matrix diagonal and symmetry")
def _pert():
    B = assemble_perturbation(NystromGrid(grid_domain(3, 1, 0.3), 6))
    return bool(np.all(np.diag(B) == 0)) and _close(B, B.T, 1e-15)


@check("bilinear form examples")
def _bilinear():
    g = NystromGrid(Domain((circle((0, 0), 1.0),)), 12)
    one = np.ones(g.size)
    a = np.exp(1j * g.t)
    return (abs(bilinear(one, one, g) - 2 * np.pi) <= 1e-12
            and bilinear(a, one + a, g) == bilinear(one + a, a, g)
            and abs(bilinear(np.cos(g.t), np.sin(g.t), g)) <= 1e-12)


@check("zero density and zero data")
def _zero():
    g = NystromGrid(Domain((circle((0, 0), 1.0),)), 8)
    u = evaluate_field(2.0, np.zeros(g.size), g, [[3.0, 0.0]])
    phi = solve_scattering(1.0 + 1.0j, np.zeros(g.size), g)
    return bool(np.all(u == 0) and np.all(phi == 0))


# -- nep ---------------------------------------------------------------------

@check("scalar and diagonal pencils")
def _pencil():
    p = SSParams(probe_rank=2, moment_span=2, refine=False)
    one = solve_nep(lambda k: np.array([[k - 1]]), ContourSpec(1.0, 0.5, 32),
                    SSParams(probe_rank=1, moment_span=2))
    two = solve_nep(lambda k: np.diag([k - 1, k - 2]), ContourSpec(1.5, 1.0, 32), p)
    return (one.hankel_rank == 1 and _close(one.values, [1], 1e-12)
            and _close(np.sort(two.values.real), [1, 2], 1e-10)
            and all(e.multiplicity == 1 for e in two))


@check("empty contour gives no resonances")
def _empty():
    g = NystromGrid(Domain((circle((0, 0), 1.0),)), 8)
    return len(resonances(g, ContourSpec(3.0 - 0.3j, 0.2, 16), SSParams(probe_rank=2, moment_span=2))) == 0


@check("Newton fixed point")
def _fixed():
    r = refine(1.0 + 0.0j, lambda k: np.diag([k - 1, k - 3]))
    return abs(r.k - 1) <= 1e-12


# -- epfinder ----------------------------------------------------------------

@check("Nelder-Mead on a quadratic and on Rosenbrock")
def _nm():
    a = nelder_mead(lambda x: (x[0] - 1) ** 2 + (x[1] - 2) ** 2, [0.0, 0.0], xatol=1e-10)
    b = nelder_mead(lambda x: 100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2, [-1.2, 1.0],
                    xatol=1e-10, max_evals=500)
    return _close(a.x, [1, 2], 1e-6) and _close(b.x, [1, 1], 1e-4) and b.nfev <= 500


@check("Nelder-Mead budget of one")
def _nm_one():
    r = nelder_mead(lambda x: float(x @ x), [0.3, 0.4], max_evals=1)
    return r.budget_exhausted and _close(r.x, [0.3, 0.4], 0) and r.nfev == 1


@check("coalescence penalty branch")
def _penalty():
    ctx = EPContext(1, ContourSpec(3.0 - 0.3j, 0.2, 16), 8, rows=1,
                    params=SSParams(probe_rank=2, moment_span=2, refine=False))
    return coalescence_objective(0.4, 0.4, ctx) == ctx.penalty


@check("degeneracy ratio of proportional and orthonormal pairs")
def _ratio():
    v = np.array([1.0, 2.0j, -0.5])
    return degeneracy_ratio(v, 2 * v) <= 1e-14 and abs(degeneracy_ratio([1, 0], [0, 1]) - 1) <= 1e-15


@check("encircling a simple eigenvalue is the identity")
def _loop():
    loop = encircle(lambda e: np.array([1.0 + e, 3.0 - e]), 1.0, 0.1, steps=16, count=2)
    return loop.is_identity


# -- mech --------------------------------------------------------------------

@check("unperturbed closed form at eps = 0")
def _mech0():
    p = TwoMassParams.critical()
    return _close(np.sort_complex(two_mass_perturbed_exact(p, 0.0)),
                  np.sort_complex(two_mass_exact(p)), 1e-15)


@check("Bloch band continuity")
def _band():
    b = np.linspace(-3, 3, 61)
    lo, hi = bloch_band(FIG5_PARAMS, b), bloch_band(FIG5_PARAMS, b + 1e-4)
    return bool(np.abs(lo[:, :, None] - hi[:, None, :]).min(axis=2).max() <= 1e-2)


@check("finite chain theta irrelevant at eps = 0")
def _theta():
    return bool(np.array_equal(finite_chain(4, FIG5_PARAMS, 0.0, 0.0),
                               finite_chain(4, FIG5_PARAMS, 0.0, 1.3)))


@check("Jordan structure of the identity")
def _identity():
    js = jordan_structure(np.eye(4))
    return len(js) == 1 and (js[0].geometric, js[0].algebraic) == (4, 4)


# -- cli ---------------------------------------------------------------------

@check("CLI: empty contour writes zero rows")
def _cli_empty():
    from .cli import run

    cfg = {
        "schema_version": 1,
        "domain": {"curves": [{"center": [0, 0], "radius": 1.0}]},
        "N": 8,
        "contour": {"center": [3.0, -0.3], "radius": 0.2, "nodes": 16},
        "ss": {"probe_rank": 2, "moment_span": 2},
    }
    with tempfile.TemporaryDirectory() as tmp:
        summary = run("resonances", cfg, tmp)
        lines = (Path(tmp) / "resonances.csv").read_text().splitlines()
    return summary["count"] == 0 and len(lines) == 2


@check("CLI: ep-search with max_evals = 1")
def _cli_budget():
    from .cli import run

    cfg = {
        "schema_version": 1,
        "domain": {"grid": {"columns": 1, "rows": 1, "radii": [0.4, 0.4]}},
        "N": 8,
        "contour": {"center": [3.0, -0.3], "radius": 0.2, "nodes": 16},
        "ss": {"probe_rank": 2, "moment_span": 2},
        "ep_search": {"start": [0.4, 0.4], "max_evals": 1},
    }
    with tempfile.TemporaryDirectory() as tmp:
        rep = run("ep-search", cfg, tmp)
    return rep["budget_exhausted"] and rep["evaluations"] == 1 and (rep["R1"], rep["R2"]) == (0.4, 0.4)


def run() -> list[dict]:
    """Run every check; exceptions count as failures."""
    results = []
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            ok = bool(fn())
            err = None
        except Exception as exc:  # noqa: BLE001 - report, do not abort the suite
            ok, err = False, f"{type(exc).__name__}: {exc}"
        r = {"name": name, "passed": ok, "seconds": round(time.perf_counter() - t0, 3)}
        if err:
            r["error"] = err
        results.append(r)
    return results
