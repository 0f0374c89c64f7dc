import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from resonex.bie import NystromGrid
from resonex.epfinder import (
    AdjointNullSpaceError,
    EPContext,
    MatchingAmbiguityError,
    coalescence_objective,
    degeneracy_ratio,
    encircle,
    epsilon_sweep,
    fit_power_law,
    jordan_functional,
    jordan_solvability,
    match_step,
    nelder_mead,
    permutation_cycles,
    track_loop,
)
from resonex.geometry import Domain, circle
from resonex.mech import TwoMassParams, two_mass_B, two_mass_T, two_mass_exact, two_mass_perturbed_exact
from resonex.nep import ContourSpec, SSParams

from .oracles import disk_resonance


def quad(x):
    return (x[0] - 1) ** 2 + 3 * (x[1] + 2) ** 2


def rosen(x):
    return 100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2


def test_nelder_mead_quadratic():
    r = nelder_mead(quad, [0.0, 0.0], xatol=1e-10)
    assert r.converged and not r.budget_exhausted
    assert np.allclose(r.x, [1, -2], atol=1e-8)


def test_nelder_mead_rosenbrock():
    r = nelder_mead(rosen, [-1.2, 1.0], xatol=1e-10, max_evals=1000)
    assert np.allclose(r.x, [1, 1], atol=1e-6)
    assert r.nfev <= 1000


def test_nelder_mead_fatol_stops_early():
    r = nelder_mead(quad, [0.0, 0.0], fatol=1e-3, xatol=0.0)
    assert r.converged and r.fun <= 1e-3


def test_budget_flag():
    r = nelder_mead(rosen, [-1.2, 1.0], xatol=1e-14, max_evals=20)
    assert r.budget_exhausted and not r.converged
    assert r.nfev == 20 == len(r.history)


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(3, 60))
def test_best_point_ever_is_returned(a, b, budget):
    r = nelder_mead(rosen, [a, b], max_evals=budget)
    vals = [v for _, v in r.history]
    assert r.fun == min(vals)
    assert np.array_equal(r.x, r.history[int(np.argmin(vals))][0])


def test_non_finite_and_failing_objective():
    def f(x):
        if x[0] > 0.5:
            raise ArithmeticError("outside")
        return float(np.sum((x - 0.2) ** 2)) if x[1] < 0.6 else math.nan
    r = nelder_mead(f, [0.1, 0.1], steps=0.05, xatol=1e-9)
    assert np.allclose(r.x, [0.2, 0.2], atol=1e-6)
    assert any(v == math.inf for _, v in r.history) or r.nfev > 0


def test_penalty_and_invalid_radii():
    ctx = EPContext(1, ContourSpec(3.0 - 0.3j, 0.2, 16), 8, rows=1,
                    params=SSParams(probe_rank=2, moment_span=2, refine=False))
    assert ctx.penalty == pytest.approx(2.0)
    assert coalescence_objective(0.4, 0.4, ctx) == ctx.penalty
    assert coalescence_objective(0.6, 0.2, ctx) == math.inf
    assert coalescence_objective(0.3, -0.1, ctx) == math.inf


def test_objective_is_pair_distance():
    # one disk of radius R: resonances scale as 1/R
    R = 0.45
    k0, k1 = disk_resonance(0) / R, disk_resonance(1) / R
    c = ContourSpec((k0 + k1) / 2, 0.6 * abs(k0 - k1), 64)
    p = SSParams(probe_rank=6, moment_span=4, refine=False)
    # the n = 1 doublet is a semisimple double value: distance zero
    assert coalescence_objective(R, R, EPContext(1, c, 24, rows=1, params=p)) <= 1e-8
    # the even mirror sector keeps n = 0 and one member of the doublet
    even = EPContext(1, c, 24, rows=1, params=p, parity=1)
    assert coalescence_objective(R, R, even) == pytest.approx(abs(k0 - k1), rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_degeneracy_ratio_scale_invariance(seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    w = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    a, b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    r = degeneracy_ratio(v, w)
    assert 0 <= r <= 1
    assert abs(degeneracy_ratio(a * v, b * w) - r) <= 1e-12
    wt = rng.uniform(0.5, 2.0, 7)
    assert abs(degeneracy_ratio(v, w, wt) - degeneracy_ratio(np.sqrt(wt) * v, np.sqrt(wt) * w)) <= 1e-12


def test_degeneracy_ratio_orthogonal_and_errors():
    assert degeneracy_ratio([1, 0, 0], [0, 1j, 0]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        degeneracy_ratio([1, 0], [1, 0, 0])
    with pytest.raises(ValueError):
        degeneracy_ratio([0, 0], [1, 0])


def test_jordan_functional_vanishes_on_a_jordan_block():
    p = TwoMassParams.critical()
    T = two_mass_T(p)
    lam = two_mass_exact(p)[0]
    A = lam * np.eye(4) - T
    ratio, functional = jordan_functional(A, np.eye(4))
    assert ratio == pytest.approx(1.0)
    assert functional <= 1e-10


def test_jordan_functional_on_a_simple_eigenvalue():
    A = np.diag([0.0, -1.0, 2.0])  # k I - diag(1, 2, -1) at k = 1
    ratio, functional = jordan_functional(A, np.eye(3))
    assert functional == pytest.approx(1.0, abs=1e-14)


def test_jordan_solvability_rejects_semisimple_double_resonance():
    grid = NystromGrid(Domain((circle((0, 0), 1.0),)), 24)
    with pytest.raises(AdjointNullSpaceError):
        jordan_solvability(disk_resonance(1), grid)


def test_jordan_solvability_simple_disk_resonance():
    grid = NystromGrid(Domain((circle((0, 0), 1.0),)), 24)
    rep = jordan_solvability(disk_resonance(0), grid)
    assert rep.functional > 1e-2
    assert rep.adjoint_alignment > 1 - 1e-8
    assert rep.adjoint_gap > 1e-3


def test_fit_power_law_exact():
    x = np.logspace(-6, -2, 9)
    s, e = fit_power_law(x, 3 * x**0.5)
    assert s == pytest.approx(0.5, abs=1e-12) and e <= 1e-12
    assert fit_power_law(x[:2], x[:2])[0] == pytest.approx(1.0)
    assert math.isnan(fit_power_law(x[:1], x[:1])[0])


def mech_eigs(eps):
    p = TwoMassParams.critical()
    return np.linalg.eigvals(two_mass_T(p) + eps * two_mass_B(p))


def test_sqrt_splitting_at_the_mechanical_ep():
    p = TwoMassParams.critical()
    lam = two_mass_exact(p)[0]
    res = epsilon_sweep(mech_eigs, lam, np.logspace(-8, -3, 6))
    assert abs(res.slope - 0.5) < 0.01
    # closed form for the splitting
    for eps, d in zip(res.eps, res.distance):
        ex = two_mass_perturbed_exact(p, eps)[:2]
        assert d == pytest.approx(abs(ex[0] - ex[1]), rel=1e-4)


def test_linear_shift_at_a_simple_eigenvalue():
    res = epsilon_sweep(lambda e: np.array([1.0 + 2 * e, 3.0]), 1.0, np.logspace(-6, -2, 5), mode="shift")
    assert res.slope == pytest.approx(1.0, abs=1e-10)


def test_sweep_drops_missing_pairs():
    res = epsilon_sweep(lambda e: np.array([1.0 + e]) if e > 1e-4 else np.array([1.0, 1.0 + e]),
                        1.0, [1e-5, 1e-3])
    assert res.dropped == [1e-3] and res.eps.tolist() == [1e-5]


@pytest.mark.parametrize("orientation", [1, -1])
def test_encircling_the_mechanical_ep_swaps_the_pair(orientation):
    lam = two_mass_exact(TwoMassParams.critical())[0]
    loop = encircle(mech_eigs, lam, 1e-4, steps=64, count=2, orientation=orientation)
    assert loop.swaps == [(0, 1)] and not loop.is_identity
    # two turns bring the pair back
    loop2 = track_loop(lambda th: mech_eigs(1e-4 * np.exp(1j * th)), loop.trajectories[0], 128,
                       theta_start=0.0)
    assert loop2.theta[-1] == pytest.approx(2 * np.pi)
    again = track_loop(lambda th: mech_eigs(1e-4 * np.exp(1j * th)), loop.trajectories[-1], 64)
    assert np.allclose(again.trajectories[-1], loop.trajectories[0], atol=1e-9)


def test_encircling_a_simple_eigenvalue_is_identity():
    loop = encircle(lambda e: np.array([1.0 + e, 1.2 - e, 3.0]), 1.0, 0.05, steps=32, count=2)
    assert loop.is_identity and loop.swaps == []
    assert np.allclose(loop.trajectories[0], loop.trajectories[-1], atol=1e-14)


def test_loop_needs_enough_steps():
    with pytest.raises(ValueError):
        track_loop(lambda th: np.array([0j]), np.array([0j]), 8)


def test_match_step_ambiguity_and_lost_track():
    with pytest.raises(MatchingAmbiguityError):
        match_step(np.array([0j]), np.array([1.0, -1.0]))
    with pytest.raises(MatchingAmbiguityError):
        match_step(np.array([0j, 1.0]), np.array([0.1]))
    out = match_step(np.array([0j, 1.0]), np.array([1.1, 0.05, 7.0]))
    assert np.array_equal(out, [0.05, 1.1])


def test_permutation_cycles():
    assert permutation_cycles([1, 0, 2]) == [(0, 1), (2,)]
    assert permutation_cycles([1, 2, 0]) == [(0, 1, 2)]
