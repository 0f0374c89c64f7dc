import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from resonex.bie import NystromGrid, assemble
from resonex.geometry import Domain, circle, grid_domain
from resonex.nep import (
    ContourError,
    ContourSpec,
    SSParams,
    hankel_eigs,
    moments,
    refine,
    residual_of,
    resonances,
    solve_nep,
)

from .oracles import disk_resonance


def linear_pencil(n, seed):
    rng = np.random.default_rng(seed)
    A0 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return A0, (lambda k: A0 - k * np.eye(n))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_ss_matches_dense_eig_on_linear_pencils(seed):
    n = 30
    A0, A = linear_pencil(n, seed)
    exact = np.linalg.eigvals(A0)
    c = complex(np.median(exact.real), np.median(exact.imag))
    r = 2.0
    # keep eigenvalues away from the contour so the trapezoid rule converges
    if np.min(np.abs(np.abs(exact - c) - r)) < 0.2:
        c += 0.31
    inside = exact[np.abs(exact - c) < r]
    if np.min(np.abs(np.abs(exact - c) - r)) < 0.2:
        return
    spec = solve_nep(A, ContourSpec(c, r, 128), SSParams(probe_rank=8, moment_span=8))
    got = spec.values
    assert got.size == inside.size
    for z in inside:
        assert np.min(np.abs(got - z)) <= 1e-10 * max(1.0, abs(z))


def test_linear_pencil_without_refinement():
    A0, A = linear_pencil(12, 7)
    exact = np.linalg.eigvals(A0)
    c, r = complex(exact[0]), 0.6 * np.sort(np.abs(exact - exact[0]))[1]
    spec = solve_nep(A, ContourSpec(c, r, 128), SSParams(probe_rank=4, moment_span=4, refine=False))
    assert spec.values.size == 1
    assert abs(spec.values[0] - exact[0]) <= 1e-10


def test_scalar_residue_moment():
    p = SSParams(probe_rank=1, moment_span=2)
    mu = moments(lambda k: np.array([[k - 1.0]]), ContourSpec(1.0, 0.5, 32), p)
    U, V = p.probes(1)
    # residue of 1/(k-1) is 1 and s = 0 at the eigenvalue
    assert abs(mu[0][0, 0] - (U.conj().T @ V)[0, 0]) <= 1e-13
    assert all(abs(m[0, 0]) <= 1e-13 for m in mu[1:])
    vals, rank = hankel_eigs(mu, p, ContourSpec(1.0, 0.5, 32), return_rank=True)
    assert rank == 1 and abs(vals[0] - 1) <= 1e-12


def test_diagonal_pencil():
    spec = solve_nep(lambda k: np.diag([k - 1, k - 2]), ContourSpec(1.5, 1.0, 32),
                     SSParams(probe_rank=2, moment_span=2))
    assert np.allclose(sorted(spec.values.real), [1, 2], atol=1e-12)
    assert all(e.multiplicity == 1 and e.residual < 1e-12 for e in spec)


def test_semisimple_double_eigenvalue_counts_twice():
    spec = solve_nep(lambda k: np.diag([k - 1, k - 1, k - 5]), ContourSpec(1.0, 1.0, 64),
                     SSParams(probe_rank=3, moment_span=3))
    assert spec.count == 2
    assert abs(spec.entries[0].k - 1) < 1e-9


def test_defective_pair_found_by_contour():
    # Jordan block: the eigenvalue 0.5 has algebraic multiplicity 2
    J = np.array([[0.5, 1.0], [0.0, 0.5]])
    spec = solve_nep(lambda k: J - k * np.eye(2), ContourSpec(0.0, 1.0, 64),
                     SSParams(probe_rank=2, moment_span=2))
    assert spec.count == 2
    assert np.max(np.abs(spec.values - 0.5)) < 1e-6


def test_refine_fixed_point_and_convergence():
    A = lambda k: np.diag([k - 1, k - 3])  # noqa: E731
    assert abs(refine(1.0 + 0j, A).k - 1) <= 1e-12
    r = refine(1.2 + 0.1j, A)
    assert r.converged and abs(r.k - 1) <= 1e-12


def test_residual_of_singular_matrix():
    res, v, u = residual_of(np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert res == 0 and abs(abs(v[1]) - 1) < 1e-15


@pytest.mark.parametrize("n", [0, 1, 2])
def test_disk_oracle(n):
    kstar = disk_resonance(n)
    grid = NystromGrid(Domain((circle((0, 0), 1.0),)), 40)
    contour = ContourSpec(kstar + 0.05 - 0.03j, 0.15, 32)
    spec = resonances(grid, contour, SSParams(probe_rank=4, moment_span=4))
    # n >= 1 modes come in cos/sin pairs: one eigenvalue of multiplicity 2
    assert spec.count == (1 if n == 0 else 2)
    for k in spec.values:
        assert abs(k - kstar) <= 1e-8


def test_no_spurious_values_from_quadrature_noise():
    # contour free of resonances: the Hankel matrix holds only quadrature noise
    grid = NystromGrid(grid_domain(3, 2, 0.35, 0.25), 12)
    spec = resonances(grid, ContourSpec(4.6 - 0.45j, 0.3, 48), SSParams(probe_rank=12, moment_span=6))
    assert len(spec) == 0


def test_empty_contour():
    grid = NystromGrid(Domain((circle((0, 0), 1.0),)), 8)
    spec = resonances(grid, ContourSpec(3.0 - 0.3j, 0.2, 16), SSParams(probe_rank=2, moment_span=2))
    assert len(spec) == 0 and spec.values.size == 0


def test_contour_validation():
    with pytest.raises(ValueError):
        ContourSpec(0, -1.0)
    with pytest.raises(ValueError):
        ContourSpec(0, 1.0, 7)
    grid = NystromGrid(Domain((circle((0, 0), 1.0),)), 8)
    with pytest.raises(ContourError):
        resonances(grid, ContourSpec(1.0, 0.5, 16))


def test_singular_node_raises():
    with pytest.raises(ContourError):
        c = ContourSpec(1.0, 0.5, 8)
        node = c.points()[3]
        solve_nep(lambda k: np.array([[k - node]]), c, SSParams(probe_rank=1))


def test_seed_determinism():
    grid = NystromGrid(grid_domain(2, 1, 0.3), 8)
    c = ContourSpec(4.0 - 0.6j, 0.5, 16)
    a = resonances(grid, c, SSParams(seed=5), with_vectors=False, allow_upper=True).values
    b = resonances(grid, c, SSParams(seed=5), with_vectors=False, allow_upper=True).values
    assert np.array_equal(a, b)


def test_parity_sectors_partition_spectrum():
    grid = NystromGrid(grid_domain(8, 2, 0.35, 0.25), 12)
    c = ContourSpec(4.6 - 0.45j, 0.3, 48)
    p = SSParams(probe_rank=12, moment_span=6)
    full = resonances(grid, c, p).values
    even = resonances(grid, c, p, parity=1)
    odd = resonances(grid, c, p, parity=-1)
    split = np.concatenate([even.values, odd.values])
    assert full.size == 3 and even.values.size == 2 and odd.values.size == 1
    assert split.size == full.size
    for z in full:
        assert np.min(np.abs(split - z)) < 1e-8
    perm = grid.mirror_permutation()
    for e in even:
        assert np.allclose(e.vector[perm], e.vector, atol=1e-8)
    for e in odd:
        assert np.allclose(e.vector[perm], -e.vector, atol=1e-8)


def test_mirror_permutation_commutes_with_matrix():
    grid = NystromGrid(grid_domain(4, 2, 0.3, 0.2), 8)
    P = grid.mirror_permutation()
    A = assemble(3.0 - 0.4j, grid)
    assert np.max(np.abs(A[np.ix_(P, P)] - A)) < 1e-12
