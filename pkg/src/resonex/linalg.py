"""Dense complex linear algebra kernels.

Thin, checked wrappers around LAPACK (through :mod:`scipy.linalg`): LU
factorization and solves with a singular-pivot guard, SVD, dense
eigendecomposition with residual verification, and extraction of
null vectors. Every operator in this package is dense, so nothing here
knows about sparse formats.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

__all__ = [
    "LinAlgFailure",
    "SingularMatrixError",
    "EigenConvergenceError",
    "SVDResult",
    "EigResult",
    "LUFactor",
    "lu_factor",
    "lu_solve",
    "svd",
    "eig",
    "null_vectors",
    "cluster_values",
    "spectral_norm",
]

_EPS = np.finfo(float).eps


class LinAlgFailure(ArithmeticError):
    """Base class for failures raised by this module."""


class SingularMatrixError(LinAlgFailure):
    """Raised when LU factorization meets a pivot that is zero to working precision."""

    def __init__(self, pivot_magnitude: float, index: int, scale: float):
        self.pivot_magnitude = float(pivot_magnitude)
        self.index = int(index)
        self.scale = float(scale)
        super().__init__(
            f"singular matrix: pivot {index} has magnitude {pivot_magnitude:.3e} "
            f"(matrix scale {scale:.3e})"
        )


class EigenConvergenceError(LinAlgFailure):
    """Raised when the dense eigensolver fails to converge or verify."""


class SVDResult(NamedTuple):
    U: np.ndarray
    s: np.ndarray
    Vh: np.ndarray

    @property
    def V(self) -> np.ndarray:
        return self.Vh.conj().T


class EigResult(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def _as_matrix(A, name="A") -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A.astype(complex, copy=False)


def _square(A, name="A") -> np.ndarray:
    A = _as_matrix(A, name)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    return A


class LUFactor:
    """LU factorization with partial pivoting, reusable for many right-hand sides."""

    def __init__(self, A, check: bool = True):
        A = _square(A)
        self.n = A.shape[0]
        self.lu, self.piv = scipy.linalg.lu_factor(A, check_finite=False)
        diag = np.abs(np.diag(self.lu))
        self.scale = float(np.max(np.abs(A))) if A.size else 0.0
        if check and self.n:
            i = int(np.argmin(diag))
            if diag[i] <= _EPS * max(self.scale, np.finfo(float).tiny):
                raise SingularMatrixError(diag[i], i, self.scale)

    def solve(self, B, trans: int = 0) -> np.ndarray:
        """Solve ``A X = B`` (trans=0), ``A^T X = B`` (1) or ``A^H X = B`` (2)."""
        B = np.asarray(B, dtype=complex)
        if B.shape[0] != self.n:
            raise ValueError(f"right-hand side has {B.shape[0]} rows, expected {self.n}")
        return scipy.linalg.lu_solve((self.lu, self.piv), B, trans=trans, check_finite=False)


def lu_factor(A, check: bool = True) -> LUFactor:
    return LUFactor(A, check=check)


def lu_solve(A, B) -> np.ndarray:
    """Solve ``A X = B`` by LU with partial pivoting.

    Raises
    ------
    SingularMatrixError
        If a pivot is zero to working precision.
    """
    return LUFactor(A).solve(B)


def svd(A) -> SVDResult:
    """Thin SVD with singular values in nonincreasing order."""
    A = _as_matrix(A)
    try:
        U, s, Vh = scipy.linalg.svd(A, full_matrices=False, check_finite=False)
    except np.linalg.LinAlgError:
        U, s, Vh = scipy.linalg.svd(
            A, full_matrices=False, check_finite=False, lapack_driver="gesvd"
        )
    return SVDResult(U, s, Vh)


def spectral_norm(A, iters: int = 30, seed: int = 0) -> float:
    """Largest singular value.

    Exact (via SVD) for small matrices, power iteration on ``A^H A``
    otherwise; the power estimate converges from below.
    """
    A = np.asarray(A)
    if min(A.shape) <= 400:
        return float(scipy.linalg.svdvals(A, check_finite=False)[0])
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(A.shape[1]) + 1j * rng.standard_normal(A.shape[1])
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(iters):
        y = A.conj().T @ (A @ x)
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return 0.0
        new = np.sqrt(nrm)
        x = y / nrm
        if abs(new - est) <= 1e-12 * new:
            est = new
            break
        est = new
    return float(est)


def eig(A, residual_tol: float = 1e-8) -> EigResult:
    """Eigenvalues and unit-norm right eigenvectors of a square matrix.

    Every pair is checked against ``||A v - lambda v|| <= residual_tol * ||A||``.
    Defective matrices have (nearly) parallel eigenvectors for a repeated
    eigenvalue; the residual check still holds for them.
    """
    A = _square(A)
    if A.shape[0] == 0:
        return EigResult(np.zeros(0, complex), np.zeros((0, 0), complex))
    try:
        w, V = scipy.linalg.eig(A, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(f"QR iteration failed to converge: {exc}") from exc
    V = V / np.linalg.norm(V, axis=0)
    scale = max(float(np.linalg.norm(A, 2)), np.finfo(float).tiny)
    res = np.linalg.norm(A @ V - V * w, axis=0)
    worst = int(np.argmax(res))
    if res[worst] > residual_tol * scale:
        raise EigenConvergenceError(
            f"eigenpair {worst} has residual {res[worst]:.3e} > {residual_tol:.1e}*||A||"
        )
    return EigResult(w, V)


def _smallest_right(A, count: int) -> tuple[np.ndarray, np.ndarray]:
    n = A.shape[0]
    if n <= 600:
        U, s, Vh = svd(A)
        order = np.argsort(s, kind="stable")[:count]
        return s[order], Vh[order].conj().T
    # inverse subspace iteration on A^H A, reusing one LU factorization
    lu = LUFactor(A, check=False)
    rng = np.random.default_rng(1234)
    X = rng.standard_normal((n, count)) + 1j * rng.standard_normal((n, count))
    X, _ = np.linalg.qr(X)
    prev = None
    for _ in range(50):
        Y = lu.solve(lu.solve(X, trans=2))
        X, _ = np.linalg.qr(Y)
        s = np.linalg.norm(A @ X, axis=0)
        if prev is not None and np.all(np.abs(s - prev) <= 1e-13 * np.abs(A).max() + 1e-6 * s):
            break
        prev = s
    # Rayleigh-Ritz inside the subspace sorts the vectors
    G = A @ X
    u, sv, vh = np.linalg.svd(G, full_matrices=False)
    X = X @ vh.conj().T
    order = np.argsort(sv, kind="stable")
    return sv[order], X[:, order]


def null_vectors(A, side: str = "right", count: int = 1, return_values: bool = False):
    """Approximate null vectors: singular vectors of the ``count`` smallest singular values.

    ``side="left"`` returns vectors ``w`` with small ``w^T A`` (transpose, not
    conjugate transpose), computed as the right null vectors of ``A^T``.
    Columns have unit Euclidean norm.
    """
    A = _square(A)
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if count < 1 or count > A.shape[0]:
        raise ValueError(f"count={count} outside 1..{A.shape[0]}")
    M = A.T if side == "left" else A
    s, X = _smallest_right(M, count)
    if return_values:
        return X, s
    return X


def cluster_values(values, tol: float = 1e-8) -> list[list[int]]:
    """Group indices of values lying within ``tol * (1 + |lambda|)`` of each other.

    Single-linkage: chains of close values form one cluster. Clusters and
    their members come out in order of first appearance.
    """
    values = np.asarray(values, dtype=complex)
    n = values.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= tol * (1.0 + max(abs(values[i]), abs(values[j]))):
                parent[find(j)] = find(i)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())
