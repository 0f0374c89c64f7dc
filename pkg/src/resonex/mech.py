"""Mass-spring-damper models with closed-form spectra.

Two small systems with exactly known (and partly defective) spectra, a
periodic two-mass chain with its Bloch matrix, and the finite chain cut
from it. They serve as analytic oracles for the eigensolvers and for the
exceptional-point diagnostics.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import linalg

__all__ = [
    "TwoMassParams",
    "ChainParams",
    "JordanEntry",
    "JordanStructure",
    "ClusterSeparationError",
    "two_mass_T",
    "two_mass_B",
    "two_mass_exact",
    "two_mass_perturbed_exact",
    "two_mass_resultant",
    "characteristic_polynomial",
    "resultant",
    "ring_chain",
    "bloch_T",
    "bloch_band",
    "finite_chain",
    "jordan_structure",
    "hausdorff",
    "FIG5_PARAMS",
    "FIG5_BETA",
]


@dataclass(frozen=True)
class TwoMassParams:
    M: float = 1.0
    G: float = 1.0
    gamma: float = 2.0

    def __post_init__(self):
        if not (self.M > 0 and self.G > 0 and self.gamma > 0):
            raise ValueError(f"M, G, gamma must be positive, got {self}")

    @property
    def omega0(self) -> float:
        return math.sqrt(self.G / self.M)

    @classmethod
    def critical(cls, M: float = 1.0, G: float = 1.0) -> "TwoMassParams":
        """Damping ``gamma = 2 sqrt(G M)`` where both eigenvalues are defective."""
        return cls(M, G, 2.0 * math.sqrt(G * M))


@dataclass(frozen=True)
class ChainParams:
    m: float
    M: float
    g: float
    G: float
    mu: float
    gamma: float

    def __post_init__(self):
        for name in ("m", "M", "g", "G", "mu", "gamma"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


FIG5_PARAMS = ChainParams(
    m=1.0, M=2.0, g=1.0, G=2 * (81 + math.sqrt(5)) / 149, mu=4 * math.sqrt(5) / 9, gamma=8 / 3
)
FIG5_BETA = math.acos((2 * math.sqrt(5) - 4) / 9)


def two_mass_T(p: TwoMassParams) -> np.ndarray:
    """State matrix acting on ``(u1, u2, M u1', M u2')``."""
    M, G, g = p.M, p.G, p.gamma
    return np.array(
        [
            [0, 0, 1 / M, 0],
            [0, 0, 0, 1 / M],
            [-G, G, 0, 0],
            [G, -2 * G, 0, -g / M],
        ],
        dtype=complex,
    )


def two_mass_B(p: TwoMassParams) -> np.ndarray:
    """Rank-one perturbation with the single entry ``1/M`` in position (1, 4)."""
    B = np.zeros((4, 4), dtype=complex)
    B[0, 3] = 1 / p.M
    return B


def two_mass_exact(p: TwoMassParams) -> np.ndarray:
    """``[l1, l1, l2, l2]`` at critical damping, ``l = (-1 -+ i sqrt 3) omega0 / 2``."""
    _require_critical(p)
    w0 = p.omega0
    l1 = (-1 - 1j * math.sqrt(3)) / 2 * w0
    l2 = (-1 + 1j * math.sqrt(3)) / 2 * w0
    return np.array([l1, l1, l2, l2])


def _require_critical(p: TwoMassParams):
    if not math.isclose(p.gamma, 2 * math.sqrt(p.G * p.M), rel_tol=1e-12):
        raise ValueError("closed forms need gamma = 2 sqrt(G M)")


def two_mass_perturbed_exact(p: TwoMassParams, eps: complex) -> np.ndarray:
    """Eigenvalues ``[l1+, l1-, l2+, l2-]`` of ``T + eps B`` at critical damping.

    ``l1+-(eps) = omega0 (-1 +- sqrt(eps) - i sqrt(3 - eps +- 2 sqrt(eps))) / 2``
    and ``l2+-`` with ``+ i``. Principal square roots throughout; the outer
    root must not straddle its cut, so ``3 - eps +- 2 sqrt(eps)`` may not be
    a negative real.
    """
    _require_critical(p)
    w0 = p.omega0
    se = cmath.sqrt(complex(eps))
    out = []
    for sign_i in (-1, 1):
        for s in (1, -1):
            inner = 3 - eps + 2 * s * se
            if inner.imag == 0 and inner.real < 0:
                raise ValueError(f"eps = {eps} puts the nested root on its branch cut")
            out.append(w0 * (-1 + s * se + sign_i * 1j * cmath.sqrt(inner)) / 2)
    return np.array(out)


def two_mass_resultant(p: TwoMassParams) -> float:
    """Closed form ``Res(P_T, P_T') = (G^3/M^9)(gamma^2 - 4GM)^2 (25GM - 4 gamma^2)``."""
    M, G, g = p.M, p.G, p.gamma
    return G**3 / M**9 * (g**2 - 4 * G * M) ** 2 * (25 * G * M - 4 * g**2)


def characteristic_polynomial(A) -> np.ndarray:
    """Coefficients (highest degree first) of ``det(lambda I - A)``.

    Faddeev-LeVerrier recursion; uses only matrix products and traces, so it
    is independent of any eigenvalue computation.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    coeffs = [1.0 + 0j]
    Mk = np.zeros_like(A)
    eye = np.eye(n)
    for k in range(1, n + 1):
        Mk = A @ Mk + coeffs[-1] * eye
        coeffs.append(-np.trace(A @ Mk) / k)
    return np.array(coeffs)


def resultant(p, q) -> complex:
    """Resultant of two polynomials (highest degree first) via the Sylvester matrix."""
    p = np.trim_zeros(np.asarray(p, dtype=complex), "f")
    q = np.trim_zeros(np.asarray(q, dtype=complex), "f")
    m, n = len(p) - 1, len(q) - 1
    S = np.zeros((m + n, m + n), dtype=complex)
    for i in range(n):
        S[i, i:i + m + 1] = p
    for i in range(m):
        S[n + i, i:i + n + 1] = q
    return complex(np.linalg.det(S))


def ring_chain(p: TwoMassParams) -> tuple[np.ndarray, np.ndarray]:
    """Three masses on a ring with springs and dampers between each pair.

    Returns the 6x6 state matrix and its exact eigenvalues
    ``[0, 0, l2, l2, l3, l3]`` with ``l2,3 = (-3 gamma -+ i sqrt(12MG - 9 gamma^2)) / 2M``.
    """
    M, G, g = p.M, p.G, p.gamma
    L = np.array([[-2, 1, 1], [1, -2, 1], [1, 1, -2]], dtype=float)
    T = np.zeros((6, 6), dtype=complex)
    T[:3, 3:] = np.eye(3) / M
    T[3:, :3] = G * L
    T[3:, 3:] = g / M * L
    root = cmath.sqrt(12 * M * G - 9 * g**2)
    l2 = (-3 * g - 1j * root) / (2 * M)
    l3 = (-3 * g + 1j * root) / (2 * M)
    return T, np.array([0, 0, l2, l2, l3, l3], dtype=complex)


def bloch_T(beta: float, p: ChainParams) -> np.ndarray:
    """4x4 Bloch matrix acting on ``(u, U, omega u, omega U)`` at wavenumber ``beta``."""
    c = 1.0 - math.cos(beta)
    core = np.array(
        [
            [0, 0, 1, 0],
            [0, 0, 0, 1],
            [2 * p.g * c + p.mu, -p.mu, -1j * p.gamma, 0],
            [-p.mu, 2 * p.G * c + p.mu, 0, -1j * p.gamma],
        ],
        dtype=complex,
    )
    return np.diag([1, 1, 1 / p.m, 1 / p.M]) @ core


def bloch_band(p: ChainParams, betas) -> np.ndarray:
    """Eigenvalues of ``bloch_T`` for each ``beta``; shape ``(len(betas), 4)``."""
    return np.array([np.linalg.eigvals(bloch_T(b, p)) for b in np.asarray(betas, float)])


def finite_chain(J: int, p: ChainParams, eps: float = 0.0, theta: float = 0.0) -> np.ndarray:
    """``4J x 4J`` matrix of the open chain of ``J`` cells, optionally perturbed.

    The perturbation adds ``eps e^{i theta} I`` to the upper-right quarter.
    """
    if J < 2:
        raise ValueError("the chain needs at least two cells")
    n = 2 * J

    def tri(d, o):
        return np.diag(np.full(J, d)) + np.diag(np.full(J - 1, o), 1) + np.diag(np.full(J - 1, o), -1)

    K = np.zeros((n, n))
    K[:J, :J] = tri(2 * p.g + p.mu, -p.g)
    K[J:, J:] = tri(2 * p.G + p.mu, -p.G)
    K[:J, J:] = -p.mu * np.eye(J)
    K[J:, :J] = -p.mu * np.eye(J)
    minv = np.concatenate([np.full(J, 1 / p.m), np.full(J, 1 / p.M)])
    T = np.zeros((2 * n, 2 * n), dtype=complex)
    T[:n, n:] = np.eye(n)
    T[n:, :n] = minv[:, None] * K
    T[n:, n:] = -1j * p.gamma * np.diag(minv)
    if eps:
        T[:n, n:] += eps * cmath.exp(1j * theta) * np.eye(n)
    return T


class ClusterSeparationError(ValueError):
    """Eigenvalue clusters too close to tell apart at the requested tolerance."""


class JordanEntry(NamedTuple):
    eigenvalue: complex
    geometric: int
    algebraic: int
    consistent: bool = True


class JordanStructure(list):
    """List of :class:`JordanEntry`, one per distinct eigenvalue."""

    def find(self, value, tol: float = 1e-6) -> JordanEntry:
        for e in self:
            if abs(e.eigenvalue - value) <= tol * (1 + abs(value)):
                return e
        raise KeyError(value)

    @property
    def defective(self) -> list:
        return [e for e in self if e.geometric < e.algebraic]


def _rank(A, tol: float) -> int:
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def jordan_structure(A, cluster_tol: float = 1e-5, rank_tol: float = 1e-8) -> JordanStructure:
    """Geometric and algebraic multiplicity of every eigenvalue.

    Computed eigenvalues within ``cluster_tol * (1 + |lambda|)`` are merged
    (a defective eigenvalue of block size ``p`` splits by about
    ``eps^(1/p)``); the cluster size is the algebraic multiplicity and
    ``n - rank(A - lambda I)`` the geometric one, ranks counting singular
    values above ``rank_tol * sigma_1``. Each entry also records whether
    ``dim ker (A - lambda I)^a == a``.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if n > 500:
        raise ValueError("jordan_structure is limited to n <= 500")
    w = np.linalg.eigvals(A)
    groups = linalg.cluster_values(w, cluster_tol)
    centers = [w[g].mean() for g in groups]
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            gap = abs(centers[i] - centers[j])
            if gap < 10 * cluster_tol * (1 + max(abs(centers[i]), abs(centers[j]))):
                raise ClusterSeparationError(
                    f"clusters at {centers[i]:.6g} and {centers[j]:.6g} are only {gap:.2e} apart; "
                    "change cluster_tol"
                )
    out = JordanStructure()
    eye = np.eye(n)
    for g, lam in zip(groups, centers):
        a = len(g)
        S = A - lam * eye
        geo = n - _rank(S, rank_tol)
        Sa = np.linalg.matrix_power(S, a)
        consistent = (n - _rank(Sa, rank_tol)) == a
        out.append(JordanEntry(complex(lam), int(geo), a, consistent))
    out.sort(key=lambda e: (round(e.eigenvalue.real, 9), round(e.eigenvalue.imag, 9)))
    return out


def hausdorff(a, b) -> float:
    """Hausdorff distance between two finite point sets in the complex plane."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    D = np.abs(a[:, None] - b[None, :])
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))
