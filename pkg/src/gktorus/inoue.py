"""Inoue-type data from integer matrices.

An ``SL(3, Z)`` matrix with one real eigenvalue ``alpha > 1`` and a complex
conjugate pair ``beta, conj(beta)`` is similar to the block matrix

    rho(t0) = diag(e^{t0}, e^{-t0/2} R(t0 p))

with ``t0 = ln alpha`` and ``t0 p = arg beta``. This module finds ``t0``,
``p`` and a conjugating matrix ``P`` with ``P A = rho(t0) P`` without calling
a general eigensolver: the real root is bracketed by bisection and polished by
Newton, and the complex pair comes from the deflated quadratic.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

ROOT_TOL = 1e-14


@dataclass(frozen=True)
class SpectrumClass:
    admissible: bool
    reason: str
    m: int | None = None
    n: int | None = None
    discriminant: int | None = None
    alpha: float | None = None
    beta: complex | None = None


@dataclass(frozen=True)
class AdmissibleMatrix:
    """Integer matrix with det 1, a real eigenvalue > 1 and a non-real pair."""

    A: tuple[tuple[int, ...], ...]
    m: int
    n: int
    alpha: float
    beta: complex

    @property
    def array(self) -> np.ndarray:
        return np.array(self.A, dtype=float)


@dataclass(frozen=True)
class InoueData:
    t0: float
    p: float
    P: np.ndarray = field(repr=False)
    A: AdmissibleMatrix
    residual: float
    condition: float

    def rho(self, t: float | None = None) -> np.ndarray:
        return rho_at(self.t0, self.p, t)

    def to_json(self) -> dict:
        from .report import fmt

        return {
            "matrix": [list(r) for r in self.A.A],
            "m": self.A.m,
            "n": self.A.n,
            "alpha": fmt(self.A.alpha),
            "beta": [fmt(self.A.beta.real), fmt(self.A.beta.imag)],
            "t0": fmt(self.t0),
            "p": fmt(self.p),
            "P": [[fmt(x) for x in row] for row in self.P],
            "residual": fmt(self.residual),
            "condition_number": fmt(self.condition),
        }


class NotAdmissible(ValueError):
    """Raised when Inoue data is requested for a matrix without the right spectrum."""


def _det3(A) -> int:
    return (A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1])
            - A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0])
            + A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]))


def char_coefficients(A) -> tuple[int, int]:
    """(m, n) with characteristic polynomial ``x^3 - m x^2 + n x - det``."""
    m = A[0][0] + A[1][1] + A[2][2]
    n = (A[0][0] * A[1][1] - A[0][1] * A[1][0]
         + A[0][0] * A[2][2] - A[0][2] * A[2][0]
         + A[1][1] * A[2][2] - A[1][2] * A[2][1])
    return m, n


def discriminant(m: int, n: int) -> int:
    """Discriminant of ``x^3 - m x^2 + n x - 1``."""
    return 18 * m * n - 4 * m ** 3 + m * m * n * n - 4 * n ** 3 - 27


def companion(m: int, n: int) -> tuple[tuple[int, ...], ...]:
    """Companion matrix of ``x^3 - m x^2 + n x - 1``."""
    return ((0, 0, 1), (1, 0, -n), (0, 1, m))


def _cubic(m, n, x):
    return ((x - m) * x + n) * x - 1


def real_root(m: int, n: int) -> float:
    """The unique real root of ``x^3 - m x^2 + n x - 1`` (negative discriminant).

    Bisection on a Cauchy bracket, then Newton polishing inside the bracket.
    """
    R = 1.0 + max(abs(m), abs(n), 1)
    lo, hi = -R, R
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _cubic(m, n, mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-9:
            break
    x = 0.5 * (lo + hi)
    for _ in range(50):
        fx = _cubic(m, n, x)
        dfx = (3 * x - 2 * m) * x + n
        if dfx == 0:
            break
        step = fx / dfx
        nx = x - step
        if not lo <= nx <= hi:
            break
        x = nx
        if abs(step) <= ROOT_TOL * max(1.0, abs(x)):
            break
    return x


def complex_pair(m: int, n: int, alpha: float) -> complex:
    """Root with positive imaginary part of the quadratic left after removing ``alpha``."""
    b = alpha - m
    c = 1.0 / alpha
    disc = 4 * c - b * b
    return complex(-b / 2, math.sqrt(max(disc, 0.0)) / 2)


def classify_spectrum(A) -> SpectrumClass:
    A = [[int(x) for x in row] for row in A]
    if len(A) != 3 or any(len(r) != 3 for r in A):
        return SpectrumClass(False, "matrix must be 3x3")
    d = _det3(A)
    if d != 1:
        return SpectrumClass(False, f"determinant is {d}, expected 1")
    m, n = char_coefficients(A)
    disc = discriminant(m, n)
    f1 = n - m  # value of the cubic at 1
    if disc == 0:
        df1 = 3 - 2 * m + n
        reason = "repeated eigenvalue 1" if f1 == 0 and df1 == 0 else "repeated eigenvalue"
        return SpectrumClass(False, reason, m, n, disc)
    if disc > 0:
        return SpectrumClass(False, "three real eigenvalues", m, n, disc)
    if f1 == 0:
        return SpectrumClass(False, "real eigenvalue equals 1 (spectrum on the unit circle)", m, n, disc)
    if f1 > 0:
        return SpectrumClass(False, "real eigenvalue below 1", m, n, disc)
    alpha = real_root(m, n)
    return SpectrumClass(True, "admissible", m, n, disc, alpha, complex_pair(m, n, alpha))


def admissible_matrix(A) -> AdmissibleMatrix:
    cls = classify_spectrum(A)
    if not cls.admissible:
        raise NotAdmissible(cls.reason)
    return AdmissibleMatrix(tuple(tuple(int(x) for x in r) for r in A), cls.m, cls.n, cls.alpha, cls.beta)


def rho_at(t0: float, p: float, t: float | None = None) -> np.ndarray:
    """The one-parameter group ``phi(t)``; ``t`` defaults to ``t0`` (giving ``rho(t0)``)."""
    if t is None:
        t = t0
    c, s = math.cos(t * p), math.sin(t * p)
    r = math.exp(-t / 2)
    return np.array([[math.exp(t), 0.0, 0.0], [0.0, r * c, r * s], [0.0, -r * s, r * c]])


def _left_null_vector(M: np.ndarray) -> np.ndarray:
    """Null vector of ``M^T`` for a rank-2 3x3 matrix, via row cross products."""
    rows = M.T
    best = None
    for i, j in ((0, 1), (0, 2), (1, 2)):
        v = np.cross(rows[i], rows[j])
        if best is None or np.linalg.norm(v) > np.linalg.norm(best):
            best = v
    first = next(x for x in best if abs(x) > 1e-12 * np.linalg.norm(best))
    return best / first


def parameters_from_matrix(A) -> InoueData:
    """``t0``, ``p`` and ``P`` with ``P A = rho(t0) P`` for an admissible matrix.

    ``p`` is taken on the principal branch ``t0 p = arg(beta)`` in (0, pi);
    ``p + 2 pi k / t0`` gives equally valid data.
    """
    adm = A if isinstance(A, AdmissibleMatrix) else admissible_matrix(A)
    M = adm.array
    alpha, beta = adm.alpha, adm.beta
    t0 = math.log(alpha)
    p = cmath.phase(beta) / t0
    u = _left_null_vector(M - alpha * np.eye(3))
    z = _left_null_vector(M.astype(complex) - np.conj(beta) * np.eye(3))
    P = np.array([u.real, z.real, z.imag])
    resid = float(np.max(np.abs(rho_at(t0, p) @ P - P @ M)))
    return InoueData(t0, p, P, adm, resid, float(np.linalg.cond(P)))


def lattice_residual(data: InoueData, vectors) -> float:
    """Max distance from ``P^{-1} rho P z`` to the nearest integer vector."""
    Z = np.asarray(vectors, dtype=float).T
    W = np.linalg.solve(data.P, data.rho() @ data.P @ Z)
    return float(np.max(np.abs(W - np.round(W))))


def enumerate_admissible(m_range: tuple[int, int], n_range: tuple[int, int]) -> list[AdmissibleMatrix]:
    """Admissible companion matrices for (m, n) in the inclusive ranges, ordered by (m, n)."""
    out = []
    for m in range(m_range[0], m_range[1] + 1):
        for n in range(n_range[0], n_range[1] + 1):
            C = companion(m, n)
            cls = classify_spectrum(C)
            if cls.admissible:
                out.append(AdmissibleMatrix(C, m, n, cls.alpha, cls.beta))
    return out
