"""Exact cohomology of mapping tori of tori, Hodge tables and Borel E2 pages.

Conventions. A linear map of a torus with integer matrix ``M`` (so that
``x -> M x``) pulls back ``dx^i`` to ``sum_j M[i][j] dx^j``. On coefficient
vectors of 1-forms this is the matrix ``M^T``; :class:`PullbackAction` stores
that matrix and takes exterior powers of it in the lexicographic basis of
multi-indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .gk import build_coframe, standard_frame
from .linalg import exterior_power, ker_coker, multi_indices
from .report import Check, fmt
from .symforms import ComplexForm, cwedge


def exterior_power_map(B, k: int):
    """Matrix of ``Lambda^k B`` on the lexicographic multi-index basis."""
    return exterior_power(B, k)


@dataclass(frozen=True)
class PullbackAction:
    """Action of a map on ``H^1`` of a torus (coefficient-vector matrix), with generator names."""

    B: tuple[tuple[Fraction, ...], ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        B = tuple(tuple(Fraction(x) for x in row) for row in self.B)
        object.__setattr__(self, "B", B)
        if any(len(r) != len(B) for r in B):
            raise ValueError("pullback matrix must be square")
        if not self.names:
            object.__setattr__(self, "names", tuple(f"z{i + 1}" for i in range(len(B))))
        elif len(self.names) != len(B):
            raise ValueError("one name per generator of H^1 is required")

    @classmethod
    def from_coordinate_map(cls, M, names: Sequence[str] = ()) -> "PullbackAction":
        """Action induced by ``x -> M x`` (rows of ``M`` are the pullbacks of ``dx^i``)."""
        return cls(tuple(map(tuple, linalg.transpose(linalg.frac_matrix(M)))), tuple(names))

    @property
    def n(self) -> int:
        return len(self.B)

    def power(self, k: int):
        return exterior_power(self.B, k)

    def actions(self) -> list:
        return [self.power(k) for k in range(self.n + 1)]

    def basis_labels(self, k: int) -> list[str]:
        if k == 0:
            return ["1"]
        return ["d" + "^d".join(self.names[i] for i in I) for I in multi_indices(self.n, k)]

    def product(self, other: "PullbackAction") -> "PullbackAction":
        """Action of the block map on the product torus."""
        return PullbackAction(tuple(map(tuple, linalg.block_diag(self.B, other.B))), self.names + other.names)


@dataclass(frozen=True)
class CohomologyTable:
    dims: tuple[int, ...]
    bases: tuple[tuple[str, ...], ...] | None = None

    @property
    def euler(self) -> int:
        return sum((-1) ** r * d for r, d in enumerate(self.dims))

    def poincare_symmetric(self) -> bool:
        return self.dims == self.dims[::-1]

    def to_json(self) -> dict:
        out = {"dims": list(self.dims), "euler": self.euler}
        if self.bases is not None:
            out["bases"] = [list(b) for b in self.bases]
        return out


def _combination(vec, labels: Sequence[str]) -> str:
    parts = []
    for x, lbl in zip(vec, labels):
        if not x:
            continue
        if x == 1:
            coeff = "+"
        elif x == -1:
            coeff = "-"
        else:
            coeff = f"{'+' if x > 0 else '-'}{abs(x)}*"
        parts.append(f"{coeff}{lbl}")
    s = "".join(parts)
    return s[1:] if s.startswith("+") else s


def _with_theta(label: str) -> str:
    return "theta" if label == "1" else f"theta^{label}"


def mapping_torus_cohomology(actions: Sequence | Mapping[int, object],
                             labels: Sequence[Sequence[str]] | None = None) -> CohomologyTable:
    """``H^r(M_f) = ker(f_r^* - Id) + coker(f_{r-1}^* - Id)`` for r = 0..n+1."""
    if isinstance(actions, Mapping):
        top = max(actions)
        missing = [r for r in range(top + 1) if r not in actions]
        if missing:
            raise ValueError(f"degree gap in actions: missing degrees {missing}")
        actions = [actions[r] for r in range(top + 1)]
    n = len(actions) - 1
    kers, cokers = [], []
    for r, M in enumerate(actions):
        M = linalg.frac_matrix(M)
        if linalg.shape(M)[0] != linalg.shape(M)[1]:
            raise ValueError(f"action in degree {r} is not square")
        kernel, cdim, reps = ker_coker(linalg.minus_identity(M))
        kers.append(kernel)
        cokers.append((cdim, reps))
    dims = []
    bases = [] if labels is not None else None
    for r in range(n + 2):
        k = len(kers[r]) if r <= n else 0
        c = cokers[r - 1][0] if r >= 1 else 0
        dims.append(k + c)
        if bases is not None:
            b = [_combination(v, labels[r]) for v in kers[r]] if r <= n else []
            if r >= 1:
                b += [_with_theta(labels[r - 1][i]) for i in cokers[r - 1][1]]
            bases.append(tuple(b))
    return CohomologyTable(tuple(dims), tuple(bases) if bases is not None else None)


def torus_mapping_cohomology(action: PullbackAction, with_labels: bool = True) -> CohomologyTable:
    labels = [action.basis_labels(k) for k in range(action.n + 1)] if with_labels else None
    return mapping_torus_cohomology(action.actions(), labels)


def tensor_fixed_spaces(rho: PullbackAction, psi: PullbackAction, r: int) -> dict[tuple[int, int], dict]:
    """Fixed-space dimensions of ``Lambda^i rho (x) Lambda^j psi`` for ``i + j = r``.

    The direct kernel of the tensor action is compared with the product of the
    factor kernels; the two agree unless eigenvalues of the factors multiply to 1.
    """
    out = {}
    for i in range(max(0, r - psi.n), min(r, rho.n) + 1):
        j = r - i
        Ri, Sj = rho.power(i), psi.power(j)
        direct = len(linalg.nullspace(linalg.minus_identity(linalg.kron(Ri, Sj))))
        fi = len(linalg.nullspace(linalg.minus_identity(Ri)))
        fj = len(linalg.nullspace(linalg.minus_identity(Sj)))
        out[(i, j)] = {"direct": direct, "factorized": fi * fj, "agree": direct == fi * fj}
    return out


def kunneth(P: CohomologyTable, Q: CohomologyTable) -> CohomologyTable:
    n = len(P.dims) + len(Q.dims) - 1
    dims = [0] * n
    for i, a in enumerate(P.dims):
        for j, b in enumerate(Q.dims):
            dims[i + j] += a * b
    return CohomologyTable(tuple(dims))


def point_table() -> CohomologyTable:
    return CohomologyTable((1,))


def b1_parity_report(rho: PullbackAction, psi: PullbackAction, diagnostic: bool = False) -> dict:
    """``b_1 = 1 + dim ker(rho_1^* - Id) + dim ker(psi_1^* - Id)`` and its consequences.

    Odd ``b_1`` rules out Kähler metrics and the dd^c-lemma. When the rho
    kernel vanishes and the psi kernel is even, oddness is asserted (a violation
    raises); ``diagnostic=True`` only reports.
    """
    kr = len(linalg.nullspace(linalg.minus_identity(rho.B)))
    kp = len(linalg.nullspace(linalg.minus_identity(psi.B)))
    b1 = 1 + kr + kp
    odd = b1 % 2 == 1
    expected_odd = kr == 0 and kp % 2 == 0
    if expected_odd and not odd and not diagnostic:
        raise AssertionError("b1 is even although both kernels predict odd b1")
    return {
        "b1": b1,
        "parity": "odd" if odd else "even",
        "dim_ker_rho1": kr,
        "dim_ker_psi1": kp,
        "oddness_asserted": expected_odd and not diagnostic,
        "no_kahler_flag": odd,
    }


# -- Hodge tables and Borel pages --------------------------------------------------


@dataclass(frozen=True)
class HodgeTable:
    n: int
    h: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.h) != self.n + 1 or any(len(r) != self.n + 1 for r in self.h):
            raise ValueError("Hodge table must be (n+1)x(n+1)")
        if any(x < 0 for r in self.h for x in r):
            raise ValueError("Hodge numbers must be non-negative")

    def __getitem__(self, pq: tuple[int, int]) -> int:
        p, q = pq
        if 0 <= p <= self.n and 0 <= q <= self.n:
            return self.h[p][q]
        return 0

    @property
    def total(self) -> int:
        return sum(map(sum, self.h))

    def betti_bound(self) -> tuple[int, ...]:
        out = [0] * (2 * self.n + 1)
        for p in range(self.n + 1):
            for q in range(self.n + 1):
                out[p + q] += self.h[p][q]
        return tuple(out)

    def to_json(self) -> dict:
        return {"n": self.n, "h": [list(r) for r in self.h]}


def hodge_from_dict(n: int, entries: Mapping[tuple[int, int], int]) -> HodgeTable:
    h = [[0] * (n + 1) for _ in range(n + 1)]
    for (p, q), v in entries.items():
        h[p][q] = v
    return HodgeTable(n, tuple(map(tuple, h)))


def inoue_hodge() -> HodgeTable:
    """Dolbeault numbers of an Inoue surface: h^{00} = h^{01} = h^{21} = h^{22} = 1."""
    return hodge_from_dict(2, {(0, 0): 1, (0, 1): 1, (2, 1): 1, (2, 2): 1})


def torus_hodge(n: int) -> HodgeTable:
    return HodgeTable(n, tuple(tuple(comb(n, p) * comb(n, q) for q in range(n + 1)) for p in range(n + 1)))


def point_hodge() -> HodgeTable:
    return HodgeTable(0, ((1,),))


def bigraded_kunneth(A: HodgeTable, B: HodgeTable) -> HodgeTable:
    n = A.n + B.n
    h = [[0] * (n + 1) for _ in range(n + 1)]
    for a in range(A.n + 1):
        for b in range(A.n + 1):
            if not A.h[a][b]:
                continue
            for c in range(B.n + 1):
                for d in range(B.n + 1):
                    h[a + c][b + d] += A.h[a][b] * B.h[c][d]
    return HodgeTable(n, tuple(map(tuple, h)))


@dataclass(frozen=True)
class BorelPage:
    """Nonzero dimensions of ``^{p,q}E_2^{u,v}`` keyed by ``(p, q, u, v)``; ``u`` is the base degree."""

    base_dim: int
    fiber_dim: int
    entries: dict = field(default_factory=dict)

    def __getitem__(self, key: tuple[int, int, int, int]) -> int:
        p, q, u, v = key
        if min(key) < 0:
            raise ValueError("negative indices are not allowed")
        if p + q != u + v:
            return 0
        return self.entries.get(key, 0)

    def to_json(self) -> list:
        return [{"p": p, "q": q, "u": u, "v": v, "dim": d} for (p, q, u, v), d in sorted(self.entries.items())]


def borel_e2(base: HodgeTable, fiber: HodgeTable) -> BorelPage:
    """``^{p,q}E_2^{u,v} = sum_k h_B^{k,u-k} h_F^{p-k,q-u+k}`` with ``v = p + q - u``."""
    n = base.n + fiber.n
    entries = {}
    for p in range(n + 1):
        for q in range(n + 1):
            for u in range(0, min(2 * base.n, p + q) + 1):
                v = p + q - u
                total = sum(base[k, u - k] * fiber[p - k, q - u + k] for k in range(0, u + 1))
                if total:
                    entries[(p, q, u, v)] = total
    return BorelPage(base.n, fiber.n, entries)


@dataclass(frozen=True)
class CollapsedTable:
    table: HodgeTable
    status: str
    justification: str = ""

    def to_json(self) -> dict:
        return {"table": self.table.to_json(), "status": self.status, "justification": self.justification}


def collapse(page: BorelPage, degenerate: bool = False, justification: str = "") -> CollapsedTable:
    """Sum the page over (u, v) for each (p, q).

    Without a degeneration flag the result is only an upper bound for the
    Dolbeault numbers; setting the flag requires a justification string.
    """
    if degenerate and not justification.strip():
        raise ValueError("degeneration at E2 needs a recorded justification")
    n = page.base_dim + page.fiber_dim
    h = [[0] * (n + 1) for _ in range(n + 1)]
    for (p, q, _u, _v), d in page.entries.items():
        h[p][q] += d
    status = "exact (degenerates at E2)" if degenerate else "upper bound; exact when d2 = 0"
    return CollapsedTable(HodgeTable(n, tuple(map(tuple, h))), status, justification if degenerate else "")


# -- invariant complex coframe of the Inoue surface --------------------------------


def verify_inoue_dolbeault_frame(t0: float, p: float, grid: int = 33, tol: float = 1e-9) -> dict:
    """Structure equations of the complex coframes ``phi^1_+- , phi^2`` on the Inoue surface.

    ``phi^1_+ = e^2 + i e^3``, ``phi^1_- = e^3 + i e^2``, ``phi^2 = e^1 + i theta``;
    checks ``d phi^1 = ((alpha - i beta)/2i)(phi^{12} - phi^{1 2bar})`` and
    ``d phi^2 = -i alpha phi^{2 2bar}`` with ``alpha = -1/2``, ``beta_+- = +-p``.
    """
    frame = standard_frame(t0, p)
    cf = build_coframe(frame, grid)
    e1, e2, e3 = cf.up
    theta = cf.theta
    ts = frame.grid(grid)
    alpha = Fraction(-1, 2)

    def residual(form: ComplexForm) -> float:
        worst = 0.0
        for part in (form.re, form.im):
            for _, c in part:
                worst = max(worst, float(np.max(np.abs(np.asarray(c(ts), dtype=float)))))
        return worst

    phi2 = ComplexForm(e1, theta)
    phi2_bar = phi2.conj()
    checks = []
    for sign, phi1 in ((1, ComplexForm(e2, e3)), (-1, ComplexForm(e3, e2))):
        beta = sign * p
        # (alpha - i beta) / (2i) = (-beta - i alpha) / 2
        coeff = (-beta / 2, -float(alpha) / 2)
        rhs = (cwedge(phi1, phi2) - cwedge(phi1, phi2_bar)).scale(coeff)
        label = "+" if sign > 0 else "-"
        checks.append(Check(f"dphi1{label}", f"d phi^1_{label} = ((alpha - i beta)/2i)(phi^12 - phi^1 2bar)",
                            residual(phi1.d() - rhs), tol))
        conj_res = residual(phi1.conj().d() - phi1.d().conj())
        checks.append(Check(f"conj{label}", f"d(conj phi^1_{label}) = conj(d phi^1_{label})", conj_res, tol))
    rhs2 = cwedge(phi2, phi2_bar).scale((0.0, -float(alpha)))
    checks.append(Check("dphi2", "d phi^2 = -i alpha phi^{2 2bar}", residual(phi2.d() - rhs2), tol))
    # alpha from d e^1 = 2 alpha theta ^ e^1, read off exactly from the coefficients
    ratio = (e1.d().coeff("x1", "t") / (theta ^ e1).coeff("x1", "t"))
    alpha_rec = Fraction(ratio.value) / 2 if ratio.is_const() else None
    checks.append(Check("alpha", "alpha recovered from d e^1 equals -1/2",
                        0.0 if alpha_rec == alpha else 1.0, 0.0, alpha_rec == alpha))
    return {"t0": fmt(t0), "p": fmt(p), "alpha": str(alpha_rec), "checks": checks,
            "pass": all(c.passed for c in checks)}
