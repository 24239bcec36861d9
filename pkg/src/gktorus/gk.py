"""Generalized Kähler structures on mapping tori of T^3 x (flat torus).

The base directions carry a moving frame ``e_1, e_2, e_3`` built from three
functions ``a1, b2, b3`` of the time coordinate; the fiber is a flat torus with
constant complex structures; ``theta = dt`` closes the frame. Everything is
computed on the universal-cover chart and checked on a grid of times.

Frame order used by every block matrix here:
``e_1, e_2, e_3, d/dy^1, ..., d/dy^{4k}, d/dt``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg
from .inoue import InoueData
from .report import Check, exact_check, fmt
from .symforms import (
    ONE,
    BlockOperator,
    ChartForm,
    ChartVector,
    Expr,
    T,
    add,
    as_expr,
    bracket,
    chart_labels,
    coordinate_vector,
    cos,
    d_c,
    dx,
    exp,
    exterior_d,
    mul,
    one_form,
    pair,
    pullback_linear,
    rat,
    sin,
    to_sexpr,
    wedge,
    zero_form,
    zero_test,
)

GRID_TOL = 1e-9
EXACT_TOL = 1e-12
FD_TOL = 1e-5


class DegenerateFrame(ValueError):
    pass


class AssemblyError(ValueError):
    def __init__(self, failures: list[Check]):
        self.failures = failures
        lines = [f"{c.item}: {c.description} (residual {c.max_residual:.3g})" for c in failures]
        super().__init__("preconditions failed: " + "; ".join(lines))


def _grid_values(e: Expr, ts: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.asarray(e(ts), dtype=float), ts.shape).copy()


# -- frames ------------------------------------------------------------------------


@dataclass(frozen=True)
class FrameFamily:
    """Functions ``a1, b2, b3`` of the natural time ``t`` in ``[0, period]``."""

    a1: Expr
    b2: Expr
    b3: Expr
    period: float = 1.0

    def __post_init__(self):
        for name in ("a1", "b2", "b3"):
            object.__setattr__(self, name, as_expr(getattr(self, name)))
        if not self.period > 0:
            raise ValueError("period must be positive")

    @property
    def l(self) -> Expr:
        return self.b2 * self.b2 + self.b3 * self.b3

    @property
    def v(self) -> Expr:
        return self.b2 * self.b2.diff() + self.b3 * self.b3.diff()

    @property
    def w(self) -> Expr:
        return self.b2 * self.b3.diff() - self.b3 * self.b2.diff()

    @property
    def torsion_coefficient(self) -> Expr:
        """``(1/l)' / a1``; constancy of this function is needed for d^c_+ w_+ to be closed."""
        return (1 / self.l).diff() / self.a1

    def grid(self, n: int) -> np.ndarray:
        if n < 2:
            raise ValueError("grid size must be at least 2")
        return self.period * np.linspace(0.0, 1.0, n)

    def to_json(self) -> dict:
        return {"a1": to_sexpr(self.a1), "b2": to_sexpr(self.b2), "b3": to_sexpr(self.b3),
                "period": fmt(self.period)}


def standard_frame(t0: float, p: float, scale: float = 1.0, radius: float = 1.0,
                   phase: float = 0.0) -> FrameFamily:
    """``a1 = c e^t``, ``b2 = s e^{-t/2} cos(pt + phi)``, ``b3 = -s e^{-t/2} sin(pt + phi)`` on ``[0, t0]``.

    ``c = s = 1``, ``phi = 0`` is the standard choice; every choice glues with
    ``rho(t0)`` and has constant ``(1/l)'/a1 = 1/(c s^2)``.
    """
    half = exp(rat(-1, 2) * T)
    arg = p * T + phase if phase else p * T
    a1 = exp(T) if scale == 1 else scale * exp(T)
    r = half if radius == 1 else radius * half
    return FrameFamily(a1, r * cos(arg), -(r * sin(arg)), t0)


def inoue_frame(data: InoueData, scale: float = 1.0, radius: float = 1.0, phase: float = 0.0) -> FrameFamily:
    """The standard frame for the parameters of ``data``."""
    return standard_frame(data.t0, data.p, scale, radius, phase)


@dataclass(frozen=True)
class Coframe:
    up: tuple[ChartForm, ChartForm, ChartForm]
    down: tuple[ChartVector, ChartVector, ChartVector]
    F_plus: ChartForm
    F_minus: ChartForm
    theta: ChartForm

    def matrix(self, t: float) -> np.ndarray:
        """Coefficient matrix ``E(t)``: row i holds the dx-components of ``e^i``."""
        labels = ["x1", "x2", "x3"]
        return np.array([[float(e.coeff(lbl)(t)) for lbl in labels] for e in self.up])


def build_coframe(frame: FrameFamily, grid: int = 33) -> Coframe:
    ts = frame.grid(grid)
    a1v = _grid_values(frame.a1, ts)
    lv = _grid_values(frame.l, ts)
    if np.any(a1v == 0) or np.any(~np.isfinite(a1v)):
        raise DegenerateFrame("a1 vanishes on the grid")
    if np.any(lv <= 0) or np.any(~np.isfinite(lv)):
        raise DegenerateFrame("l = b2^2 + b3^2 is not positive on the grid")
    a1, b2, b3, l = frame.a1, frame.b2, frame.b3, frame.l
    inv_l = 1 / l
    e1 = one_form({"x1": 1 / a1})
    e2 = one_form({"x2": b2 * inv_l, "x3": b3 * inv_l})
    e3 = one_form({"x2": -b3 * inv_l, "x3": b2 * inv_l})
    v1 = ChartVector({"x1": a1})
    v2 = ChartVector({"x2": b2, "x3": b3})
    v3 = ChartVector({"x2": -b3, "x3": b2})
    F = wedge(e2, e3)
    cf = Coframe((e1, e2, e3), (v1, v2, v3), F, -F, dx("t"))
    resid = duality_residual(cf.up, cf.down, ts)
    if resid > EXACT_TOL:
        raise DegenerateFrame(f"coframe is not dual to the frame (residual {resid:.3g})")
    return cf


def duality_residual(up, down, ts) -> float:
    worst = 0.0
    for i, e in enumerate(up):
        for j, X in enumerate(down):
            val = _grid_values(pair(e, X), ts) - (1.0 if i == j else 0.0)
            worst = max(worst, float(np.max(np.abs(val))))
    return worst


def check_frame_conditions(frame: FrameFamily, data: InoueData | None = None, grid: int = 33,
                           tol: float = GRID_TOL) -> list[Check]:
    """Glue, boundary and constancy conditions for a frame (a list of checks)."""
    checks = []
    T0 = frame.period
    cf = build_coframe(frame, grid)
    if data is not None:
        E0, E1 = cf.matrix(0.0), cf.matrix(T0)
        resid = float(np.max(np.abs(E1 @ data.rho() - E0)))
        checks.append(Check("glue", "E(t0) rho(t0) = E(0) for the coframe matrix", resid, tol))
    vl = frame.v / frame.l
    wl = frame.w / frame.l
    checks.append(Check("boundary_v", "v/l agrees at both ends of the interval",
                        abs(float(vl(T0)) - float(vl(0.0))), tol))
    checks.append(Check("boundary_w", "w/l agrees at both ends of the interval",
                        abs(float(wl(T0)) - float(wl(0.0))), tol))
    q = frame.torsion_coefficient
    ts = frame.grid(grid)
    qv = _grid_values(q, ts)
    spread = float(np.max(np.abs(qv - qv[0])))
    dq = zero_test(q.diff(), 0.0, T0, tol)
    checks.append(Check("constancy", f"(1/l)'/a1 is constant (value {fmt(qv[0])}, {dq.status or 'not zero'} derivative)",
                        max(spread, dq.max_abs), tol))
    return checks


def torsion_value(frame: FrameFamily) -> float:
    return float(frame.torsion_coefficient(0.0))


# -- fibers ------------------------------------------------------------------------


def _images_to_matrix(images: dict[int, tuple[int, int]], n: int) -> list[list[Fraction]]:
    """Matrix whose column j is ``sign * e_i`` for ``images[j] = (i, sign)``."""
    M = linalg.zeros(n, n)
    for j, (i, s) in images.items():
        M[i][j] = Fraction(s)
    return M


# Standard flat hyperkaehler structure on R^4 (0-based coordinates).
_J1 = {0: (1, 1), 1: (0, -1), 2: (3, -1), 3: (2, 1)}
_J2 = {0: (3, -1), 1: (2, 1), 2: (1, -1), 3: (0, 1)}


@dataclass(frozen=True)
class FlatFiber:
    """Flat torus ``T^{4k}`` with constant complex structures."""

    k: int = 1
    mode: str = "kahler"

    def __post_init__(self):
        if self.mode not in ("kahler", "hyperkahler"):
            raise ValueError(f"unknown fiber mode {self.mode!r}")
        if self.k < 0:
            raise ValueError("k must be non-negative")

    @property
    def dim(self) -> int:
        return 4 * self.k

    @property
    def labels(self) -> list[str]:
        return [f"y{i}" for i in range(1, self.dim + 1)]

    def J(self, i: int) -> list[list[Fraction]]:
        if self.k == 0:
            return []
        if i == 1:
            block = _images_to_matrix(_J1, 4)
        elif i == 2:
            block = _images_to_matrix(_J2, 4)
        elif i == 3:
            block = linalg.matmul(_images_to_matrix(_J1, 4), _images_to_matrix(_J2, 4))
        else:
            raise ValueError("complex structures are J1, J2, J3")
        return linalg.block_diag(*([block] * self.k))

    def omega(self, i: int) -> ChartForm:
        """``omega_i(X, Y) = k(J_i X, Y)``: the coefficient of dy^{ab} is ``J_i[b][a]``."""
        J = self.J(i)
        labels = self.labels
        terms = {(labels[a], labels[b]): J[b][a] for a in range(self.dim) for b in range(a + 1, self.dim) if J[b][a]}
        return ChartForm(terms, degree=2)

    def structures(self) -> list[int]:
        return [1] if self.mode == "kahler" else [1, 2, 3]

    def check(self) -> list[Check]:
        checks = []
        n = self.dim
        minus_id = linalg.scale(-1, linalg.identity(n))
        for i in (1, 2, 3):
            checks.append(exact_check(f"J{i}^2", f"J{i}^2 = -Id on the fiber", linalg.matmul(self.J(i), self.J(i)) == minus_id))
        J1, J2, J3 = self.J(1), self.J(2), self.J(3)
        checks.append(exact_check("quaternion", "J1 J2 = J3 = -J2 J1",
                                  linalg.matmul(J1, J2) == J3 and linalg.matmul(J2, J1) == linalg.scale(-1, J3)))
        return checks


@dataclass(frozen=True)
class FiberMap:
    """An integer matrix ``psi`` acting on fiber coordinates (row i gives ``psi^* dy^i``)."""

    matrix: tuple[tuple[int, ...], ...]

    @classmethod
    def identity(cls, n: int) -> "FiberMap":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def of(cls, M) -> "FiberMap":
        return cls(tuple(tuple(int(x) for x in row) for row in M))

    def check(self, fiber: FlatFiber) -> list[Check]:
        n = fiber.dim
        M = [list(r) for r in self.matrix]
        checks = []
        if (linalg.shape(M) if M else (0, 0)) != (n, n):
            return [exact_check("psi_shape", f"psi must be {n}x{n}", False)]
        if n == 0:
            return checks
        d = linalg.det(M)
        checks.append(exact_check("psi_unimodular", f"det psi = +-1 (got {d})", abs(d) == 1))
        for i in fiber.structures():
            om = fiber.omega(i)
            diff = pullback_linear(om, M, fiber.labels) - om
            checks.append(exact_check(f"psi_omega{i}", f"psi^* omega{i} = omega{i}", len(diff) == 0))
            J = fiber.J(i)
            checks.append(exact_check(f"psi_J{i}", f"psi J{i} = J{i} psi",
                                      linalg.matmul(M, J) == linalg.matmul(J, M)))
        return checks


# -- structures --------------------------------------------------------------------


def frame_operator(fiber_block, sign: int, fiber_dim: int) -> list[list[Fraction]]:
    """Block matrix of I_+ (sign=+1) or I_- (sign=-1) in the standard frame order."""
    n = 4 + fiber_dim
    M = linalg.zeros(n, n)
    tt = n - 1
    M[tt][0] = Fraction(1)     # e_1 -> d/dt
    M[0][tt] = Fraction(-1)    # d/dt -> -e_1
    M[2][1] = Fraction(sign)   # e_2 -> +-e_3
    M[1][2] = Fraction(-sign)  # e_3 -> -+e_2
    for i in range(fiber_dim):
        for j in range(fiber_dim):
            M[3 + i][3 + j] = Fraction(fiber_block[i][j])
    return M


def form_from_matrix(Om, coframe: list[ChartForm]) -> ChartForm:
    """``sum_{a<b} Om[a][b] eps^a ^ eps^b`` for an antisymmetric matrix in the coframe."""
    out = zero_form(2)
    n = len(coframe)
    for a in range(n):
        for b in range(a + 1, n):
            if Om[a][b]:
                out = out + wedge(coframe[a], coframe[b]).scale(Om[a][b])
    return out


@dataclass
class GKStructure:
    frame: FrameFamily
    fiber: FlatFiber
    psi: FiberMap
    coframe: Coframe
    I_plus: list
    I_minus: list
    omega_plus: ChartForm
    omega_minus: ChartForm
    H: ChartForm
    preconditions: list[Check] = field(default_factory=list)

    @property
    def labels(self) -> list[str]:
        return chart_labels(self.fiber.dim)

    @property
    def frame_vectors(self) -> list[ChartVector]:
        return list(self.coframe.down) + [coordinate_vector(y) for y in self.fiber.labels] + [coordinate_vector("t")]

    @property
    def coframe_forms(self) -> list[ChartForm]:
        return list(self.coframe.up) + [dx(y) for y in self.fiber.labels] + [dx("t")]

    @property
    def metric(self) -> list[list[Fraction]]:
        """The metric is the identity matrix in the frame."""
        return linalg.identity(len(self.I_plus))

    def operator(self, sign: int) -> BlockOperator:
        M = self.I_plus if sign > 0 else self.I_minus
        return BlockOperator(M, self.frame_vectors, self.coframe_forms, self.labels)

    @property
    def split(self) -> bool:
        return classify_split(self).kind == "split"

    def to_json(self) -> dict:
        return {
            "frame": self.frame.to_json(),
            "fiber": {"k": self.fiber.k, "mode": self.fiber.mode},
            "psi": [list(r) for r in self.psi.matrix],
            "I_plus": [[int(x) for x in r] for r in self.I_plus],
            "I_minus": [[int(x) for x in r] for r in self.I_minus],
            "H": {"^".join(k): to_sexpr(v) for k, v in self.H},
        }


def assemble_gk(frame: FrameFamily, fiber: FlatFiber, psi: FiberMap | None = None,
                data: InoueData | None = None, grid: int = 33, tol: float = GRID_TOL) -> GKStructure:
    """Build I_+, I_-, omega_+, omega_- and H = d^c_+ omega_+ after checking the inputs.

    Raises :class:`AssemblyError` listing every failed precondition.
    """
    if psi is None:
        psi = FiberMap.identity(fiber.dim)
    checks = check_frame_conditions(frame, data, grid, tol)
    checks += fiber.check()
    checks += psi.check(fiber)
    failures = [c for c in checks if not c.passed]
    if failures:
        raise AssemblyError(failures)
    cf = build_coframe(frame, grid)
    n = fiber.dim
    J_plus = fiber.J(1)
    J_minus = fiber.J(1) if fiber.mode == "kahler" else fiber.J(2)
    Ip = frame_operator(J_plus, 1, n)
    Im = frame_operator(J_minus, -1, n)
    s = GKStructure(frame, fiber, psi, cf, Ip, Im, zero_form(2), zero_form(2), zero_form(3), checks)
    coframe = s.coframe_forms
    # omega(X, Y) = g(I X, Y); with g the identity in the frame, omega has matrix I^T.
    s.omega_plus = form_from_matrix(linalg.transpose(Ip), coframe)
    s.omega_minus = form_from_matrix(linalg.transpose(Im), coframe)
    s.H = d_c(s.omega_plus, s.operator(1))
    return s


# -- verification ------------------------------------------------------------------


def _frame_arrays(s: GKStructure, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Numeric frame ``V[t, label, a]`` and coframe ``C[t, a, label]`` on the grid."""
    labels = s.labels
    vecs, forms = s.frame_vectors, s.coframe_forms
    V = np.zeros((len(ts), len(labels), len(vecs)))
    C = np.zeros((len(ts), len(vecs), len(labels)))
    for a, X in enumerate(vecs):
        for i, lbl in enumerate(labels):
            if not X[lbl].is_zero():
                V[:, i, a] = _grid_values(X[lbl], ts)
    for a, e in enumerate(forms):
        for i, lbl in enumerate(labels):
            c = e.coeff(lbl)
            if not c.is_zero():
                C[:, a, i] = _grid_values(c, ts)
    return V, C


def _two_form_arrays(a: ChartForm, labels: list[str], ts: np.ndarray) -> np.ndarray:
    pos = {lbl: i for i, lbl in enumerate(labels)}
    W = np.zeros((len(ts), len(labels), len(labels)))
    for (u, v), c in a:
        vals = _grid_values(c, ts)
        W[:, pos[u], pos[v]] = vals
        W[:, pos[v], pos[u]] = -vals
    return W


def _form_residual(a: ChartForm, ts: np.ndarray) -> float:
    return max((float(np.max(np.abs(_grid_values(c, ts)))) for _, c in a), default=0.0)


def structure_functions(s: GKStructure) -> np.ndarray:
    """Symbolic ``c[k][a][b] = e^k([E_a, E_b])`` as a nested list of expressions."""
    vecs, forms = s.frame_vectors, s.coframe_forms
    n = len(vecs)
    zero = as_expr(0)
    c = [[[zero] * n for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            br = bracket(vecs[a], vecs[b])
            if not br.comps:
                continue
            for k, e in enumerate(forms):
                val = pair(e, br)
                c[k][a][b] = val
                c[k][b][a] = -val
    return c


def _structure_arrays(c, ts: np.ndarray) -> np.ndarray:
    n = len(c)
    out = np.zeros((len(ts), n, n, n))
    for k in range(n):
        for a in range(n):
            for b in range(n):
                if not c[k][a][b].is_zero():
                    out[:, k, a, b] = _grid_values(c[k][a][b], ts)
    return out


def nijenhuis(I: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Frame components ``N[t, k, a, b]`` of the Nijenhuis tensor of a frame-constant ``I``.

    ``N(X, Y) = [IX, IY] - I[IX, Y] - I[X, IY] - [X, Y]`` with ``c[t, k, a, b]``
    the structure functions of the frame.
    """
    t1 = np.einsum("ca,db,tkcd->tkab", I, I, c)
    t2 = np.einsum("km,ca,tmcb->tkab", I, I, c)
    t3 = np.einsum("km,db,tmad->tkab", I, I, c)
    return t1 - t2 - t3 - c


def _fd_structure(s: GKStructure, ts: np.ndarray, h: float) -> np.ndarray:
    """Structure functions from central finite differences of the frame components."""
    labels = s.labels
    tpos = labels.index("t")
    V, C = _frame_arrays(s, ts)
    Vp, _ = _frame_arrays(s, ts + h)
    Vm, _ = _frame_arrays(s, ts - h)
    dV = (Vp - Vm) / (2 * h)
    # [X, Y]^i = X^t dY^i/dt - Y^t dX^i/dt for fields depending on t only
    br = np.einsum("ta,tib->tiab", V[:, tpos, :], dV) - np.einsum("tb,tia->tiab", V[:, tpos, :], dV)
    return np.einsum("tki,tiab->tkab", C, br)


def bracket_table_checks(s: GKStructure, ts: np.ndarray, tol: float) -> list[Check]:
    """``[d/dt, e_2] = (v/l) e_2 + (w/l) e_3`` and ``[d/dt, e_3] = -(w/l) e_2 + (v/l) e_3``."""
    f = s.frame
    vl, wl = f.v / f.l, f.w / f.l
    e2, e3 = s.coframe.down[1], s.coframe.down[2]
    dt = coordinate_vector("t")
    r2 = bracket(dt, e2) - (e2.scale(vl) + e3.scale(wl))
    r3 = bracket(dt, e3) - (e2.scale(-wl) + e3.scale(vl))
    spatial = [bracket(X, Y) for i, X in enumerate(s.coframe.down) for Y in s.coframe.down[i + 1:]]
    worst = 0.0
    for r in [r2, r3] + spatial:
        for comp in r.comps.values():
            worst = max(worst, float(np.max(np.abs(_grid_values(comp, ts)))))
    return [Check("bracket_table", "[d/dt, e2], [d/dt, e3] match (v/l, w/l); spatial brackets vanish", worst, tol)]


def verify_gk(s: GKStructure, grid_size: int = 33, tol: float = GRID_TOL, fd_check: bool = True) -> list[Check]:
    """Certificate items (a)-(f) plus the bracket table and torsion diagnostics."""
    ts = s.frame.grid(grid_size)
    labels = s.labels
    V, C = _frame_arrays(s, ts)
    n = len(s.I_plus)
    G = np.einsum("tai,taj->tij", C, C)
    checks = []
    res_sq, res_metric, res_nij = 0.0, 0.0, 0.0
    c_sym = structure_functions(s)
    c = _structure_arrays(c_sym, ts)
    for sign, M, om in ((1, s.I_plus, s.omega_plus), (-1, s.I_minus, s.omega_minus)):
        I = np.array(M, dtype=float)
        Ic = np.einsum("tia,ab,tbj->tij", V, I, C)
        res_sq = max(res_sq, float(np.max(np.abs(Ic @ Ic + np.eye(len(labels))))))
        W = _two_form_arrays(om, labels, ts)
        r_g = np.max(np.abs(np.transpose(Ic, (0, 2, 1)) @ G @ Ic - G))
        r_w = np.max(np.abs(W @ Ic - G))
        res_metric = max(res_metric, float(r_g), float(r_w))
        res_nij = max(res_nij, float(np.max(np.abs(nijenhuis(I, c)))))
    checks.append(Check("a", "I_+^2 = I_-^2 = -Id", res_sq, tol))
    checks.append(Check("b", "g(IX, IY) = g(X, Y) and omega(X, IY) = g(X, Y) for both structures", res_metric, tol))
    checks.append(Check("c", "Nijenhuis tensors of I_+ and I_- vanish on all frame pairs", res_nij, tol))
    checks += bracket_table_checks(s, ts, tol)
    if fd_check:
        h = 1e-5 * s.frame.period
        fd = _fd_structure(s, ts, h)
        checks.append(Check("c_fd", "structure functions agree with central finite differences",
                            float(np.max(np.abs(fd - c))), FD_TOL))
    Hm = d_c(s.omega_minus, s.operator(-1))
    checks.append(Check("d", "d^c_+ omega_+ + d^c_- omega_- = 0", _form_residual(s.H + Hm, ts), tol))
    checks.append(Check("e", "dH = 0", _form_residual(exterior_d(s.H), ts), tol))
    f = s.frame
    expected = dx("x1", "x2", "x3", coeff=-f.torsion_coefficient)
    checks.append(Check("f", "H = -(1/l)'(1/a1) dx^123", _form_residual(s.H - expected, ts), tol))
    e1, e2, e3 = s.coframe.up
    closed = wedge(wedge(e1, e2), e3).scale(2 * f.v / f.l)
    checks.append(Check("f_frame", "H = (2v/l) e^123", _form_residual(s.H - closed, ts), tol))
    return checks


def torsion_report(s: GKStructure, tol: float = EXACT_TOL) -> dict:
    """Whether H is cohomologically nontrivial: its fiber integral is ``2v/l`` times the volume."""
    f = s.frame
    z = zero_test(2 * f.v / f.l, 0.0, f.period, tol)
    ts = f.grid(33)
    vals = _grid_values(2 * f.v / f.l, ts)
    return {
        "torsion_free": bool(z),
        "flag": "torsion-free (Kahler)" if z else "torsion class nonzero",
        "fiber_integral_sample": fmt(float(vals[np.argmax(np.abs(vals))])),
    }


@dataclass(frozen=True)
class SplitClass:
    kind: str
    sigma: list | None = None
    sigma_is_minus_omega3_inverse: bool | None = None


def classify_split(s: GKStructure) -> SplitClass:
    """Split iff [I_+, I_-] = 0; otherwise return sigma = 1/2 [I_+, I_-] g^{-1}.

    sigma is a bivector, so its matrix maps covectors to vectors. On the fiber it
    is compared with ``-omega_3^{-1}``, where ``omega^{-1}`` inverts the map
    ``X -> iota_X omega`` (matrix ``Omega^T`` for ``Omega[a][b] = omega(d_a, d_b)``).
    """
    A, B = s.I_plus, s.I_minus
    comm = linalg.matsub(linalg.matmul(A, B), linalg.matmul(B, A))
    if all(x == 0 for row in comm for x in row):
        return SplitClass("split")
    g_inv = linalg.inverse(s.metric)
    sigma = linalg.scale(Fraction(1, 2), linalg.matmul(comm, g_inv))
    match = None
    if s.fiber.dim:
        n = s.fiber.dim
        labels = s.fiber.labels
        om3 = s.fiber.omega(3)
        Om = [[om3.coeff(labels[a], labels[b]) if a != b else 0 for b in range(n)] for a in range(n)]
        Om = [[Fraction(x.value) if hasattr(x, "value") else Fraction(x) for x in row] for row in Om]
        target = linalg.scale(-1, linalg.inverse(linalg.transpose(Om)))
        block = [row[3:3 + n] for row in sigma[3:3 + n]]
        outside = all(sigma[i][j] == 0 for i in range(len(sigma)) for j in range(len(sigma))
                      if not (3 <= i < 3 + n and 3 <= j < 3 + n))
        match = block == target and outside
    return SplitClass("non_split", sigma, match)
