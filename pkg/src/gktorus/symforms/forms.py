"""Exterior forms on the universal-cover chart R^3 x R^{4k} x [0, T].

Coordinates are labelled ``x1..x3``, ``y1..y{4k}`` and ``t`` and are always
ordered that way. Coefficients depend on ``t`` only, so the exterior
derivative of ``f(t) dx^I`` is ``f'(t) dt ^ dx^I`` and nothing else.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .. import linalg
from .expr import ONE, ZERO, Expr, ZeroTest, add, as_expr, mul, zero_test

Index = tuple[str, ...]


def label_rank(label: str) -> tuple[int, int]:
    if label == "t":
        return (2, 0)
    kind, num = label[0], label[1:]
    if kind not in "xy" or not num.isdigit():
        raise ValueError(f"bad coordinate label {label!r}")
    return (0 if kind == "x" else 1, int(num))


def chart_labels(fiber_dim: int = 0) -> list[str]:
    return ["x1", "x2", "x3"] + [f"y{i}" for i in range(1, fiber_dim + 1)] + ["t"]


def _sort_sign(idx: Sequence[str]) -> tuple[int, Index]:
    """Sign of the sorting permutation and the sorted index (0 if a label repeats)."""
    if len(set(idx)) != len(idx):
        return 0, ()
    ranks = [label_rank(x) for x in idx]
    inversions = sum(1 for i in range(len(ranks)) for j in range(i + 1, len(ranks)) if ranks[i] > ranks[j])
    return (-1 if inversions % 2 else 1), tuple(sorted(idx, key=label_rank))


class ChartForm:
    """A k-form ``sum_I f_I(t) dx^I`` with strictly increasing multi-indices."""

    __slots__ = ("degree", "_terms")

    def __init__(self, terms: Mapping[Sequence[str], object] | Iterable = (), degree: int | None = None):
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[Index, list[Expr]] = {}
        for idx, coeff in items:
            idx = (idx,) if isinstance(idx, str) else tuple(idx)
            if degree is None:
                degree = len(idx)
            elif len(idx) != degree:
                raise ValueError(f"term {idx} does not have degree {degree}")
            sign, key = _sort_sign(idx)
            if sign == 0:
                continue
            c = as_expr(coeff)
            merged.setdefault(key, []).append(c if sign > 0 else -c)
        clean = {}
        for key, parts in merged.items():
            c = parts[0] if len(parts) == 1 else add(*parts)
            if not c.is_zero():
                clean[key] = c
        self.degree = 0 if degree is None else degree
        self._terms = dict(sorted(clean.items(), key=lambda kv: [label_rank(x) for x in kv[0]]))

    # -- access --------------------------------------------------------------------

    @property
    def terms(self) -> dict[Index, Expr]:
        return dict(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __len__(self):
        return len(self._terms)

    def coeff(self, *labels: str) -> Expr:
        sign, key = _sort_sign(labels)
        c = self._terms.get(key, ZERO)
        return c if sign >= 0 else -c

    def labels(self) -> set[str]:
        return {x for idx in self._terms for x in idx}

    # -- algebra -------------------------------------------------------------------

    def _check_degree(self, other: "ChartForm"):
        if self._terms and other._terms and self.degree != other.degree:
            raise ValueError(f"cannot add forms of degree {self.degree} and {other.degree}")

    def __add__(self, other: "ChartForm") -> "ChartForm":
        self._check_degree(other)
        deg = self.degree if self._terms else other.degree
        return ChartForm(list(self._terms.items()) + list(other._terms.items()), degree=deg)

    def __neg__(self) -> "ChartForm":
        return ChartForm({k: -v for k, v in self._terms.items()}, degree=self.degree)

    def __sub__(self, other: "ChartForm") -> "ChartForm":
        return self + (-other)

    def scale(self, f) -> "ChartForm":
        f = as_expr(f)
        return ChartForm({k: mul(f, v) for k, v in self._terms.items()}, degree=self.degree)

    def __xor__(self, other: "ChartForm") -> "ChartForm":
        return wedge(self, other)

    def d(self) -> "ChartForm":
        return exterior_d(self)

    # -- evaluation ----------------------------------------------------------------

    def evaluate(self, t) -> dict[Index, np.ndarray]:
        return {k: np.asarray(v(t)) for k, v in self._terms.items()}

    def max_abs(self, t) -> float:
        vals = [np.max(np.abs(np.asarray(v(t), dtype=float))) for v in self._terms.values()]
        return float(max(vals, default=0.0))

    def is_zero(self, lo: float = 0.0, hi: float = 1.0, tol: float = 1e-12) -> ZeroTest:
        """Identically-zero test, reporting structural versus numerical zeros."""
        if not self._terms:
            return ZeroTest("structural", 0.0)
        worst = ZeroTest("structural", 0.0)
        for c in self._terms.values():
            z = zero_test(c, lo, hi, tol)
            if not z:
                return z
            if z.status == "numerical" and z.max_abs >= worst.max_abs:
                worst = z
        return worst

    def __repr__(self):
        if not self._terms:
            return f"ChartForm(0, degree={self.degree})"
        parts = [f"{c} d{'^d'.join(k) if k else '1'}" for k, c in self._terms.items()]
        return "ChartForm(" + " + ".join(parts) + ")"


def dx(*labels: str, coeff=ONE) -> ChartForm:
    return ChartForm({tuple(labels): coeff}, degree=len(labels))


def zero_form(degree: int) -> ChartForm:
    return ChartForm({}, degree=degree)


def function_form(f) -> ChartForm:
    return ChartForm({(): as_expr(f)}, degree=0)


def one_form(coeffs: Mapping[str, object]) -> ChartForm:
    return ChartForm({(k,): v for k, v in coeffs.items()}, degree=1)


def wedge(a: ChartForm, b: ChartForm) -> ChartForm:
    """Exterior product; signs come from sorting the concatenated multi-index."""
    out = []
    for ia, ca in a:
        sa = set(ia)
        for ib, cb in b:
            if sa.intersection(ib):
                continue
            out.append((ia + ib, mul(ca, cb)))
    return ChartForm(out, degree=a.degree + b.degree)


def wedge_all(forms: Iterable[ChartForm]) -> ChartForm:
    out = function_form(ONE)
    for f in forms:
        out = wedge(out, f)
    return out


def exterior_d(a: ChartForm) -> ChartForm:
    out = []
    for idx, c in a:
        if "t" in idx:
            continue
        dc = c.diff()
        if not dc.is_zero():
            out.append((("t",) + idx, dc))
    return ChartForm(out, degree=a.degree + 1)


def transform(a: ChartForm, rows: Mapping[str, Mapping[str, object]]) -> ChartForm:
    """Substitute ``dx^i -> sum_j rows[i][j] dx^j`` and re-canonicalize.

    Labels missing from ``rows`` are left unchanged. This is the pullback by a
    linear map whose matrix has row i equal to ``rows[i]``.
    """
    images: dict[str, ChartForm] = {}

    def image(lbl: str) -> ChartForm:
        if lbl not in images:
            if lbl in rows:
                images[lbl] = one_form({j: v for j, v in rows[lbl].items() if not as_expr(v).is_zero()})
            else:
                images[lbl] = dx(lbl)
        return images[lbl]

    out = zero_form(a.degree)
    for idx, c in a:
        term = function_form(c)
        for lbl in idx:
            term = wedge(term, image(lbl))
        out = out + term
    return out


def _matrix_rows(M, labels: Sequence[str]) -> dict[str, dict[str, object]]:
    n = len(labels)
    if len(M) != n or any(len(r) != n for r in M):
        raise ValueError(f"matrix is not {n}x{n} for labels {list(labels)}")
    return {li: {lj: M[i][j] for j, lj in enumerate(labels)} for i, li in enumerate(labels)}


def default_block(n: int) -> list[str]:
    if n == 3:
        return ["x1", "x2", "x3"]
    if n % 4 == 0:
        return [f"y{i}" for i in range(1, n + 1)]
    if n > 3 and (n - 3) % 4 == 0:
        return ["x1", "x2", "x3"] + [f"y{i}" for i in range(1, n - 2)]
    raise ValueError(f"no default coordinate block of size {n}")


def pullback_linear(a: ChartForm, M, labels: Sequence[str] | None = None) -> ChartForm:
    """Pull back by the linear map with matrix ``M`` on a spatial coordinate block.

    Row i of ``M`` gives the image of ``dx^i``: for ``psi(y) = M y`` the
    coordinate function ``y^i o psi`` is ``sum_j M[i][j] y^j``.
    """
    labels = list(labels) if labels is not None else default_block(len(M))
    if "t" in labels:
        raise ValueError("pullback_linear acts on spatial coordinates only")
    rows = _matrix_rows([[Fraction(x) if not isinstance(x, Expr) else x for x in r] for r in M], labels)
    return transform(a, rows)


class ChartVector:
    """A vector field ``sum_a X^a(t) d/dx^a``."""

    __slots__ = ("_comps",)

    def __init__(self, comps: Mapping[str, object]):
        self._comps = {k: as_expr(v) for k, v in sorted(comps.items(), key=lambda kv: label_rank(kv[0]))
                       if not as_expr(v).is_zero()}

    @property
    def comps(self) -> dict[str, Expr]:
        return dict(self._comps)

    def __getitem__(self, label: str) -> Expr:
        return self._comps.get(label, ZERO)

    def __add__(self, other: "ChartVector") -> "ChartVector":
        keys = set(self._comps) | set(other._comps)
        return ChartVector({k: add(self[k], other[k]) for k in keys})

    def __neg__(self):
        return ChartVector({k: -v for k, v in self._comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f) -> "ChartVector":
        f = as_expr(f)
        return ChartVector({k: mul(f, v) for k, v in self._comps.items()})

    def evaluate(self, t) -> dict[str, np.ndarray]:
        return {k: np.asarray(v(t)) for k, v in self._comps.items()}

    def __repr__(self):
        return "ChartVector(" + ", ".join(f"{k}: {v}" for k, v in self._comps.items()) + ")"


def coordinate_vector(label: str) -> ChartVector:
    return ChartVector({label: ONE})


def bracket(X: ChartVector, Y: ChartVector) -> ChartVector:
    """Lie bracket of fields whose components depend on ``t`` only."""
    keys = set(X.comps) | set(Y.comps)
    xt, yt = X["t"], Y["t"]
    return ChartVector({k: add(mul(xt, Y[k].diff()), -mul(yt, X[k].diff())) for k in keys})


def pair(a: ChartForm, *vectors: ChartVector) -> Expr:
    """Evaluate a k-form on k vector fields (determinant convention)."""
    if len(vectors) != a.degree:
        raise ValueError(f"{a.degree}-form needs {a.degree} vectors, got {len(vectors)}")
    total = []
    for idx, c in a:
        M = [[vec[lbl] for vec in vectors] for lbl in idx]
        total.append(mul(c, _expr_det(M)))
    return add(*total)


def _expr_det(M) -> Expr:
    n = len(M)
    if n == 0:
        return ONE
    if n == 1:
        return M[0][0]
    terms = []
    for j in range(n):
        if M[0][j].is_zero():
            continue
        sub = [row[:j] + row[j + 1:] for row in M[1:]]
        s = mul(M[0][j], _expr_det(sub))
        terms.append(s if j % 2 == 0 else -s)
    return add(*terms)


class BlockOperator:
    """An endomorphism given by a constant matrix in a moving frame.

    ``matrix[i][j]`` is the i-th frame component of the image of the j-th frame
    vector. ``frame`` and ``coframe`` must be dual to each other.
    """

    def __init__(self, matrix, frame: Sequence[ChartVector], coframe: Sequence[ChartForm], labels: Sequence[str]):
        self.matrix = linalg.frac_matrix(matrix)
        n = len(frame)
        if linalg.shape(self.matrix) != (n, n) or len(coframe) != n:
            raise ValueError("operator, frame and coframe sizes disagree")
        self.frame = list(frame)
        self.coframe = list(coframe)
        self.labels = list(labels)

    def inverse(self) -> "BlockOperator":
        if linalg.det(self.matrix) == 0:
            raise ZeroDivisionError("singular endomorphism")
        return BlockOperator(linalg.inverse(self.matrix), self.frame, self.coframe, self.labels)

    def coordinate_matrix(self) -> list[list[Expr]]:
        """Entry [i][j] is the ``d/dx^i`` component of the image of ``d/dx^j``."""
        n = len(self.frame)
        V = [[self.frame[b][li] for b in range(n)] for li in self.labels]
        C = [[self.coframe[a].coeff(lj) for lj in self.labels] for a in range(n)]
        VM = [[add(*(mul(V[i][a], self.matrix[a][b]) for a in range(n) if self.matrix[a][b]))
               for b in range(n)] for i in range(len(self.labels))]
        return [[add(*(mul(VM[i][b], C[b][j]) for b in range(n))) for j in range(len(self.labels))]
                for i in range(len(self.labels))]

    def apply_vector(self, X: ChartVector) -> ChartVector:
        out = ChartVector({})
        for b, eb in enumerate(self.coframe):
            xb = pair(eb, X)
            if xb.is_zero():
                continue
            for a in range(len(self.frame)):
                if self.matrix[a][b]:
                    out = out + self.frame[a].scale(mul(xb, self.matrix[a][b]))
        return out


def apply_endo(a: ChartForm, J: BlockOperator) -> ChartForm:
    """The form ``(X_1..X_k) -> a(J X_1, .., J X_k)`` in chart coordinates.

    On 1-forms this is ``(J alpha)(X) = alpha(J X)``, i.e. ``dx^i`` goes to
    row i of the coordinate matrix of J.
    """
    if linalg.det(J.matrix) == 0:
        raise ZeroDivisionError("singular endomorphism")
    M = J.coordinate_matrix()
    return transform(a, _matrix_rows(M, J.labels))


def d_c(a: ChartForm, J: BlockOperator) -> ChartForm:
    """Twisted differential ``J^{-1} d J`` applied to ``a``."""
    return apply_endo(exterior_d(apply_endo(a, J)), J.inverse())


class ComplexForm:
    """Complex form stored as a (real part, imaginary part) pair of chart forms."""

    __slots__ = ("re", "im")

    def __init__(self, re: ChartForm, im: ChartForm | None = None):
        self.re = re
        self.im = im if im is not None else zero_form(re.degree)

    @property
    def degree(self):
        return self.re.degree if len(self.re) else self.im.degree

    def __add__(self, other):
        return ComplexForm(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        return ComplexForm(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return ComplexForm(-self.re, -self.im)

    def scale(self, z) -> "ComplexForm":
        """Multiply by a complex constant (given as complex or a (re, im) pair)."""
        zr, zi = (z.real, z.imag) if isinstance(z, complex) else z
        zr, zi = as_expr(zr), as_expr(zi)
        return ComplexForm(self.re.scale(zr) - self.im.scale(zi), self.re.scale(zi) + self.im.scale(zr))

    def conj(self) -> "ComplexForm":
        return ComplexForm(self.re, -self.im)

    def d(self) -> "ComplexForm":
        return ComplexForm(exterior_d(self.re), exterior_d(self.im))

    def is_zero(self, lo=0.0, hi=1.0, tol=1e-12) -> ZeroTest:
        zr = self.re.is_zero(lo, hi, tol)
        zi = self.im.is_zero(lo, hi, tol)
        if not zr:
            return zr
        if not zi:
            return zi
        if zr.status == zi.status == "structural":
            return zr
        return ZeroTest("numerical", max(zr.max_abs, zi.max_abs))

    def max_abs(self, t) -> float:
        return max(self.re.max_abs(t), self.im.max_abs(t))


def cwedge(a: ComplexForm, b: ComplexForm) -> ComplexForm:
    return ComplexForm(wedge(a.re, b.re) - wedge(a.im, b.im), wedge(a.re, b.im) + wedge(a.im, b.re))
