"""Closed-form scalar functions of one real variable ``t``.

Expressions are immutable trees over rational/real constants, ``t``, sums,
products, integer powers and ``exp``/``cos``/``sin``. Constructors normalize
lightly (flattening, constant folding, like-term collection, exponential
merging, ``cos^2 + sin^2 -> 1``) so that identities which hold for structural
reasons cancel to a literal zero. Nothing here tries to be a general CAS.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import cached_property
from numbers import Number

import numpy as np

# products whose expansion would exceed this many terms are kept factored
EXPAND_LIMIT = 4096


class DomainError(ArithmeticError):
    """Raised when an expression is evaluated where a denominator vanishes."""


def _num(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, np.bool_)):
        return Fraction(int(x))
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        xf = float(x)
        if xf.is_integer():
            return Fraction(int(xf))
        return xf
    raise TypeError(f"unsupported constant {x!r}")


class Expr:
    """Base class. Subclasses define ``_key``, ``_eval`` and ``diff``."""

    # -- structure -----------------------------------------------------------------

    @cached_property
    def key(self):
        return self._key()

    @cached_property
    def sort_key(self) -> str:
        return repr(self.key)

    def __hash__(self):
        return hash(self.key)

    def __eq__(self, other):
        if not isinstance(other, Expr):
            if isinstance(other, Number):
                other = const(other)
            else:
                return NotImplemented
        return self.key == other.key

    def is_const(self) -> bool:
        return False

    def is_zero(self) -> bool:
        """Structural zero (after normalization)."""
        return False

    # -- arithmetic ----------------------------------------------------------------

    def __add__(self, other):
        return add(self, as_expr(other))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), -1))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, -1))

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)):
            raise TypeError("only integer powers are supported")
        return power(self, int(n))

    # -- evaluation ----------------------------------------------------------------

    def __call__(self, t):
        """Evaluate at a float or a numpy array of sample points."""
        arr = np.asarray(t, dtype=float)
        return self._evaluate(arr, {})

    def _evaluate(self, t, cache):
        k = id(self)
        if k not in cache:
            cache[k] = self._eval(t, cache)
        return cache[k]

    def diff(self) -> "Expr":
        raise NotImplementedError

    def __repr__(self):
        return f"Expr({to_sexpr(self)})"

    def __str__(self):
        return to_sexpr(self)


class Const(Expr):
    def __init__(self, value):
        self.value = _num(value)

    def _key(self):
        v = self.value
        return ("c", float(v) if isinstance(v, float) else v)

    def is_const(self):
        return True

    def is_zero(self):
        return self.value == 0

    def _eval(self, t, cache):
        return np.full(t.shape, float(self.value)) if t.shape else float(self.value)

    def diff(self):
        return ZERO


class Var(Expr):
    def _key(self):
        return ("t",)

    def _eval(self, t, cache):
        return t

    def diff(self):
        return ONE


class Add(Expr):
    def __init__(self, terms):
        self.terms = tuple(terms)

    def _key(self):
        return ("+",) + tuple(x.key for x in self.terms)

    def _eval(self, t, cache):
        out = self.terms[0]._evaluate(t, cache)
        for x in self.terms[1:]:
            out = out + x._evaluate(t, cache)
        return out

    def diff(self):
        return add(*(x.diff() for x in self.terms))


class Mul(Expr):
    def __init__(self, factors):
        self.factors = tuple(factors)

    def _key(self):
        return ("*",) + tuple(x.key for x in self.factors)

    def _eval(self, t, cache):
        out = self.factors[0]._evaluate(t, cache)
        for x in self.factors[1:]:
            out = out * x._evaluate(t, cache)
        return out

    def diff(self):
        terms = []
        for i, f in enumerate(self.factors):
            df = f.diff()
            if df.is_zero():
                continue
            terms.append(mul(*self.factors[:i], df, *self.factors[i + 1:]))
        return add(*terms)


class Pow(Expr):
    def __init__(self, base, n):
        self.base = base
        self.n = n

    def _key(self):
        return ("^", self.base.key, self.n)

    def _eval(self, t, cache):
        b = self.base._evaluate(t, cache)
        if self.n < 0 and np.any(np.asarray(b) == 0):
            where = np.asarray(t)[np.asarray(b) == 0] if np.ndim(b) else t
            raise DomainError(
                f"division by zero: {to_sexpr(self.base)} vanishes at t={np.ravel(where)[:3].tolist()}"
            )
        return 1.0 / b ** (-self.n) if self.n < 0 else b ** self.n

    def diff(self):
        return mul(const(self.n), power(self.base, self.n - 1), self.base.diff())


class _Fn(Expr):
    tag = ""
    fn = staticmethod(np.exp)

    def __init__(self, arg):
        self.arg = arg

    def _key(self):
        return (self.tag, self.arg.key)

    def _eval(self, t, cache):
        return self.fn(self.arg._evaluate(t, cache))


class Exp(_Fn):
    tag = "exp"
    fn = staticmethod(np.exp)

    def diff(self):
        return mul(self, self.arg.diff())


class Cos(_Fn):
    tag = "cos"
    fn = staticmethod(np.cos)

    def diff(self):
        return mul(const(-1), sin(self.arg), self.arg.diff())


class Sin(_Fn):
    tag = "sin"
    fn = staticmethod(np.sin)

    def diff(self):
        return mul(cos(self.arg), self.arg.diff())


# -- constructors --------------------------------------------------------------------


def const(x) -> Const:
    return Const(x)


ZERO = Const(0)
ONE = Const(1)
T = Var()


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return Const(x)


def rat(n, d=1) -> Const:
    return Const(Fraction(n, d))


def _split_coeff(e: Expr):
    """Return (numeric coefficient, remaining non-constant factor or None)."""
    if isinstance(e, Const):
        return e.value, None
    if isinstance(e, Mul) and isinstance(e.factors[0], Const):
        rest = e.factors[1:]
        return e.factors[0].value, (rest[0] if len(rest) == 1 else Mul(rest))
    return Fraction(1), e


def _factors(e: Expr) -> tuple:
    if e is None:
        return ()
    return e.factors if isinstance(e, Mul) else (e,)


def _pythagoras(coll: dict, order: list) -> None:
    """Merge c*X*cos(a)^2 + c*X*sin(a)^2 into c*X, in place."""
    changed = True
    while changed:
        changed = False
        for k in list(order):
            if k not in coll:
                continue
            c, rest = coll[k]
            fs = _factors(rest)
            for i, f in enumerate(fs):
                if isinstance(f, Pow) and f.n == 2 and isinstance(f.base, Cos):
                    partner = fs[:i] + (Pow(Sin(f.base.arg), 2),) + fs[i + 1:]
                    pk = mul(*partner).key if partner else None
                    if pk in coll and coll[pk][0] == c:
                        del coll[k]
                        del coll[pk]
                        order.remove(k)
                        order.remove(pk)
                        merged = mul(const(c), *(fs[:i] + fs[i + 1:]))
                        mc, mrest = _split_coeff(merged)
                        mk = mrest.key if mrest is not None else None
                        if mk in coll:
                            coll[mk] = (coll[mk][0] + mc, mrest)
                        else:
                            coll[mk] = (mc, mrest)
                            order.append(mk)
                        changed = True
                        break
            if changed:
                break


def add(*args) -> Expr:
    flat = []
    for a in args:
        a = as_expr(a)
        if isinstance(a, Add):
            flat.extend(a.terms)
        elif not a.is_zero():
            flat.append(a)
    coll: dict = {}
    order: list = []
    for a in flat:
        c, rest = _split_coeff(a)
        k = rest.key if rest is not None else None
        if k in coll:
            coll[k] = (coll[k][0] + c, rest)
        else:
            coll[k] = (c, rest)
            order.append(k)
    _pythagoras(coll, order)
    terms = []
    for k in order:
        c, rest = coll[k]
        if c == 0:
            continue
        if rest is None:
            terms.append(Const(c))
        elif c == 1:
            terms.append(rest)
        else:
            terms.append(Mul((Const(c),) + _factors(rest)))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    terms.sort(key=lambda e: e.sort_key)
    return Add(terms)


def neg(a: Expr) -> Expr:
    return mul(const(-1), a)


def mul(*args) -> Expr:
    coeff = Fraction(1)
    flat = []
    for a in args:
        a = as_expr(a)
        if isinstance(a, Mul):
            items = a.factors
        else:
            items = (a,)
        for f in items:
            if isinstance(f, Const):
                coeff = coeff * f.value
            else:
                flat.append(f)
    if coeff == 0:
        return ZERO
    # distribute over sums unless the expansion gets large
    sums = [f for f in flat if isinstance(f, Add)]
    if sums:
        size = 1
        for s in sums:
            size *= len(s.terms)
        if size <= EXPAND_LIMIT:
            others = [f for f in flat if not isinstance(f, Add)]
            partial = [mul(const(coeff), *others)]
            for s in sums:
                partial = [mul(p, term) for p in partial for term in s.terms]
            return add(*partial)
    # collect powers of identical bases and merge exponentials
    powers: dict = {}
    bases: dict = {}
    exp_arg = []
    for f in flat:
        if isinstance(f, Exp):
            exp_arg.append(f.arg)
            continue
        b, n = (f.base, f.n) if isinstance(f, Pow) else (f, 1)
        if isinstance(b, Exp):
            exp_arg.append(mul(const(n), b.arg))
            continue
        powers[b.key] = powers.get(b.key, 0) + n
        bases[b.key] = b
    factors = []
    for k, n in powers.items():
        if n == 0:
            continue
        factors.append(bases[k] if n == 1 else Pow(bases[k], n))
    if exp_arg:
        arg = add(*exp_arg)
        if isinstance(arg, Const):
            val = float(np.exp(float(arg.value)))
            if arg.value == 0:
                val = 1
            coeff = coeff * _num(val)
        else:
            factors.append(Exp(arg))
    if coeff == 0:
        return ZERO
    if not factors:
        return Const(coeff)
    factors.sort(key=lambda e: e.sort_key)
    if coeff == 1 and len(factors) == 1:
        return factors[0]
    if coeff != 1:
        factors.insert(0, Const(coeff))
    return Mul(factors)


def power(base: Expr, n: int) -> Expr:
    base = as_expr(base)
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and n < 0:
            raise DomainError("division by the zero constant")
        v = base.value
        return Const(v ** n if isinstance(v, Fraction) else float(v) ** n)
    if isinstance(base, Exp):
        return exp(mul(const(n), base.arg))
    if isinstance(base, Pow):
        return power(base.base, base.n * n)
    if isinstance(base, Mul):
        return mul(*(power(f, n) for f in base.factors))
    if isinstance(base, Add) and n > 0 and len(base.terms) ** n <= EXPAND_LIMIT:
        out = ONE
        for _ in range(n):
            out = mul(out, base)
        return out
    return Pow(base, n)


def exp(arg) -> Expr:
    arg = as_expr(arg)
    if isinstance(arg, Const):
        if arg.value == 0:
            return ONE
        return Const(float(np.exp(float(arg.value))))
    return Exp(arg)


def cos(arg) -> Expr:
    arg = as_expr(arg)
    if isinstance(arg, Const):
        return ONE if arg.value == 0 else Const(math.cos(float(arg.value)))
    return Cos(arg)


def sin(arg) -> Expr:
    arg = as_expr(arg)
    if isinstance(arg, Const):
        return ZERO if arg.value == 0 else Const(math.sin(float(arg.value)))
    return Sin(arg)


# -- evaluation helpers --------------------------------------------------------------


def eval_with_derivative(e: Expr, t: float) -> tuple[float, float]:
    """Value and exact-derivative value of ``e`` at ``t``."""
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    return float(e(t)), float(e.diff()(t))


def chebyshev_points(n: int = 64, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    k = np.arange(n)
    x = np.cos((2 * k + 1) * np.pi / (2 * n))
    return np.sort(lo + (hi - lo) * (x + 1) / 2)


class ZeroTest:
    """Outcome of an identically-zero test: ``structural``, ``numerical`` or ``nonzero``."""

    __slots__ = ("status", "max_abs")

    def __init__(self, status: str, max_abs: float):
        self.status = status
        self.max_abs = max_abs

    def __bool__(self):
        return self.status != "nonzero"

    def __repr__(self):
        return f"ZeroTest({self.status!r}, max_abs={self.max_abs:.3g})"


def zero_test(e: Expr, lo: float = 0.0, hi: float = 1.0, tol: float = 1e-12, n: int = 64) -> ZeroTest:
    """Decide whether ``e`` vanishes identically on [lo, hi]."""
    if e.is_zero():
        return ZeroTest("structural", 0.0)
    vals = np.abs(np.asarray(e(chebyshev_points(n, lo, hi)), dtype=float))
    m = float(np.max(vals))
    return ZeroTest("numerical" if m <= tol else "nonzero", m)


# -- s-expressions -------------------------------------------------------------------


def to_sexpr(e: Expr) -> str:
    if isinstance(e, Const):
        v = e.value
        if isinstance(v, Fraction):
            return str(v.numerator) if v.denominator == 1 else f"(rat {v.numerator} {v.denominator})"
        return f"(real {float(v)!r})"
    if isinstance(e, Var):
        return "t"
    if isinstance(e, Add):
        return "(add " + " ".join(to_sexpr(x) for x in e.terms) + ")"
    if isinstance(e, Mul):
        return "(mul " + " ".join(to_sexpr(x) for x in e.factors) + ")"
    if isinstance(e, Pow):
        return f"(pow {to_sexpr(e.base)} {e.n})"
    if isinstance(e, _Fn):
        return f"({e.tag} {to_sexpr(e.arg)})"
    raise TypeError(type(e))


def _tokenize(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def parse_sexpr(text: str, params: dict | None = None) -> Expr:
    """Parse the s-expression format produced by :func:`to_sexpr`.

    Bare symbols other than ``t`` are looked up in ``params``.
    """
    params = params or {}
    tokens = _tokenize(text)
    pos = 0

    def atom(tok):
        if tok == "t":
            return T
        if tok in params:
            return as_expr(params[tok])
        try:
            return Const(Fraction(tok))
        except ValueError:
            pass
        raise ValueError(f"unknown symbol {tok!r}")

    def read():
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of expression")
        tok = tokens[pos]
        pos += 1
        if tok == ")":
            raise ValueError("unexpected ')'")
        if tok != "(":
            return atom(tok)
        op = tokens[pos]
        pos += 1
        args = []
        while tokens[pos] != ")":
            if op in ("rat", "real") or (op == "pow" and len(args) == 1):
                args.append(tokens[pos])
                pos += 1
            else:
                args.append(read())
        pos += 1
        return build(op, args)

    def build(op, args):
        if op == "rat":
            return Const(Fraction(int(args[0]), int(args[1]) if len(args) > 1 else 1))
        if op == "real":
            return Const(float(args[0]))
        if op == "add":
            return add(*args)
        if op == "mul":
            return mul(*args)
        if op == "sub":
            return args[0] - add(*args[1:]) if len(args) > 1 else neg(args[0])
        if op == "neg":
            return neg(args[0])
        if op == "div":
            return args[0] / args[1]
        if op == "pow":
            return power(args[0], int(args[1]))
        if op in ("exp", "cos", "sin"):
            if len(args) != 1:
                raise ValueError(f"{op} takes one argument")
            return {"exp": exp, "cos": cos, "sin": sin}[op](args[0])
        raise ValueError(f"unknown operator {op!r}")

    out = read()
    if pos != len(tokens):
        raise ValueError("trailing tokens after expression")
    return out
