"""Symbolic scalar calculus in ``t`` and exterior forms on the chart."""

from .expr import (
    ONE,
    T,
    ZERO,
    DomainError,
    Expr,
    ZeroTest,
    add,
    as_expr,
    chebyshev_points,
    const,
    cos,
    eval_with_derivative,
    exp,
    mul,
    parse_sexpr,
    power,
    rat,
    sin,
    to_sexpr,
    zero_test,
)
from .forms import (
    BlockOperator,
    ChartForm,
    ChartVector,
    ComplexForm,
    apply_endo,
    bracket,
    chart_labels,
    coordinate_vector,
    cwedge,
    d_c,
    dx,
    exterior_d,
    function_form,
    one_form,
    pair,
    pullback_linear,
    transform,
    wedge,
    wedge_all,
    zero_form,
)

__all__ = [name for name in dir() if not name.startswith("_")]
