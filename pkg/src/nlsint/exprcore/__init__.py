"""Symbolic expressions in x and t: parse, evaluate, differentiate, simplify,
plus uniform grids and cumulative quadrature."""
from .diff import DiffError, diff
from .evaluate import DomainError, eval_expr, evaluate, evaluate_xt
from .grid import ComplexField, GridError, GridSpec, RealField
from .nodes import (
    BUILTIN_ARITY,
    ONE,
    ZERO,
    Add,
    Const,
    Div,
    Expr,
    Fn,
    Mul,
    Neg,
    Param,
    Pow,
    Sub,
    T,
    Var,
    X,
    as_expr,
    fn,
    free_symbols,
    to_string,
    variables,
)
from .parser import ParseError, parse
from .quadrature import cumint_x, fd_t, fd_x
from .simplify import simplify

__all__ = [
    "BUILTIN_ARITY", "ONE", "ZERO", "Add", "ComplexField", "Const", "DiffError", "Div",
    "DomainError", "Expr", "Fn", "GridError", "GridSpec", "Mul", "Neg", "Param", "ParseError",
    "Pow", "RealField", "Sub", "T", "Var", "X", "as_expr", "cumint_x", "diff", "eval_expr",
    "evaluate", "evaluate_xt", "fd_t", "fd_x", "fn", "free_symbols", "parse", "simplify",
    "to_string", "variables",
]
