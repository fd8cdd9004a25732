"""Immutable expression tree nodes and printing."""
from __future__ import annotations

import math
from dataclasses import dataclass

BUILTIN_ARITY = {
    "exp": 1,
    "log": 1,
    "sqrt": 1,
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "sinh": 1,
    "cosh": 1,
    "tanh": 1,
    "sech": 1,
    "sn": 2,
    "cn": 2,
    "dn": 2,
}

# binding strength used by the printer
_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 5


class Expr:
    """Base class. Subclasses are frozen dataclasses, so trees are hashable
    and safe to share."""

    __slots__ = ()

    # convenience constructors; no simplification happens here
    def __add__(self, other):
        return Add((self, as_expr(other)))

    def __radd__(self, other):
        return Add((as_expr(other), self))

    def __sub__(self, other):
        return Sub(self, as_expr(other))

    def __rsub__(self, other):
        return Sub(as_expr(other), self)

    def __mul__(self, other):
        return Mul((self, as_expr(other)))

    def __rmul__(self, other):
        return Mul((as_expr(other), self))

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __pow__(self, other):
        return Pow(self, as_expr(other))

    def __rpow__(self, other):
        return Pow(as_expr(other), self)

    def __neg__(self):
        return Neg(self)

    def __str__(self):
        return to_string(self)

    @property
    def children(self) -> tuple["Expr", ...]:
        return ()


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v):
            raise ValueError(f"constants must be finite, got {self.value!r}")
        object.__setattr__(self, "value", v)



@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str



@dataclass(frozen=True, eq=True)
class Param(Expr):
    name: str



@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr


    @property
    def children(self):
        return (self.arg,)


@dataclass(frozen=True, eq=True)
class Add(Expr):
    args: tuple


    @property
    def children(self):
        return self.args


@dataclass(frozen=True, eq=True)
class Sub(Expr):
    left: Expr
    right: Expr


    @property
    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    args: tuple


    @property
    def children(self):
        return self.args


@dataclass(frozen=True, eq=True)
class Div(Expr):
    left: Expr
    right: Expr


    @property
    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exp: Expr


    @property
    def children(self):
        return (self.base, self.exp)


@dataclass(frozen=True, eq=True)
class Fn(Expr):
    name: str
    args: tuple

    def __post_init__(self):
        arity = BUILTIN_ARITY.get(self.name)
        if arity is None:
            raise ValueError(f"unknown function {self.name!r}")
        if len(self.args) != arity:
            raise ValueError(f"{self.name} takes {arity} argument(s), got {len(self.args)}")


    @property
    def children(self):
        return self.args


X = Var("x")
T = Var("t")
ZERO = Const(0.0)
ONE = Const(1.0)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float)):
        return Const(float(value))
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


def fn(name: str, *args) -> Fn:
    return Fn(name, tuple(as_expr(a) for a in args))


def is_const(e: Expr, value: float | None = None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


def free_symbols(e: Expr) -> set[str]:
    """Names of variables and parameters appearing in ``e``."""
    out: set[str] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, (Var, Param)):
            out.add(node.name)
        stack.extend(node.children)
    return out


def variables(e: Expr) -> set[str]:
    out: set[str] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add(node.name)
        stack.extend(node.children)
    return out


def count_nodes(e: Expr) -> int:
    return 1 + sum(count_nodes(c) for c in e.children)


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

def _fmt_number(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        s = str(int(v))
    else:
        s = repr(v)
    return f"({s})" if v < 0 else s


def _prec(e: Expr) -> int:
    if isinstance(e, (Add, Sub)):
        return _PREC_ADD
    if isinstance(e, (Mul, Div)):
        return _PREC_MUL
    if isinstance(e, Neg):
        return _PREC_NEG
    if isinstance(e, Pow):
        return _PREC_POW
    return _PREC_ATOM


def _wrap(e: Expr, min_prec: int) -> str:
    s = to_string(e)
    return f"({s})" if _prec(e) < min_prec else s


def to_string(e: Expr) -> str:
    """Render ``e`` in the grammar accepted by :func:`parse`."""
    if isinstance(e, Const):
        return _fmt_number(e.value)
    if isinstance(e, (Var, Param)):
        return e.name
    if isinstance(e, Neg):
        # unary minus binds tighter than ^, so anything but an atom needs parens
        return "-" + _wrap(e.arg, _PREC_ATOM)
    if isinstance(e, Add):
        return " + ".join(_wrap(a, _PREC_ADD) for a in e.args)
    if isinstance(e, Sub):
        return f"{_wrap(e.left, _PREC_ADD)} - {_wrap(e.right, _PREC_MUL)}"
    if isinstance(e, Mul):
        parts = [_wrap(e.args[0], _PREC_MUL)]
        parts += [_wrap(a, _PREC_NEG) for a in e.args[1:]]
        return "*".join(parts)
    if isinstance(e, Div):
        return f"{_wrap(e.left, _PREC_MUL)}/{_wrap(e.right, _PREC_NEG)}"
    if isinstance(e, Pow):
        return f"{_wrap(e.base, _PREC_ATOM)}^{_wrap(e.exp, _PREC_POW)}"
    if isinstance(e, Fn):
        return f"{e.name}({', '.join(to_string(a) for a in e.args)})"
    raise TypeError(f"not an Expr: {e!r}")
