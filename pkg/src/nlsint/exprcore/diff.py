"""Exact symbolic differentiation."""
from __future__ import annotations

from .nodes import Add, Const, Div, Expr, Fn, Mul, Neg, Param, Pow, Sub, Var, variables
from .simplify import simplify

MAX_ORDER = 4


class DiffError(ValueError):
    pass


def _depends(e: Expr, var: str, cache: dict) -> bool:
    key = id(e)
    if key not in cache:
        cache[key] = var in variables(e)
    return cache[key]


def _d(e: Expr, var: str, memo: dict, dep: dict) -> Expr:
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit[0]
    out = _rule(e, var, memo, dep)
    memo[key] = (out, e)
    return out


def _rule(e: Expr, var: str, memo: dict, dep: dict) -> Expr:
    d = lambda n: _d(n, var, memo, dep)  # noqa: E731
    if not _depends(e, var, dep):
        return Const(0.0)
    if isinstance(e, Var):
        return Const(1.0)
    if isinstance(e, Neg):
        return Neg(d(e.arg))
    if isinstance(e, Add):
        return Add(tuple(d(a) for a in e.args))
    if isinstance(e, Sub):
        return Sub(d(e.left), d(e.right))
    if isinstance(e, Mul):
        terms = []
        for i, a in enumerate(e.args):
            if not _depends(a, var, dep):
                continue
            terms.append(Mul(e.args[:i] + (d(a),) + e.args[i + 1 :]))
        return terms[0] if len(terms) == 1 else Add(tuple(terms))
    if isinstance(e, Div):
        num, den = e.left, e.right
        if not _depends(den, var, dep):
            return Div(d(num), den)
        return Sub(Div(d(num), den), Div(Mul((num, d(den))), Pow(den, Const(2.0))))
    if isinstance(e, Pow):
        base, ex = e.base, e.exp
        if not _depends(ex, var, dep):
            return Mul((ex, Pow(base, Sub(ex, Const(1.0))), d(base)))
        # general case b^e * (e' log b + e b'/b)
        inner = Mul((d(ex), Fn("log", (base,))))
        if _depends(base, var, dep):
            inner = Add((inner, Div(Mul((ex, d(base))), base)))
        return Mul((e, inner))
    if isinstance(e, Fn):
        return Mul((_outer(e, var, dep), d(e.args[0])))
    raise TypeError(f"not an Expr: {e!r}")


def _outer(e: Fn, var: str, dep: dict) -> Expr:
    """Derivative of the builtin with respect to its first argument."""
    u = e.args[0]
    name = e.name
    if name == "exp":
        return e
    if name == "log":
        return Div(Const(1.0), u)
    if name == "sqrt":
        return Div(Const(0.5), e)
    if name == "sin":
        return Fn("cos", (u,))
    if name == "cos":
        return Neg(Fn("sin", (u,)))
    if name == "tan":
        return Pow(Fn("cos", (u,)), Const(-2.0))
    if name == "sinh":
        return Fn("cosh", (u,))
    if name == "cosh":
        return Fn("sinh", (u,))
    if name == "tanh":
        return Pow(Fn("sech", (u,)), Const(2.0))
    if name == "sech":
        return Neg(Mul((e, Fn("tanh", (u,)))))
    m = e.args[1]
    if _depends(m, var, dep):
        raise DiffError(f"derivative of {name} with respect to its modulus is not supported")
    sn, cn, dn = (Fn(k, (u, m)) for k in ("sn", "cn", "dn"))
    if name == "sn":
        return Mul((cn, dn))
    if name == "cn":
        return Neg(Mul((sn, dn)))
    if name == "dn":
        return Neg(Mul((m, sn, cn)))
    raise DiffError(f"no derivative rule for {name}")


def diff(e: Expr, var: str = "x", order: int = 1) -> Expr:
    """``order``-th derivative of ``e`` with respect to variable ``var``."""
    if not 0 <= order <= MAX_ORDER:
        raise DiffError(f"derivative order must be between 0 and {MAX_ORDER}, got {order}")
    out = e
    for _ in range(order):
        out = simplify(_d(out, var, {}, {}))
    return out
