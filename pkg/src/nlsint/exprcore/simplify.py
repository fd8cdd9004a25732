"""Conservative simplification: constant folding, 0/1 identities, flattening
of sums and products, merging of repeated product factors and collection of
like terms. Collecting terms that cancel also drops any domain error they
would have raised."""
from __future__ import annotations

import numpy as np

from .evaluate import DomainError, evaluate
from .nodes import Add, Const, Div, Expr, Fn, Mul, Neg, Param, Pow, Sub, Var, is_const


def _fold(node: Expr) -> Expr:
    try:
        value = evaluate(node)
    except (DomainError, ArithmeticError):
        return node
    if not np.isfinite(value):
        return node
    return Const(value)


def _all_const(args) -> bool:
    return all(isinstance(a, Const) for a in args)


def _factor_kind(e: Expr) -> int:
    core = e.base if isinstance(e, Pow) and isinstance(e.exp, Const) else e
    if isinstance(core, Const):
        return 0
    if isinstance(core, Param):
        return 1
    if isinstance(core, Var):
        return 2
    return 3


def _split_power(e: Expr) -> tuple[Expr, float | None]:
    if isinstance(e, Pow) and isinstance(e.exp, Const):
        return e.base, e.exp.value
    return e, 1.0


def _mul(args: list[Expr]) -> Expr:
    coeff = 1.0
    rest: list[Expr] = []
    stack = list(reversed(args))
    while stack:
        a = stack.pop()
        if isinstance(a, Mul):
            stack.extend(reversed(a.args))
        elif isinstance(a, Neg):
            coeff = -coeff
            stack.append(a.arg)
        elif isinstance(a, Const):
            coeff *= a.value
        else:
            rest.append(a)
    if coeff == 0.0:
        return Const(0.0)
    # merge b * b^k -> b^(k+1) for structurally equal bases
    merged: list[list] = []
    for a in rest:
        base, k = _split_power(a)
        for slot in merged:
            if slot[0] == base:
                slot[1] += k
                break
        else:
            merged.append([base, k])
    factors: list[Expr] = []
    for base, k in merged:
        if k == 0.0:
            continue
        factors.append(base if k == 1.0 else Pow(base, Const(k)))
    factors.sort(key=_factor_kind)
    if not factors:
        return Const(coeff)
    body = factors[0] if len(factors) == 1 else Mul(tuple(factors))
    if coeff == 1.0:
        return body
    if coeff == -1.0:
        return Neg(body)
    if isinstance(body, Mul):
        return Mul((Const(coeff),) + body.args)
    return Mul((Const(coeff), body))


def _reciprocal_factors(den: Expr) -> list[Expr] | None:
    factors = list(den.args) if isinstance(den, Mul) else [den]
    out = []
    for f in factors:
        if isinstance(f, Const):
            if f.value == 0.0:
                return None
            out.append(Const(1.0 / f.value))
        else:
            base, k = _split_power(f)
            out.append(Pow(base, Const(-k)))
    return out


def _has_negative_power(e: Expr) -> bool:
    factors = e.args if isinstance(e, Mul) else (e.arg,) if isinstance(e, Neg) else (e,)
    return any(isinstance(f, Pow) and isinstance(f.exp, Const) and f.exp.value < 0 for f in factors)


def _cancel(num: Expr, den: Expr) -> Expr:
    """num/den as a product when every denominator factor cancels."""
    recip = _reciprocal_factors(den)
    if recip is None or _has_negative_power(num):
        return Div(num, den)
    out = _mul([num, *recip])
    return Div(num, den) if _has_negative_power(out) else out


def _split_coeff(e: Expr) -> tuple[float, Expr]:
    if isinstance(e, Neg):
        k, body = _split_coeff(e.arg)
        return -k, body
    if isinstance(e, Mul) and isinstance(e.args[0], Const):
        rest = e.args[1:]
        return e.args[0].value, rest[0] if len(rest) == 1 else Mul(rest)
    return 1.0, e


def _term_key(body: Expr):
    # products compare as factor multisets
    if isinstance(body, Mul):
        return tuple(sorted(repr(a) for a in body.args))
    return (repr(body),)


def _add(args: list[Expr]) -> Expr:
    flat: list[Expr] = []
    for a in args:
        flat.extend(a.args if isinstance(a, Add) else [a])
    const = 0.0
    terms: list[list] = []
    for a in flat:
        if isinstance(a, Const):
            const += a.value
            continue
        k, body = _split_coeff(a)
        key = _term_key(body)
        for slot in terms:
            if slot[1] == key:
                slot[0] += k
                break
        else:
            terms.append([k, key, a])
    rest = []
    for k, _, first in terms:
        if k == 0.0:
            continue
        k0, body = _split_coeff(first)
        rest.append(first if k == k0 else _mul([Const(k), body]))
    if const != 0.0:
        rest.append(Const(const))
    if not rest:
        return Const(0.0)
    if len(rest) == 1:
        return rest[0]
    return Add(tuple(rest))


def simplify(e: Expr) -> Expr:
    """Return a semantically equivalent, usually smaller, expression."""
    memo: dict[int, Expr] = {}
    keep: list[Expr] = []

    def go(node: Expr) -> Expr:
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        out = _simplify_node(node, go)
        memo[id(node)] = out
        keep.append(node)
        return out

    return go(e)


def _simplify_node(node: Expr, go) -> Expr:
    if isinstance(node, (Const, Var, Param)):
        return node
    if isinstance(node, Neg):
        a = go(node.arg)
        if isinstance(a, Const):
            return Const(-a.value)
        if isinstance(a, Neg):
            return a.arg
        if isinstance(a, Mul) and isinstance(a.args[0], Const):
            return _mul([Const(-a.args[0].value), *a.args[1:]])
        return Neg(a)
    if isinstance(node, Add):
        return _add([go(a) for a in node.args])
    if isinstance(node, Sub):
        left, right = go(node.left), go(node.right)
        if is_const(right, 0.0):
            return left
        if is_const(left, 0.0):
            return _simplify_node(Neg(right), lambda n: n)
        if isinstance(left, Const) and isinstance(right, Const):
            return Const(left.value - right.value)
        if isinstance(right, Const):
            return _add([left, Const(-right.value)])
        n_in = sum(len(a.args) if isinstance(a, Add) else 1 for a in (left, right))
        merged = _add([left, _simplify_node(Neg(right), lambda n: n)])
        if (len(merged.args) if isinstance(merged, Add) else 1) < n_in:
            return merged
        return Sub(left, right)
    if isinstance(node, Mul):
        return _mul([go(a) for a in node.args])
    if isinstance(node, Div):
        num, den = go(node.left), go(node.right)
        if is_const(den, 1.0):
            return num
        if is_const(num, 0.0) and not is_const(den, 0.0):
            return Const(0.0)
        if isinstance(num, Const) and isinstance(den, Const):
            return _fold(Div(num, den))
        if isinstance(den, Const) and den.value != 0.0:
            return _mul([Const(1.0 / den.value), num])
        return _cancel(num, den)
    if isinstance(node, Pow):
        base, ex = go(node.base), go(node.exp)
        if is_const(ex, 0.0):
            return Const(1.0)
        if is_const(ex, 1.0):
            return base
        if is_const(base, 1.0):
            return Const(1.0)
        if isinstance(base, Const) and isinstance(ex, Const):
            return _fold(Pow(base, ex))
        if isinstance(base, Pow) and isinstance(ex, Const) and ex.value.is_integer():
            # (b^k)^n = b^(k n) for integer n
            return _simplify_node(Pow(base.base, _mul([ex, base.exp])), lambda n: n)
        return Pow(base, ex)
    if isinstance(node, Fn):
        args = tuple(go(a) for a in node.args)
        out = Fn(node.name, args)
        if _all_const(args):
            return _fold(out)
        return out
    raise TypeError(f"not an Expr: {node!r}")
