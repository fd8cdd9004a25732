"""Vectorised numeric evaluation of expression trees."""
from __future__ import annotations

from collections.abc import Mapping

import numpy as np

from .. import _kernels
from .nodes import Add, Const, Div, Expr, Fn, Mul, Neg, Param, Pow, Sub, Var


class DomainError(ArithmeticError):
    """Evaluation left the domain of a builtin, or hit an unbound name.

    ``subexpr`` is the text of the offending node and ``location`` maps the
    variable names to the coordinates of the first bad sample (if known).
    """

    def __init__(self, message: str, subexpr: str = "", location: dict | None = None):
        self.subexpr = subexpr
        self.location = location or {}
        where = ""
        if self.location:
            where = " at " + ", ".join(f"{k}={v:.17g}" for k, v in self.location.items())
        detail = f" in '{subexpr}'" if subexpr else ""
        super().__init__(f"{message}{detail}{where}")


_UNARY = {
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
}


class _Evaluator:
    def __init__(self, env: Mapping[str, np.ndarray], params: Mapping[str, float]):
        self.env = env
        self.params = params
        self.memo: dict[int, np.ndarray] = {}
        self.jacobi: dict[tuple[int, int], tuple] = {}
        self.keep: list[Expr] = []  # pin nodes so memo ids stay valid

    def fail(self, message, node, bad=None):
        location = {}
        if bad is not None and np.ndim(bad) and bad.any():
            idx = np.unravel_index(np.argmax(bad), bad.shape)
            for name, arr in self.env.items():
                arr = np.broadcast_to(arr, bad.shape) if np.ndim(arr) else arr
                location[name] = float(arr[idx] if np.ndim(arr) else arr)
        elif bad is not None:
            location = {k: float(np.ravel(v)[0]) for k, v in self.env.items()}
        raise DomainError(message, str(node), location)

    def __call__(self, node: Expr):
        key = id(node)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        value = self._eval(node)
        self.memo[key] = value
        self.keep.append(node)
        return value

    def _eval(self, node: Expr):
        if isinstance(node, Const):
            return node.value
        if isinstance(node, Var):
            try:
                return self.env[node.name]
            except KeyError:
                self.fail(f"unbound variable {node.name!r}", node)
        if isinstance(node, Param):
            try:
                return float(self.params[node.name])
            except KeyError:
                self.fail(f"unbound parameter {node.name!r}", node)
        if isinstance(node, Neg):
            return -self(node.arg)
        if isinstance(node, Add):
            out = self(node.args[0])
            for a in node.args[1:]:
                out = out + self(a)
            return out
        if isinstance(node, Sub):
            return self(node.left) - self(node.right)
        if isinstance(node, Mul):
            out = self(node.args[0])
            for a in node.args[1:]:
                out = out * self(a)
            return out
        if isinstance(node, Div):
            num = self(node.left)
            den = self(node.right)
            zero = np.asarray(den) == 0
            if zero.any():
                self.fail("division by zero", node, zero)
            return num / den
        if isinstance(node, Pow):
            return self._pow(node)
        if isinstance(node, Fn):
            return self._fn(node)
        raise TypeError(f"not an Expr: {node!r}")

    def _pow(self, node: Pow):
        base = self(node.base)
        ex = self(node.exp)
        b = np.asarray(base)
        e = np.asarray(ex)
        integral = e == np.round(e)
        bad = (b < 0) & ~integral
        if bad.any():
            self.fail("negative base with non-integer exponent", node, bad)
        bad = (b == 0) & (e < 0)
        if bad.any():
            self.fail("division by zero", node, bad)
        out = np.power(np.asarray(base, dtype=float), ex)
        return self._finite(out, node)

    def _finite(self, out, node):
        bad = ~np.isfinite(out)
        if np.any(bad):
            self.fail("non-finite result (overflow)", node, bad)
        return out

    def _fn(self, node: Fn):
        name = node.name
        if name in ("sn", "cn", "dn"):
            key = (id(node.args[0]), id(node.args[1]))
            triple = self.jacobi.get(key)
            if triple is None:
                triple = _kernels.sncndn(self(node.args[0]), self(node.args[1]))
                self.jacobi[key] = triple
            out = triple[("sn", "cn", "dn").index(name)]
            return out if np.ndim(out) else float(out)
        arg = self(node.args[0])
        a = np.asarray(arg)
        if name == "log":
            bad = a <= 0
            if bad.any():
                self.fail("log of non-positive value", node, bad)
            return np.log(arg)
        if name == "sqrt":
            bad = a < 0
            if bad.any():
                self.fail("sqrt of negative value", node, bad)
            return np.sqrt(arg)
        if name == "sech":
            return self._finite(1.0 / np.cosh(arg), node)
        if name == "tan":
            bad = np.cos(a) == 0
            if bad.any():
                self.fail("tan at a pole", node, bad)
        return self._finite(_UNARY[name](arg), node)


def evaluate(e: Expr, env: Mapping[str, object] | None = None, params: Mapping[str, float] | None = None):
    """Evaluate ``e`` with variables taken from ``env`` (scalars or arrays,
    broadcast together). Returns a float for scalar inputs, else an array of
    the broadcast shape."""
    env = {k: (np.asarray(v, dtype=float) if np.ndim(v) else float(v)) for k, v in (env or {}).items()}
    with np.errstate(all="ignore"):
        ev = _Evaluator(env, params or {})
        out = ev(e)
        bad = ~np.isfinite(out)
        if np.any(bad):
            ev.fail("non-finite result (overflow)", e, bad if np.ndim(bad) else None)
    shape = np.broadcast_shapes(*(np.shape(v) for v in env.values())) if env else ()
    if shape:
        return np.broadcast_to(np.asarray(out, dtype=float), shape).copy()
    return float(out)


def eval_expr(e: Expr, x: float = 0.0, t: float = 0.0, params: Mapping[str, float] | None = None) -> float:
    """Scalar evaluation at a single (x, t)."""
    return float(evaluate(e, {"x": float(x), "t": float(t)}, params))


def evaluate_xt(e: Expr, x, t, params: Mapping[str, float] | None = None):
    return evaluate(e, {"x": x, "t": t}, params)
