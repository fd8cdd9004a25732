"""Build integrable coefficient sets from a seed nonlinearity g(x, t) and
free functions of time."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conditions import CoefficientSet, PreconditionError, _nonzero, _require_time_only, _v_free_terms
from .exprcore import ZERO, Const, Expr, GridSpec, RealField, X, as_expr, cumint_x, diff, parse, simplify
from .sampling import GridSampler


@dataclass
class FreeFunctions:
    """Arbitrary functions of time. ``c1`` fixes f g^2, ``c2`` enters gamma,
    ``c3``/``c4`` are the integration functions of v. ``k1i`` is carried for
    completeness but never enters the numeric path."""

    c1: Expr = field(default_factory=lambda: Const(1.0))
    c2: Expr = field(default_factory=lambda: Const(1.0))
    c3: Expr = ZERO
    c4: Expr = ZERO
    k1i: Expr = ZERO

    @classmethod
    def from_strings(cls, **kw) -> "FreeFunctions":
        return cls(**{k: as_expr(v) if not isinstance(v, str) else parse(v) for k, v in kw.items()})

    def to_json(self) -> dict:
        return {k: str(getattr(self, k)) for k in ("c1", "c2", "c3", "c4", "k1i")}


def build_f(g: Expr, c1: Expr) -> Expr:
    """f = c1 / g^2."""
    return simplify(as_expr(c1) * as_expr(g) ** Const(-2.0))


def build_gamma(g: Expr, c2: Expr) -> Expr:
    """gamma = g_t/g - c2'/(2 c2)."""
    g, c2 = as_expr(g), as_expr(c2)
    return simplify(diff(g, "t") / g - diff(c2, "t") / (Const(2.0) * c2))


@dataclass
class BuiltPotential:
    field: RealField
    v_x: RealField
    closed_form: str | None = None


def build_v(c: CoefficientSet, free: FreeFunctions, grid: GridSpec, recognize: bool = True) -> BuiltPotential:
    """Solve the v condition for v on each time slice.

    With S the v-free part, the condition reads ``2 f^3 g^5 d/dx(v_x/g) = -S``,
    so ``v_x = g (int -S/(2 f^3 g^5) dx + c4)`` and ``v = int v_x dx + c3``,
    both integrals starting at ``x_min``.
    """
    s = GridSampler(grid, c.params)
    F, G = s(c.f), s(c.g)
    _nonzero(F, "f", s)
    _nonzero(G, "g", s)
    S = sum(_v_free_terms(c, s))
    q = -S / (2.0 * F**3 * G**5)
    if not np.all(np.isfinite(q)):
        raise PreconditionError("v source term is not finite on the grid")
    u = cumint_x(RealField(grid, q)).values + s(as_expr(free.c4))
    v_x = G * u
    v = cumint_x(RealField(grid, v_x)).values + s(as_expr(free.c3))
    fld = RealField(grid, v)
    closed = recognize_monomials(fld) if recognize else None
    return BuiltPotential(fld, RealField(grid, v_x), closed)


def v2_timeonly(f: Expr, g: Expr, gamma: Expr) -> Expr:
    """x^2 coefficient of v for time-only f, g, gamma."""
    f, g, gm = as_expr(f), as_expr(g), as_expr(gamma)
    fd, fdd = diff(f, "t", 1), diff(f, "t", 2)
    gd, gdd = diff(g, "t", 1), diff(g, "t", 2)
    gmd = diff(gm, "t", 1)
    two = Const(2.0)
    num = (
        -(g**two) * fd**two
        + f * g * (g * fdd + fd * (two * g * gm - gd))
        + f**two * (two * gd**two - g * (gdd + Const(4.0) * gm * gd) + two * g**two * (gmd + two * gm**two))
    )
    return simplify(num / (Const(4.0) * f ** Const(3.0) * g**two))


def build_v_timeonly(f: Expr, g: Expr, gamma: Expr, free: FreeFunctions | None = None,
                     params: dict | None = None) -> Expr:
    """Closed-form quadratic potential ``v2(t) x^2 + c3 x + c4``."""
    free = free or FreeFunctions()
    for name, e in (("f", f), ("g", g), ("gamma", gamma)):
        _require_time_only(name, as_expr(e), params or {})
    return simplify(v2_timeonly(f, g, gamma) * X ** Const(2.0) + free.c3 * X + free.c4)


def recognize_monomials(fld: RealField, exponents=range(-8, 9), max_terms: int = 4, rtol: float = 1e-7) -> str | None:
    """Best-effort closed form: a few monomials ``a_k x^k`` with a_k constant
    in time. Returns None when no sparse fit reaches ``rtol``."""
    x = fld.grid.x
    if np.any(x <= 0) and any(k < 0 for k in exponents):
        exponents = [k for k in exponents if k >= 0]
    basis = np.stack([x ** float(k) for k in exponents], axis=1)
    scale = np.linalg.norm(basis, axis=0)
    B = basis / scale
    V = fld.values
    vnorm = max(np.max(np.abs(V)), 1e-300)
    chosen: list[int] = []
    resid = V.T.copy()
    coef = None
    for _ in range(max_terms):
        score = np.sum(np.abs(B.T @ resid), axis=1)
        score[chosen] = -1.0
        chosen.append(int(np.argmax(score)))
        sub = B[:, chosen]
        coef, *_ = np.linalg.lstsq(sub, V.T, rcond=None)
        resid = V.T - sub @ coef
        if np.max(np.abs(resid)) <= rtol * vnorm:
            break
    else:
        return None
    coef = coef / scale[chosen][:, None]
    terms = []
    for k_idx, row in zip(chosen, coef):
        a = float(np.mean(row))
        if np.max(np.abs(row - a)) > rtol * max(1.0, abs(a)):
            return None
        if abs(a) <= rtol * vnorm:
            continue
        k = list(exponents)[k_idx]
        mono = "1" if k == 0 else ("x" if k == 1 else f"x^({k})")
        terms.append((k, f"{a:.12g}*{mono}"))
    if not terms:
        return "0"
    terms.sort()
    return " + ".join(t for _, t in terms)
