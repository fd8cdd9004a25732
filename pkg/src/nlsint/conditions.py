"""Integrability-condition residuals of the nonautonomous NLS equation

    f Psi_xx + h Psi_x + g |Psi|^2 Psi + v Psi + i gamma Psi + i Psi_t = 0

evaluated pointwise on a space-time grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exprcore import (
    ZERO,
    Const,
    Expr,
    GridError,
    GridSpec,
    RealField,
    as_expr,
    cumint_x,
    diff,
    evaluate,
    parse,
    simplify,
)
from .report import DEFAULT_TOL, ResidualReport
from .sampling import GridSampler, depends_on


class PreconditionError(ValueError):
    pass


@dataclass
class CoefficientSet:
    """Coefficients f, g, gamma, v and optional drift h.

    Each is an :class:`Expr` in x and t; ``v`` and ``h`` may also be sampled
    grids (:class:`RealField`). Missing ``h`` means no drift term.
    """

    f: Expr
    g: Expr
    gamma: Expr = ZERO
    v: Expr | RealField = ZERO
    h: Expr | RealField | None = None
    params: dict = field(default_factory=dict)

    @classmethod
    def from_strings(cls, f, g, gamma="0", v="0", h=None, params=None):
        conv = lambda s: s if isinstance(s, (Expr, RealField)) else parse(str(s))  # noqa: E731
        return cls(conv(f), conv(g), conv(gamma), conv(v), None if h is None else conv(h), dict(params or {}))

    def replace(self, **changes) -> "CoefficientSet":
        data = {k: getattr(self, k) for k in ("f", "g", "gamma", "v", "h", "params")}
        data.update(changes)
        return CoefficientSet(**data)


def _nonzero(values, what, sampler):
    bad = values == 0
    if np.any(bad):
        i = np.unravel_index(int(np.argmax(bad)), bad.shape)
        raise PreconditionError(
            f"{what} vanishes at x={sampler.X[i]:.17g}, t={sampler.T[i]:.17g}"
        )


# ---------------------------------------------------------------------------
# drift weight H = exp(int 2h/f dx)
# ---------------------------------------------------------------------------

@dataclass
class DriftWeight:
    """H and the derivatives needed by the higher-dimensional condition."""

    H: np.ndarray
    H_x: np.ndarray
    H_xx: np.ndarray
    H_xxx: np.ndarray
    H_t_over_H: np.ndarray


def _drift_weight(c: CoefficientSet, s: GridSampler) -> DriftWeight:
    grid = s.grid
    if c.h is None:
        one = np.ones(grid.shape)
        zero = np.zeros(grid.shape)
        return DriftWeight(one, zero, zero, zero, zero)
    f = s(c.f)
    _nonzero(f, "f", s)
    if isinstance(c.h, RealField) or isinstance(c.f, RealField):
        w = 2.0 * s(c.h) / f
        logH = cumint_x(RealField(grid, w)).values
        H = _safe_exp(logH, s)
        w_x = s(RealField(grid, w), "x", 1)
        w_xx = s(RealField(grid, w), "x", 2)
        H_t_over_H = s(RealField(grid, logH), "t", 1) if grid.n_t >= 6 else np.zeros(grid.shape)
    else:
        w_expr = simplify(Const(2.0) * c.h / c.f)
        w = s(w_expr)
        logH = cumint_x(RealField(grid, w)).values
        H = _safe_exp(logH, s)
        w_x = s(w_expr, "x", 1)
        w_xx = s(w_expr, "x", 2)
        H_t_over_H = cumint_x(RealField(grid, s(w_expr, "t", 1))).values
    H_x = H * w
    H_xx = H * (w_x + w**2)
    H_xxx = H * (w_xx + 3.0 * w * w_x + w**3)
    return DriftWeight(H, H_x, H_xx, H_xxx, H_t_over_H)


def _safe_exp(logH, s: GridSampler):
    bad = logH > 700.0
    if np.any(bad):
        i = np.unravel_index(int(np.argmax(bad)), bad.shape)
        raise OverflowError(f"H overflows at x={s.X[i]:.17g}, t={s.T[i]:.17g}")
    return np.exp(logH)


def compute_H(c: CoefficientSet, grid: GridSpec) -> RealField:
    """``H = exp(int_{x_min}^x 2h/f dx)`` on the grid, so ``H(x_min, t) = 1``."""
    s = GridSampler(grid, c.params)
    return RealField(grid, _drift_weight(c, s).H)


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------

def residual_fg(c: CoefficientSet, c1: Expr, grid: GridSpec, tol: float = DEFAULT_TOL) -> ResidualReport:
    """``f g^2 - c1 H`` (H = 1 without drift)."""
    s = GridSampler(grid, c.params)
    fg2 = s(c.f) * s(c.g) ** 2
    c1H = s(as_expr(c1)) * _drift_weight(c, s).H
    return ResidualReport.from_terms("fg", grid, fg2 - c1H, [fg2, c1H], tol, s.coords())


def residual_gamma(c: CoefficientSet, c2: Expr, grid: GridSpec, tol: float = DEFAULT_TOL) -> ResidualReport:
    """``gamma - g_t/g + c2'/(2 c2) + H_t/(4H)``."""
    s = GridSampler(grid, c.params)
    c2 = as_expr(c2)
    g = s(c.g)
    _nonzero(g, "g", s)
    c2v = s(c2)
    _nonzero(c2v, "c2", s)
    terms = [s(c.gamma), -s(c.g, "t", 1) / g, s(c2, "t", 1) / (2.0 * c2v)]
    if c.h is not None:
        terms.append(_drift_weight(c, s).H_t_over_H / 4.0)
    return ResidualReport.from_terms("gamma", grid, sum(terms), terms, tol, s.coords())


def _v_free_terms(c: CoefficientSet, s: GridSampler) -> list[np.ndarray]:
    """Terms of the one-dimensional v condition that do not involve v."""
    f, g, gam = c.f, c.g, c.gamma
    F, G, Gm = s(f), s(g), s(gam)
    f_t, f_tt = s(f, "t", 1), s(f, "t", 2)
    g_t, g_tt = s(g, "t", 1), s(g, "t", 2)
    g_x, g_xx, g_xxx, g_4 = (s(g, "x", k) for k in (1, 2, 3, 4))
    gam_t = s(gam, "t", 1)
    F2, F4 = F**2, F**4
    G2, G3, G4 = G**2, G**3, G**4
    return [
        F * G3 * f_t * g_t,
        -2.0 * F * G4 * f_t * Gm,
        -F * G4 * f_tt,
        f_t**2 * G4,
        4.0 * F2 * G3 * g_t * Gm,
        F2 * G3 * g_tt,
        -2.0 * F2 * G2 * g_t**2,
        -2.0 * F2 * G4 * gam_t,
        -4.0 * F2 * G4 * Gm**2,
        36.0 * F4 * g_x**4,
        -48.0 * F4 * G * g_xx * g_x**2,
        10.0 * F4 * G2 * g_xxx * g_x,
        6.0 * F4 * G2 * g_xx**2,
        -F4 * G3 * g_4,
    ]


def residual_v(c: CoefficientSet, grid: GridSpec, tol: float = DEFAULT_TOL) -> ResidualReport:
    """Pointwise one-dimensional condition linking f, g, gamma and v."""
    s = GridSampler(grid, c.params)
    F, G = s(c.f), s(c.g)
    _nonzero(F, "f", s)
    _nonzero(G, "g", s)
    terms = _v_free_terms(c, s)
    terms += [
        2.0 * F**3 * G**4 * s(c.v, "x", 2),
        -2.0 * F**3 * G**3 * s(c.g, "x", 1) * s(c.v, "x", 1),
    ]
    return ResidualReport.from_terms("v", grid, sum(terms), terms, tol, s.coords())


def residual_v_hd(c: CoefficientSet, grid: GridSpec, tol: float = DEFAULT_TOL) -> ResidualReport:
    """Condition with drift weight H, term by term as published (its overall
    scale is four times the one-dimensional condition when H = 1)."""
    s = GridSampler(grid, c.params)
    F, G, Gm = s(c.f), s(c.g), s(c.gamma)
    _nonzero(F, "f", s)
    _nonzero(G, "g", s)
    w = _drift_weight(c, s)
    H, H_x, H_xx, H_xxx = w.H, w.H_x, w.H_xx, w.H_xxx
    f_t, f_tt = s(c.f, "t", 1), s(c.f, "t", 2)
    g_t, g_tt = s(c.g, "t", 1), s(c.g, "t", 2)
    g_x, g_xx, g_xxx, g_4 = (s(c.g, "x", k) for k in (1, 2, 3, 4))
    gam_t = s(c.gamma, "t", 1)
    v_x, v_xx = s(c.v, "x", 1), s(c.v, "x", 2)
    F2, F3, F4 = F**2, F**3, F**4
    G2, G3, G4 = G**2, G**3, G**4
    H2 = H**2
    terms = [
        -8.0 * F * G4 * H2 * f_t * Gm,
        4.0 * F * G3 * H2 * f_t * g_t,
        -4.0 * F * G4 * H2 * f_tt,
        4.0 * f_t**2 * G4 * H2,
        4.0 * F3 * G4 * H * H_x * v_x,
        -8.0 * F3 * G3 * H2 * g_x * v_x,
        8.0 * F3 * G4 * H2 * v_xx,
        # f^4 [ ... ]
        -3.0 * F4 * G3 * g_xx * H_x**2,
        6.0 * F4 * G2 * g_x**2 * H_x**2,
        -F4 * G3 * g_x * H_x * H_xx,
        -96.0 * F4 * G * g_x**3 * H * H_x,
        20.0 * F4 * G2 * g_x**2 * H * H_xx,
        -2.0 * F4 * G3 * g_x * H * H_xxx,
        84.0 * F4 * G2 * g_x * g_xx * H * H_x,
        -8.0 * F4 * G3 * g_xx * H * H_xx,
        -12.0 * F4 * G3 * g_xxx * H * H_x,
        144.0 * F4 * g_x**4 * H2,
        -192.0 * F4 * G * g_xx * g_x**2 * H2,
        40.0 * F4 * G2 * g_xxx * g_x * H2,
        24.0 * F4 * G2 * g_xx**2 * H2,
        -4.0 * F4 * G3 * g_4 * H2,
        # 4 f^2 g^2 H^2 [ ... ]
        16.0 * F2 * G3 * H2 * g_t * Gm,
        4.0 * F2 * G3 * H2 * g_tt,
        -8.0 * F2 * G2 * H2 * g_t**2,
        -8.0 * F2 * G4 * H2 * gam_t,
        -16.0 * F2 * G4 * H2 * Gm**2,
    ]
    return ResidualReport.from_terms("v_hd", grid, sum(terms), terms, tol, s.coords())


def _require_time_only(name: str, e: Expr, params: dict):
    if depends_on(e, "x", params):
        raise PreconditionError(f"{name} must depend on t only, got {e}")


def residual_painleve(f: Expr, g: Expr, v2: Expr, grid: GridSpec, params: dict | None = None,
                      tol: float = DEFAULT_TOL) -> ResidualReport:
    """Time-only condition on the x^2 coefficient ``v2`` of a quadratic
    potential, evaluated on the time axis of ``grid``."""
    params = dict(params or {})
    f, g, v2 = as_expr(f), as_expr(g), as_expr(v2)
    for name, e in (("f", f), ("g", g), ("v2", v2)):
        _require_time_only(name, e, params)
    t = grid.t
    ev = lambda e: np.broadcast_to(evaluate(e, {"t": t, "x": 0.0}, params), t.shape)  # noqa: E731
    F, G, V2 = ev(f), ev(g), ev(v2)
    fd, fdd = ev(diff(f, "t", 1)), ev(diff(f, "t", 2))
    gd, gdd = ev(diff(g, "t", 1)), ev(diff(g, "t", 2))
    terms = [
        4.0 * F**3 * G**2 * V2,
        F * G * fd * gd,
        F**2 * G * gdd,
        G**2 * fd**2,
        -(G**2) * F * fdd,
        -2.0 * F**2 * gd**2,
    ]
    return ResidualReport.from_terms("painleve", grid, sum(terms), terms, tol, {"t": t})


def check_all(c: CoefficientSet, c1: Expr, c2: Expr, grid: GridSpec, tol: float = DEFAULT_TOL) -> list[ResidualReport]:
    """fg, gamma and the v condition appropriate to the presence of drift."""
    reports = [residual_fg(c, c1, grid, tol), residual_gamma(c, c2, grid, tol)]
    reports.append(residual_v(c, grid, tol) if c.h is None else residual_v_hd(c, grid, tol))
    return reports


__all__ = [
    "CoefficientSet", "DriftWeight", "GridError", "PreconditionError", "check_all", "compute_H",
    "residual_fg", "residual_gamma", "residual_painleve", "residual_v", "residual_v_hd",
]
