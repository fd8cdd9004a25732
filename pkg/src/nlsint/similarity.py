"""Similarity transformation Psi = exp(beta + i theta) Q(X) onto the
homogeneous equation eps Q_XX + delta |Q|^2 Q = 0.

All quadratures start at ``x_min``; the resulting t-dependent shifts are
absorbed into ``c1`` (for X) and ``c_theta`` (for theta). Derivatives of the
quadrature-valued X and theta are obtained by differentiating under the
integral sign with exact integrands, not by differencing the grids.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conditions import CoefficientSet, PreconditionError
from .exprcore import (
    ZERO,
    ComplexField,
    Const,
    Expr,
    GridSpec,
    RealField,
    as_expr,
    cumint_x,
    diff,
    evaluate,
    fn,
    parse,
    simplify,
)
from .report import DEFAULT_TOL, ResidualReport
from .sampling import GridSampler


class SingularGaugeError(PreconditionError):
    pass


@dataclass
class GaugeSpec:
    beta: Expr
    gamma: Expr = ZERO
    c1: Expr = ZERO
    c2: Expr = field(default_factory=lambda: Const(1.0))
    c_theta: Expr = ZERO
    c_f: Expr = field(default_factory=lambda: Const(1.0))
    epsilon: float = 1.0
    delta: float = 1.0
    c8: float = 1.0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.epsilon == 0 or self.delta == 0:
            raise PreconditionError("epsilon and delta must be nonzero")

    @classmethod
    def from_json(cls, d: dict, params: dict | None = None) -> "GaugeSpec":
        exprs = {k: parse(str(d[k])) for k in ("beta", "gamma", "c1", "c2", "c_theta", "c_f") if k in d}
        nums = {k: float(d[k]) for k in ("epsilon", "delta", "c8") if k in d}
        return cls(**exprs, **nums, params=dict(params or {}))

    def to_json(self) -> dict:
        out = {k: str(getattr(self, k)) for k in ("beta", "gamma", "c1", "c2", "c_theta", "c_f")}
        out.update(epsilon=self.epsilon, delta=self.delta, c8=self.c8)
        return out


class _Gauge:
    """Shared symbolic pieces and quadratures for one gauge on one grid."""

    def __init__(self, gs: GaugeSpec, grid: GridSpec, f=None):
        self.gs = gs
        self.grid = grid
        self.s = GridSampler(grid, gs.params)
        b = gs.beta
        self.e_m2b = simplify(fn("exp", Const(-2.0) * b))
        self.e_2b = simplify(fn("exp", Const(2.0) * b))
        c2 = self.s(gs.c2)
        if np.any(c2 == 0):
            raise PreconditionError("c2 must not vanish (degenerate coordinate map)")
        # integrand of the inner quadrature in theta and f
        self.A = simplify(self.e_m2b * (diff(gs.c2, "t") - Const(2.0) * gs.c2 * diff(b, "t")))
        self.f = f

    def cum(self, values):
        return cumint_x(RealField(self.grid, values)).values

    # X = c1 + c2 int e^{-2 beta}
    def X_parts(self):
        s, gs = self.s, self.gs
        J = self.cum(s(self.e_m2b))
        J_t = self.cum(s(self.e_m2b, "t", 1))
        X = s(gs.c1) + s(gs.c2) * J
        X_t = s(gs.c1, "t", 1) + s(gs.c2, "t", 1) * J + s(gs.c2) * J_t
        X_x = s(gs.c2) * s(self.e_m2b)
        X_xx = s(gs.c2) * s(self.e_m2b, "x", 1)
        return X, X_x, X_xx, X_t

    def D(self):
        """Inner quadrature plus c1' and its t-derivative."""
        s, gs = self.s, self.gs
        D = self.cum(s(self.A)) + s(gs.c1, "t", 1)
        D_t = self.cum(s(self.A, "t", 1)) + s(gs.c1, "t", 2)
        return D, D_t

    def theta_parts(self):
        if self.f is None:
            raise PreconditionError("theta needs f")
        s, gs = self.s, self.gs
        F = s(self.f)
        if np.any(F == 0):
            raise PreconditionError("f vanishes on the grid")
        E, E_x, E_t = s(self.e_2b), s(self.e_2b, "x", 1), s(self.e_2b, "t", 1)
        D, D_t = self.D()
        c2, c2_t = s(gs.c2), s(gs.c2, "t", 1)
        den = 2.0 * c2 * F
        den_x = 2.0 * c2 * s(self.f, "x", 1)
        den_t = 2.0 * (c2_t * F + c2 * s(self.f, "t", 1))
        phi = E * D / den
        phi_x = (E_x * D + E * s(self.A)) / den - E * D * den_x / den**2
        phi_t = (E_t * D + E * D_t) / den - E * D * den_t / den**2
        theta = -self.cum(phi) + s(gs.c_theta)
        theta_t = -self.cum(phi_t) + s(gs.c_theta, "t", 1)
        return theta, -phi, -phi_x, theta_t


@dataclass(frozen=True, eq=False)
class ThetaField(RealField):
    """theta samples together with exact-integrand derivatives."""

    theta_x: np.ndarray = None
    theta_xx: np.ndarray = None
    theta_t: np.ndarray = None


def compute_X(gs: GaugeSpec, grid: GridSpec) -> RealField:
    X, *_ = _Gauge(gs, grid).X_parts()
    return RealField(grid, X)


def compute_g(gs: GaugeSpec, f, grid: GridSpec) -> RealField:
    """g = (delta/eps) c2^2 e^{-6 beta} f."""
    s = GridSampler(grid, gs.params)
    e6 = simplify(fn("exp", Const(-6.0) * gs.beta))
    return RealField(grid, gs.delta / gs.epsilon * s(gs.c2) ** 2 * s(e6) * s(as_expr_or_field(f)))


def as_expr_or_field(f):
    return f if isinstance(f, RealField) else as_expr(f)


def compute_theta(gs: GaugeSpec, f, grid: GridSpec) -> ThetaField:
    theta, th_x, th_xx, th_t = _Gauge(gs, grid, as_expr_or_field(f)).theta_parts()
    return ThetaField(grid, theta, th_x, th_xx, th_t)


def compute_f(gs: GaugeSpec, grid: GridSpec) -> RealField:
    """Dispersion fixed by the gain/loss equation, with f(x_min, t) = c_f(t)."""
    g = _Gauge(gs, grid)
    s = g.s
    D, _ = g.D()
    scale = max(np.max(np.abs(D)), 1e-300)
    bad = np.abs(D) <= 1e-13 * scale
    sign_change = np.signbit(D[:, 1:]) != np.signbit(D[:, :-1])
    bad[:, 1:] |= sign_change
    if np.any(bad):
        i = np.unravel_index(int(np.argmax(bad)), bad.shape)
        raise SingularGaugeError(
            f"singular gauge: quadrature denominator vanishes near x={s.X[i]:.17g}, t={s.T[i]:.17g}"
        )
    b = gs.beta
    rest = simplify(
        g.e_m2b * (Const(-4.0) * gs.c2 * diff(b, "t") + diff(gs.c2, "t") - Const(2.0) * gs.c2 * gs.gamma)
    )
    N = 4.0 * s(b, "x", 1) * D + s(rest)
    logf = g.cum(N / D)
    if np.any(logf > 700.0):
        raise OverflowError("f overflows on the grid")
    return RealField(grid, s(gs.c_f) * np.exp(logf))


def compute_v(gs: GaugeSpec, f, theta: RealField | None, grid: GridSpec) -> RealField:
    """v = theta_t - f (beta_x^2 - theta_x^2 + beta_xx)."""
    f = as_expr_or_field(f)
    if theta is None:
        theta = compute_theta(gs, f, grid)
    s = GridSampler(grid, gs.params)
    if isinstance(theta, ThetaField):
        th_x, th_t = theta.theta_x, theta.theta_t
    else:
        th = RealField(grid, theta.values)
        th_x, th_t = s(th, "x", 1), s(th, "t", 1)
    b_x, b_xx = s(gs.beta, "x", 1), s(gs.beta, "x", 2)
    return RealField(grid, th_t - s(f) * (b_x**2 - th_x**2 + b_xx))


@dataclass
class MappedSolution:
    """Psi on the grid plus its exact-integrand derivatives."""

    psi: ComplexField
    psi_x: np.ndarray
    psi_xx: np.ndarray
    psi_t: np.ndarray


def _q_pair(Q):
    if isinstance(Q, (tuple, list)):
        re, im = Q
        return as_expr(re), as_expr(im)
    return as_expr(Q), ZERO


def _eval_q(expr, X, params):
    return np.broadcast_to(evaluate(expr, {"X": X}, params), np.shape(X))


def map_solution(gs: GaugeSpec, Q, grid: GridSpec, f=None) -> MappedSolution:
    """Psi = exp(beta + i theta) Q(X) for Q given in the variable ``X``
    (a single real Expr or a (re, im) pair)."""
    f = compute_f(gs, grid) if f is None else as_expr_or_field(f)
    g = _Gauge(gs, grid, f)
    s = g.s
    X, X_x, X_xx, X_t = g.X_parts()
    theta, th_x, th_xx, th_t = g.theta_parts()
    re, im = _q_pair(Q)
    params = gs.params
    q = _eval_q(re, X, params) + 1j * _eval_q(im, X, params)
    q1 = _eval_q(diff(re, "X", 1), X, params) + 1j * _eval_q(diff(im, "X", 1), X, params)
    q2 = _eval_q(diff(re, "X", 2), X, params) + 1j * _eval_q(diff(im, "X", 2), X, params)
    b = gs.beta
    b_x, b_xx, b_t = s(b, "x", 1), s(b, "x", 2), s(b, "t", 1)
    w = np.exp(s(b) + 1j * theta)
    psi = w * q
    k = b_x + 1j * th_x
    psi_x = k * psi + w * q1 * X_x
    psi_xx = (b_xx + 1j * th_xx) * psi + k * psi_x + w * (k * q1 * X_x + q2 * X_x**2 + q1 * X_xx)
    psi_t = (b_t + 1j * th_t) * psi + w * q1 * X_t
    return MappedSolution(ComplexField(grid, psi), psi_x, psi_xx, psi_t)


def check_homogeneous(Q, epsilon: float, delta: float, X_range, n: int = 2001,
                      params: dict | None = None, tol: float = DEFAULT_TOL) -> ResidualReport:
    """Residual of eps Q_XX + delta |Q|^2 Q on a uniform X grid."""
    lo, hi = X_range
    grid = GridSpec(lo, hi, n)
    Xs = grid.x
    re, im = _q_pair(Q)
    q = _eval_q(re, Xs, params) + 1j * _eval_q(im, Xs, params)
    q2 = _eval_q(diff(re, "X", 2), Xs, params) + 1j * _eval_q(diff(im, "X", 2), Xs, params)
    terms = [epsilon * q2, delta * np.abs(q) ** 2 * q]
    return ResidualReport.from_terms("homogeneous", grid, terms[0] + terms[1], terms, tol, {"X": Xs})


@dataclass
class TransformResult:
    X: RealField
    theta: ThetaField
    f: RealField
    g: RealField
    v: RealField
    p: RealField
    closed_forms: dict = field(default_factory=dict)


def transform(gs: GaugeSpec, grid: GridSpec, f=None) -> TransformResult:
    """Run the full construction: X, f (unless given), g, theta, v and p."""
    s = GridSampler(grid, gs.params)
    f_in = compute_f(gs, grid) if f is None else as_expr_or_field(f)
    X = compute_X(gs, grid)
    theta = compute_theta(gs, f_in, grid)
    g = compute_g(gs, f_in, grid)
    v = compute_v(gs, f_in, theta, grid)
    X_x = s(gs.c2) * s(simplify(fn("exp", Const(-2.0) * gs.beta)))
    F = s(f_in)
    p = RealField(grid, F * X_x**2 / gs.epsilon)
    closed = {}
    if not isinstance(f_in, RealField):
        closed["f"] = str(f_in)
    return TransformResult(X, theta, RealField(grid, F), g, v, p, closed)


def consistency_reports(gs: GaugeSpec, grid: GridSpec, f=None, g=None, v=None,
                        tol: float = DEFAULT_TOL) -> list[ResidualReport]:
    """Residuals of the six matching conditions of the gauge:

    nonlinearity  e^{2 beta} g = delta p
    dispersion    f X_x^2 = eps p
    coordinate    X_t + 2 f X_x theta_x = 0
    amplitude     2 X_x beta_x + X_xx = 0
    gain          beta_t + gamma + 2 f beta_x theta_x + f theta_xx = 0
    potential     v - theta_t + f (beta_x^2 - theta_x^2 + beta_xx) = 0

    ``p`` is taken from the dispersion relation, so that one is an identity
    and the nonlinearity condition tests the compatibility of g with f.
    """
    f = compute_f(gs, grid) if f is None else as_expr_or_field(f)
    gg = _Gauge(gs, grid, f)
    s = gg.s
    X, X_x, X_xx, X_t = gg.X_parts()
    _, th_x, th_xx, th_t = gg.theta_parts()
    F = s(f)
    G = s(as_expr_or_field(g)) if g is not None else compute_g(gs, f, grid).values
    V = s(as_expr_or_field(v)) if v is not None else None
    b = gs.beta
    b_x, b_xx, b_t = s(b, "x", 1), s(b, "x", 2), s(b, "t", 1)
    E2 = s(gg.e_2b)
    p = F * X_x**2 / gs.epsilon
    coords = s.coords()
    out = [
        ResidualReport.from_terms("nonlinearity", grid, E2 * G - gs.delta * p, [E2 * G, gs.delta * p], tol, coords),
        ResidualReport.from_terms("dispersion", grid, F * X_x**2 - gs.epsilon * p, [F * X_x**2], tol, coords),
        ResidualReport.from_terms("coordinate", grid, X_t + 2 * F * X_x * th_x, [X_t, 2 * F * X_x * th_x], tol, coords),
        ResidualReport.from_terms("amplitude", grid, 2 * X_x * b_x + X_xx, [2 * X_x * b_x, X_xx], tol, coords),
    ]
    gam = s(gs.gamma)
    gain_terms = [b_t, gam, 2 * F * b_x * th_x, F * th_xx]
    out.append(ResidualReport.from_terms("gain", grid, sum(gain_terms), gain_terms, tol, coords))
    if V is None:
        V = compute_v(gs, f, ThetaField(grid, np.zeros(grid.shape), th_x, th_xx, th_t), grid).values
    pot_terms = [V, -th_t, F * b_x**2, -F * th_x**2, F * b_xx]
    out.append(ResidualReport.from_terms("potential", grid, sum(pot_terms), pot_terms, tol, coords))
    return out


def gauge_coefficients(gs: GaugeSpec, grid: GridSpec, f=None) -> CoefficientSet:
    """Coefficient set of the nonautonomous equation produced by the gauge."""
    res = transform(gs, grid, f)
    f_out = f if f is not None and not isinstance(f, RealField) else res.f
    return CoefficientSet(as_expr_or_field(f_out), res.g, gs.gamma, res.v, None, dict(gs.params))
