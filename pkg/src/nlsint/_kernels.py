"""Hot numeric kernels.

Each kernel has a numba ``@njit`` implementation and a pure numpy/scipy
fallback. The numba path is used when numba imports cleanly and the
environment variable ``NLSINT_DISABLE_NUMBA`` is unset (or ``0``).
Both paths are importable directly for testing and benchmarking.
"""
from __future__ import annotations

import math
import os
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_banded

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def numba_enabled() -> bool:
    flag = os.environ.get("NLSINT_DISABLE_NUMBA", "").strip().lower()
    return HAVE_NUMBA and flag in ("", "0", "false", "no")


def _use_numba(backend: str | None) -> bool:
    if backend is None:
        return numba_enabled()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"backend must be 'numba' or 'numpy', got {backend!r}")
    return backend == "numba"


_EPS = 2.0**-53
_MAX_AGM = 40


# ---------------------------------------------------------------------------
# Jacobi elliptic functions
# ---------------------------------------------------------------------------

@njit(cache=True)
def _agm_unit(u, m):
    """sn, cn, dn for 0 <= m <= 1 by the descending AGM scheme."""
    if m == 0.0:
        return math.sin(u), math.cos(u), 1.0
    if m == 1.0:
        s = 1.0 / math.cosh(u)
        return math.tanh(u), s, s
    a = np.empty(_MAX_AGM + 1)
    c = np.empty(_MAX_AGM + 1)
    a[0] = 1.0
    b = math.sqrt(1.0 - m)
    c[0] = math.sqrt(m)
    n = 0
    while abs(c[n]) > _EPS and n < _MAX_AGM:
        an = a[n]
        a[n + 1] = 0.5 * (an + b)
        c[n + 1] = 0.5 * (an - b)
        b = math.sqrt(an * b)
        n += 1
    phi = (2.0**n) * a[n] * u
    for k in range(n, 0, -1):
        phi = 0.5 * (phi + math.asin(c[k] / a[k] * math.sin(phi)))
    sn = math.sin(phi)
    cn = math.cos(phi)
    # both terms are >= 0, so no cancellation (unlike cn / cos(phi1 - phi))
    return sn, cn, math.sqrt((1.0 - m) + m * cn * cn)


@njit(cache=True)
def _sncndn_scalar(u, m):
    if m < 0.0:
        # negative parameter -> parameter mu in (0, 1)
        mu = -m / (1.0 - m)
        r = math.sqrt(1.0 - m)
        s, c, d = _agm_unit(u * r, mu)
        return s / (r * d), c / d, 1.0 / d
    if m > 1.0:
        # reciprocal parameter
        r = math.sqrt(m)
        s, c, d = _agm_unit(u * r, 1.0 / m)
        return s / r, d, c
    return _agm_unit(u, m)


@njit(cache=True)
def _sncndn_numba(u, m):
    n = u.size
    sn = np.empty(n)
    cn = np.empty(n)
    dn = np.empty(n)
    for i in range(n):
        s, c, d = _sncndn_scalar(u[i], m[i])
        sn[i] = s
        cn[i] = c
        dn[i] = d
    return sn, cn, dn


def _agm_unit_numpy(u, m):
    sn = np.empty_like(u)
    cn = np.empty_like(u)
    dn = np.empty_like(u)
    zero = m == 0.0
    one = m == 1.0
    sn[zero], cn[zero], dn[zero] = np.sin(u[zero]), np.cos(u[zero]), 1.0
    sech = 1.0 / np.cosh(u[one])
    sn[one], cn[one], dn[one] = np.tanh(u[one]), sech, sech
    gen = ~(zero | one)
    if not gen.any():
        return sn, cn, dn
    ug, mg = u[gen], m[gen]
    a = [np.ones_like(mg)]
    c = [np.sqrt(mg)]
    b = np.sqrt(1.0 - mg)
    while np.max(np.abs(c[-1])) > _EPS and len(a) <= _MAX_AGM:
        an = a[-1]
        a.append(0.5 * (an + b))
        c.append(0.5 * (an - b))
        b = np.sqrt(an * b)
    n = len(a) - 1
    phi = (2.0**n) * a[n] * ug
    for k in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c[k] / a[k] * np.sin(phi)))
    cg = np.cos(phi)
    sn[gen] = np.sin(phi)
    cn[gen] = cg
    dn[gen] = np.sqrt((1.0 - mg) + mg * cg * cg)
    return sn, cn, dn


def _sncndn_numpy(u, m):
    sn = np.empty_like(u)
    cn = np.empty_like(u)
    dn = np.empty_like(u)
    neg = m < 0.0
    big = m > 1.0
    mid = ~(neg | big)
    if mid.any():
        sn[mid], cn[mid], dn[mid] = _agm_unit_numpy(u[mid], m[mid])
    if neg.any():
        mn = m[neg]
        r = np.sqrt(1.0 - mn)
        s, c, d = _agm_unit_numpy(u[neg] * r, -mn / (1.0 - mn))
        sn[neg], cn[neg], dn[neg] = s / (r * d), c / d, 1.0 / d
    if big.any():
        mb = m[big]
        r = np.sqrt(mb)
        s, c, d = _agm_unit_numpy(u[big] * r, 1.0 / mb)
        sn[big], cn[big], dn[big] = s / r, d, c
    return sn, cn, dn


def sncndn(u, m, *, backend: str | None = None):
    """Jacobi sn, cn, dn of argument ``u`` and parameter ``m`` (any real m).

    ``u`` and ``m`` broadcast; the outputs have the broadcast shape.
    """
    u, m = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(m, dtype=float))
    shape = u.shape
    uf = np.ascontiguousarray(u).ravel()
    mf = np.ascontiguousarray(m).ravel()
    use_numba = _use_numba(backend)
    fn = _sncndn_numba if use_numba else _sncndn_numpy
    sn, cn, dn = fn(uf, mf)
    return sn.reshape(shape), cn.reshape(shape), dn.reshape(shape)


# ---------------------------------------------------------------------------
# Cumulative quadrature along the last axis
# ---------------------------------------------------------------------------
#
# Every interval [x_i, x_{i+1}] is integrated with the interpolating
# polynomial through ``QUAD_NODES`` neighbouring nodes (centred where
# possible, one-sided at the ends). The per-interval error is uniform, so the
# cumulative error is smooth in x and finite differences of the result keep
# their formal order.

QUAD_NODES = 6


@lru_cache(maxsize=32)
def interval_weights(n: int, nodes: int = QUAD_NODES):
    """Stencil starts and weights (in units of dx) for each of the n-1 intervals."""
    p = min(nodes, n)
    starts = np.clip(np.arange(n - 1) - (p // 2 - 1), 0, n - p)
    weights = np.empty((n - 1, p))
    moments = 1.0 / np.arange(1, p + 1)
    for i, s0 in enumerate(starts):
        offsets = np.arange(s0, s0 + p) - i
        vander = np.vander(offsets.astype(float), p, increasing=True).T
        weights[i] = np.linalg.solve(vander, moments)
    starts.setflags(write=False)
    weights.setflags(write=False)
    return starts, weights


@njit(cache=True)
def _cumint_numba(y, dx, starts, weights):
    nrow, n = y.shape
    p = weights.shape[1]
    out = np.zeros((nrow, n))
    for r in range(nrow):
        acc = 0.0
        for i in range(n - 1):
            piece = 0.0
            s0 = starts[i]
            for k in range(p):
                piece += weights[i, k] * y[r, s0 + k]
            acc += piece * dx
            out[r, i + 1] = acc
    return out


def _cumint_numpy(y, dx, starts, weights):
    n = y.shape[-1]
    p = weights.shape[1]
    idx = starts[:, None] + np.arange(p)
    pieces = np.einsum("...ik,ik->...i", y[..., idx], weights)
    out = np.zeros(y.shape)
    np.cumsum(pieces * dx, axis=-1, out=out[..., 1:])
    return out


def cumint_rows(y, dx: float, *, backend: str | None = None):
    """Cumulative integral of each row of ``y`` (2-D) from its first node."""
    y = np.ascontiguousarray(y, dtype=float)
    if y.shape[-1] < 3:
        raise ValueError("cumulative integration needs at least 3 nodes")
    starts, weights = interval_weights(y.shape[-1])
    use_numba = _use_numba(backend)
    if use_numba:
        return _cumint_numba(y, float(dx), starts.astype(np.int64), np.ascontiguousarray(weights))
    return _cumint_numpy(y, float(dx), starts, weights)


# ---------------------------------------------------------------------------
# Complex tridiagonal solve
# ---------------------------------------------------------------------------

@njit(cache=True)
def _thomas_numba(lower, diag, upper, rhs):
    n = diag.size
    cp = np.empty(n, dtype=np.complex128)
    dp = np.empty(n, dtype=np.complex128)
    cp[0] = upper[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        den = diag[i] - lower[i] * cp[i - 1]
        if i < n - 1:
            cp[i] = upper[i] / den
        else:
            cp[i] = 0.0
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / den
    x = np.empty(n, dtype=np.complex128)
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def _thomas_numpy(lower, diag, upper, rhs):
    ab = np.zeros((3, diag.size), dtype=np.complex128)
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    return solve_banded((1, 1), ab, rhs, check_finite=False)


def solve_tridiagonal(lower, diag, upper, rhs, *, backend: str | None = None):
    """Solve a tridiagonal system; ``lower[0]`` and ``upper[-1]`` are ignored."""
    lower = np.ascontiguousarray(lower, dtype=np.complex128)
    diag = np.ascontiguousarray(diag, dtype=np.complex128)
    upper = np.ascontiguousarray(upper, dtype=np.complex128)
    rhs = np.ascontiguousarray(rhs, dtype=np.complex128)
    use_numba = _use_numba(backend)
    if use_numba:
        return _thomas_numba(lower, diag, upper, rhs)
    return _thomas_numpy(lower, diag, upper, rhs)


# ---------------------------------------------------------------------------
# Crank-Nicolson step with midpoint-frozen nonlinearity
# ---------------------------------------------------------------------------
#
# Linear part per interior node j (all coefficients at the half step):
#   (L u)_j = lo_j u_{j-1} + di_j u_j + up_j u_{j+1}
#   lo = i (f/dx^2 - h/(2dx)),  up = i (f/dx^2 + h/(2dx)),
#   di = i (-2f/dx^2 + v + g rho) - gamma,  rho = |(u_new + u_old)/2|^2.
# Boundary nodes carry Dirichlet values.

@njit(cache=True)
def _cn_step_numba(u, f, h, v, gam, g, dx, dt, left, right, tol, maxit):
    n = u.size
    m = n - 2
    half = 0.5 * dt
    inv2 = 1.0 / (dx * dx)
    lo = np.empty(m, dtype=np.complex128)
    up = np.empty(m, dtype=np.complex128)
    dlin = np.empty(m, dtype=np.complex128)
    for k in range(m):
        j = k + 1
        lo[k] = 1j * (f[j] * inv2 - h[j] / (2.0 * dx))
        up[k] = 1j * (f[j] * inv2 + h[j] / (2.0 * dx))
        dlin[k] = 1j * (-2.0 * f[j] * inv2 + v[j]) - gam[j]
    new = u.copy()
    new[0] = left
    new[n - 1] = right
    a = np.empty(m, dtype=np.complex128)
    b = np.empty(m, dtype=np.complex128)
    c = np.empty(m, dtype=np.complex128)
    r = np.empty(m, dtype=np.complex128)
    it = 0
    delta = np.inf
    while it < maxit:
        it += 1
        for k in range(m):
            j = k + 1
            mid = 0.5 * (new[j] + u[j])
            di = dlin[k] + 1j * g[j] * (mid.real * mid.real + mid.imag * mid.imag)
            a[k] = -half * lo[k]
            b[k] = 1.0 - half * di
            c[k] = -half * up[k]
            r[k] = u[j] + half * (lo[k] * u[j - 1] + di * u[j] + up[k] * u[j + 1])
        r[0] += half * lo[0] * new[0]
        r[m - 1] += half * up[m - 1] * new[n - 1]
        sol = _thomas_numba(a, b, c, r)
        delta = 0.0
        scale = 1.0
        for k in range(m):
            d = abs(sol[k] - new[k + 1])
            if d > delta:
                delta = d
            s = abs(sol[k])
            if s > scale:
                scale = s
            new[k + 1] = sol[k]
        if delta <= tol * scale:
            return new, it, delta
    return new, -it, delta


def _cn_step_numpy(u, f, h, v, gam, g, dx, dt, left, right, tol, maxit):
    half = 0.5 * dt
    fi, hi = f[1:-1], h[1:-1]
    lo = 1j * (fi / dx**2 - hi / (2.0 * dx))
    up = 1j * (fi / dx**2 + hi / (2.0 * dx))
    dlin = 1j * (-2.0 * fi / dx**2 + v[1:-1]) - gam[1:-1]
    new = u.copy()
    new[0], new[-1] = left, right
    delta = np.inf
    for it in range(1, maxit + 1):
        di = dlin + 1j * g[1:-1] * np.abs(0.5 * (new[1:-1] + u[1:-1])) ** 2
        r = u[1:-1] + half * (lo * u[:-2] + di * u[1:-1] + up * u[2:])
        r[0] += half * lo[0] * new[0]
        r[-1] += half * up[-1] * new[-1]
        sol = _thomas_numpy(-half * lo, 1.0 - half * di, -half * up, r)
        delta = float(np.max(np.abs(sol - new[1:-1])))
        scale = max(1.0, float(np.max(np.abs(sol))))
        new[1:-1] = sol
        if delta <= tol * scale:
            return new, it, delta
    return new, -maxit, delta


def cn_step(u, f, h, v, gam, g, dx: float, dt: float, left: complex, right: complex,
            tol: float = 1e-12, maxit: int = 50, *, backend: str | None = None):
    """One implicit-midpoint step. Returns ``(u_new, iterations, last_delta)``;
    a negative iteration count means the fixed point did not converge."""
    u = np.ascontiguousarray(u, dtype=np.complex128)
    args = [np.ascontiguousarray(a, dtype=float) for a in (f, h, v, gam, g)]
    use_numba = _use_numba(backend)
    step = _cn_step_numba if use_numba else _cn_step_numpy
    return step(u, *args, float(dx), float(dt), complex(left), complex(right), float(tol), int(maxit))
