import numpy as np
import pytest
from scipy.linalg import solve_banded
from scipy.special import ellipj

from nlsint import _kernels

BACKENDS = ("numba", "numpy")


@pytest.mark.parametrize("backend", BACKENDS)
def test_sncndn_matches_scipy_on_unit_interval(backend):
    rng = np.random.default_rng(1)
    u = rng.uniform(-6, 6, 500)
    m = rng.uniform(0, 1, 500)
    sn, cn, dn = _kernels.sncndn(u, m, backend=backend)
    rs, rc, rd, _ = ellipj(u, m)
    assert np.max(np.abs(sn - rs)) <= 1e-12
    assert np.max(np.abs(cn - rc)) <= 1e-12
    assert np.max(np.abs(dn - rd)) <= 1e-12


def test_backends_agree():
    rng = np.random.default_rng(2)
    u = rng.uniform(-5, 5, 2000)
    m = rng.uniform(-3, 0.999, 2000)
    a = np.stack(_kernels.sncndn(u, m, backend="numba"))
    b = np.stack(_kernels.sncndn(u, m, backend="numpy"))
    assert np.max(np.abs(a - b)) <= 1e-14

    y = rng.standard_normal((7, 301))
    assert np.max(np.abs(_kernels.cumint_rows(y, 0.01, backend="numba")
                         - _kernels.cumint_rows(y, 0.01, backend="numpy"))) <= 1e-13


def test_env_flag_selects_numpy(monkeypatch):
    monkeypatch.setenv("NLSINT_DISABLE_NUMBA", "1")
    assert not _kernels.numba_enabled()
    monkeypatch.delenv("NLSINT_DISABLE_NUMBA")
    assert _kernels.numba_enabled()


def test_unknown_backend():
    with pytest.raises(ValueError):
        _kernels.sncndn(np.zeros(3), np.zeros(3), backend="cuda")


@pytest.mark.parametrize("n", [3, 4, 6, 7, 11, 64])
def test_interval_weights_integrate_polynomials(n):
    starts, weights = _kernels.interval_weights(n)
    x = np.linspace(0.0, 1.0, n)
    dx = x[1] - x[0]
    deg = min(n - 1, 5)
    y = x**deg
    F = _kernels.cumint_rows(y[None, :], dx, backend="numpy")[0]
    assert np.max(np.abs(F - x ** (deg + 1) / (deg + 1))) <= 1e-13


@pytest.mark.parametrize("backend", BACKENDS)
def test_tridiagonal_matches_dense(backend):
    rng = np.random.default_rng(4)
    n = 50
    lo = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    up = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    di = 4.0 + np.abs(lo) + np.abs(up) + 1j * rng.standard_normal(n)
    rhs = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    got = _kernels.solve_tridiagonal(lo, di, up, rhs, backend=backend)
    A = np.diag(di) + np.diag(lo[1:], -1) + np.diag(up[:-1], 1)
    assert np.max(np.abs(A @ got - rhs)) <= 1e-12
    ab = np.zeros((3, n), complex)
    ab[0, 1:], ab[1], ab[2, :-1] = up[:-1], di, lo[1:]
    assert np.max(np.abs(got - solve_banded((1, 1), ab, rhs))) <= 1e-12


def test_cn_step_backends_agree_and_conserve_norm():
    x = np.linspace(-20, 20, 513)
    u = np.sqrt(2) / np.cosh(x) + 0j
    one, zero = np.ones_like(x), np.zeros_like(x)
    outs = []
    for b in BACKENDS:
        w, iters, delta = _kernels.cn_step(u, one, zero, zero, zero, one, x[1] - x[0], 1e-2, 0.0, 0.0, backend=b)
        assert iters > 0
        outs.append(w)
    assert np.max(np.abs(outs[0] - outs[1])) <= 1e-13
    n0, n1 = np.sum(np.abs(u) ** 2), np.sum(np.abs(outs[0]) ** 2)
    assert abs(n1 - n0) / n0 <= 1e-12


def test_cn_step_reports_nonconvergence():
    x = np.linspace(-20, 20, 257)
    u = 50 * np.sqrt(2) / np.cosh(x) + 0j
    one, zero = np.ones_like(x), np.zeros_like(x)
    _, iters, delta = _kernels.cn_step(u, one, zero, zero, zero, one, x[1] - x[0], 0.5, 0.0, 0.0,
                                       maxit=3, backend="numpy")
    assert iters < 0 and delta > 0


@pytest.mark.parametrize("backend", BACKENDS)
def test_sncndn_against_high_precision(backend):
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 30
    rng = np.random.default_rng(5)
    u = rng.uniform(-8, 8, 120)
    m = np.concatenate([rng.uniform(-3, 1, 80), 1 - 10.0 ** -rng.uniform(3, 12, 40)])
    out = _kernels.sncndn(u, m, backend=backend)
    for i in range(u.size):
        for name, arr in zip(("sn", "cn", "dn"), out):
            ref = float(mpmath.re(mpmath.ellipfun(name, u[i], m=m[i])))
            assert abs(arr[i] - ref) <= 1e-13
