"""Cumulative quadrature in x and finite-difference derivatives on grids."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .. import _kernels
from .grid import GridError, GridSpec, RealField


def cumint_x(samples: RealField | np.ndarray, grid: GridSpec | None = None, x0: float | None = None) -> RealField:
    """Per-time-row integral from ``x_min`` to each node.

    Each interval is integrated with the quintic through its six nearest
    nodes, so the result is exact for quintics and the error is smooth in x.
    ``F(x_min, t) = 0``; other integration constants belong to the caller.
    """
    if isinstance(samples, RealField):
        grid = samples.grid
        values = samples.values
    else:
        if grid is None:
            raise TypeError("a grid is required for raw sample arrays")
        values = np.asarray(samples, dtype=float).reshape(grid.shape)
    if x0 is not None and x0 != grid.x_min:
        raise GridError("the integration base point must be x_min")
    if grid.n_x < 3:
        raise GridError("cumulative integration needs n_x >= 3")
    return RealField(grid, _kernels.cumint_rows(values, grid.dx))


def _fornberg(offsets: tuple[int, ...], deriv: int) -> np.ndarray:
    """Finite-difference weights at 0 for nodes at integer ``offsets``."""
    z = 0.0
    x = np.asarray(offsets, dtype=float)
    n = len(x)
    c = np.zeros((n, deriv + 1))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, deriv)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, deriv]


@lru_cache(maxsize=64)
def _stencils(n: int, deriv: int, accuracy: int):
    half = (2 * ((deriv + 1) // 2) - 1 + accuracy) // 2
    width_edge = deriv + accuracy
    plans = []
    for i in range(n):
        if i - half >= 0 and i + half < n:
            lo, hi = i - half, i + half
        elif i - half < 0:
            lo, hi = 0, max(width_edge, 2 * half + 1) - 1
        else:
            lo, hi = n - max(width_edge, 2 * half + 1), n - 1
        offsets = tuple(range(lo - i, hi - i + 1))
        plans.append((lo, hi, offsets))
    return plans, half


def _fd(values: np.ndarray, h: float, deriv: int, axis: int, accuracy: int) -> np.ndarray:
    v = np.moveaxis(np.asarray(values), axis, -1)
    n = v.shape[-1]
    plans, half = _stencils(n, deriv, accuracy)
    if n < len(plans[0][2]):
        raise GridError(f"need at least {len(plans[0][2])} points for this stencil, got {n}")
    out = np.empty(v.shape, dtype=np.result_type(v, float))
    # interior: one shared stencil
    w = _fornberg(tuple(range(-half, half + 1)), deriv)
    if n > 2 * half:
        acc = np.zeros(v.shape[:-1] + (n - 2 * half,), dtype=out.dtype)
        for k, wk in enumerate(w):
            acc += wk * v[..., k : n - 2 * half + k]
        out[..., half : n - half] = acc
    for i in list(range(min(half, n))) + list(range(max(n - half, half), n)):
        lo, hi, offsets = plans[i]
        wi = _fornberg(offsets, deriv)
        out[..., i] = v[..., lo : hi + 1] @ wi
    return np.moveaxis(out / h**deriv, -1, axis)


def fd_x(values, h: float, deriv: int = 1, accuracy: int = 4) -> np.ndarray:
    """Derivative along x (last axis) with one-sided stencils at the edges."""
    return _fd(values, h, deriv, -1, accuracy)


def fd_t(values, h: float, deriv: int = 1, accuracy: int = 4) -> np.ndarray:
    """Derivative along t (first axis)."""
    return _fd(values, h, deriv, 0, accuracy)
