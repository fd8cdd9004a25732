"""Time propagation and pointwise residuals for

    f Psi_xx + h Psi_x + g |Psi|^2 Psi + v Psi + i gamma Psi + i Psi_t = 0.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .exprcore import ComplexField, GridSpec, as_expr, evaluate
from .report import DEFAULT_TOL, ResidualReport
from .sampling import GridSampler
from .scenario import Scenario
from .similarity import MappedSolution

BOUNDARY_MODES = ("zero", "analytic")


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, iterations: int, delta: float, t: float):
        super().__init__(message)
        self.iterations = iterations
        self.delta = delta
        self.t = t


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    boundary: str = "zero"
    fp_tol: float = 1e-12
    max_iter: int = 50

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.boundary not in BOUNDARY_MODES:
            raise ValueError(f"boundary must be one of {BOUNDARY_MODES}, got {self.boundary!r}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


# ---------------------------------------------------------------------------
# Residual of a candidate solution
# ---------------------------------------------------------------------------

def _sample_candidate(psi, grid: GridSpec, params: dict):
    if isinstance(psi, MappedSolution):
        if psi.psi.grid != grid:
            raise ValueError("mapped solution lives on a different grid")
        return psi.psi.values, psi.psi_x, psi.psi_xx, psi.psi_t
    re, im = (as_expr(p) for p in psi)
    s = GridSampler(grid, params)
    z = lambda var=None, order=0: s(re, var, order) + 1j * s(im, var, order)  # noqa: E731
    return z(), z("x", 1), z("x", 2), z("t", 1)


def residual_of_candidate(scn: Scenario, psi, grid: GridSpec | None = None,
                          tol: float = DEFAULT_TOL) -> ResidualReport:
    """Pointwise PDE residual of ``psi``: an (re, im) expression pair
    differentiated exactly, or a :class:`MappedSolution` with its own
    derivative fields."""
    grid = grid or scn.grid
    c = scn.resolve(grid).coeffs
    s = GridSampler(grid, c.params)
    u, u_x, u_xx, u_t = _sample_candidate(psi, grid, c.params)
    terms = [
        s(c.f) * u_xx,
        s(c.g) * np.abs(u) ** 2 * u,
        s(c.v) * u,
        1j * s(c.gamma) * u,
        1j * u_t,
    ]
    if c.h is not None:
        terms.append(s(c.h) * u_x)
    return ResidualReport.from_terms("pde", grid, sum(terms), terms, tol, s.coords())


# ---------------------------------------------------------------------------
# Propagation
# ---------------------------------------------------------------------------

def reference_values(scn: Scenario, x, t: float) -> np.ndarray:
    """psi_ref of ``scn`` at the points ``x`` and the single time ``t``."""
    re, im = scn.psi_ref
    env = {"x": np.asarray(x, dtype=float), "t": float(t)}
    out = evaluate(re, env, scn.params) + 1j * evaluate(im, env, scn.params)
    return np.broadcast_to(out, np.shape(x))


def initial_state(scn: Scenario, grid: GridSpec | None = None) -> np.ndarray:
    """psi_ref at the first time level of ``grid``."""
    grid = grid or scn.grid
    if scn.psi_ref is None:
        raise ValueError(f"scenario {scn.name!r} has no reference solution")
    return np.array(reference_values(scn, grid.x, grid.t_min), dtype=complex)


def _coefficient_blocks(scn: Scenario, xgrid: GridSpec, t0: float, dt: float, n_steps: int, block: int = 64):
    """Yield coefficient rows (f, h, v, gamma, g) at the half steps, built
    in blocks of uniformly spaced midpoint times."""
    for start in range(0, n_steps, block):
        count = min(block, n_steps - start)
        ta = t0 + (start + 0.5) * dt
        tb = t0 + (start + count - 0.5) * dt
        if count == 1:
            g_blk = GridSpec(xgrid.x_min, xgrid.x_max, xgrid.n_x, ta, ta, 1)
        else:
            lo, hi = min(ta, tb), max(ta, tb)
            g_blk = GridSpec(xgrid.x_min, xgrid.x_max, xgrid.n_x, lo, hi, count)
        c = scn.resolve(g_blk).coeffs
        s = GridSampler(g_blk, c.params)
        shape = g_blk.shape
        rows = [np.broadcast_to(s(e), shape) for e in (c.f, c.v, c.gamma, c.g)]
        h = np.zeros(shape) if c.h is None else np.broadcast_to(s(c.h), shape)
        f, v, gam, g = rows
        order = range(count) if tb >= ta else range(count - 1, -1, -1)
        for k in order:
            yield f[k], h[k], v[k], gam[k], g[k]


def propagate(scn: Scenario, psi0, cfg: SolverConfig, t_end: float, t_start: float | None = None,
              x_grid: GridSpec | None = None, save_every: int = 1, backend: str | None = None) -> ComplexField:
    """Crank-Nicolson from ``t_start`` (default: the scenario's t_min) to
    ``t_end``; ``t_end < t_start`` runs backwards in time.

    Returns every ``save_every``-th time level (always including both ends
    when the step count is a multiple of ``save_every``).
    """
    xg = x_grid or scn.grid
    if xg.n_x < 5:
        raise ValueError("propagation needs n_x >= 5")
    t0 = xg.t_min if t_start is None else float(t_start)
    span = float(t_end) - t0
    n_steps = int(round(abs(span) / cfg.dt))
    if n_steps < 1 or not math.isclose(n_steps * cfg.dt, abs(span), rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(f"time span {span} is not a positive multiple of dt={cfg.dt}")
    if n_steps % save_every:
        raise ValueError("save_every must divide the number of steps")
    if cfg.boundary == "analytic" and scn.psi_ref is None:
        raise ValueError("analytic boundaries need a reference solution")
    dt = math.copysign(cfg.dt, span)
    x = xg.x
    dx = xg.dx
    u = np.array(psi0.values if isinstance(psi0, ComplexField) else psi0, dtype=complex).reshape(-1)
    if u.size != xg.n_x:
        raise ValueError("initial state does not match the x grid")
    out = [u.copy()]
    coeffs = _coefficient_blocks(scn, xg, t0, dt, n_steps)
    for n in range(n_steps):
        t_new = t0 + (n + 1) * dt
        if cfg.boundary == "analytic":
            bl, br = reference_values(scn, np.array([x[0], x[-1]]), t_new)
        else:
            bl = br = 0.0
        f, h, v, gam, g = next(coeffs)
        u, iters, delta = _kernels.cn_step(u, f, h, v, gam, g, dx, dt, bl, br, cfg.fp_tol, cfg.max_iter,
                                           backend=backend)
        if iters < 0:
            raise ConvergenceError(
                f"fixed point did not converge at t={t_new:.17g} after {-iters} iterations "
                f"(last delta {delta:.3e})", -iters, delta, t_new)
        if (n + 1) % save_every == 0:
            out.append(u.copy())
    levels = len(out)
    lo, hi = sorted((t0, t0 + n_steps * dt))
    grid = GridSpec(xg.x_min, xg.x_max, xg.n_x, lo, hi, levels)
    arr = np.array(out if dt > 0 else out[::-1])
    return ComplexField(grid, arr)


def time_slice(field: ComplexField, t: float) -> np.ndarray:
    j = int(np.argmin(np.abs(field.grid.t - t)))
    return field.values[j]


# ---------------------------------------------------------------------------
# Convergence study
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceRow:
    n_x: int
    dx: float
    dt: float
    error: float
    order: float | None
    anomaly: bool


def convergence_study(scn: Scenario, cfg: SolverConfig, refinements: int, t_end: float,
                      base_nx: int | None = None, floor: float = 1e-10,
                      backend: str | None = None) -> list[ConvergenceRow]:
    """L-infinity error against the reference solution at ``t_end`` while
    halving dx and dt together. ``order`` is log2 of the error ratio.

    A row is flagged when the error grows under refinement, or when the
    previous error was already at ``floor`` and the error then moves by a
    factor of 3 or more.
    """
    if refinements < 2:
        raise ValueError("a convergence study needs at least 2 refinements")
    if scn.psi_ref is None:
        raise ValueError("convergence study needs a reference solution")
    g0 = scn.grid
    n_x = base_nx or g0.n_x
    rows: list[ConvergenceRow] = []
    dt = cfg.dt
    for _ in range(refinements):
        xg = GridSpec(g0.x_min, g0.x_max, n_x, g0.t_min, g0.t_max, g0.n_t)
        run_cfg = dataclasses.replace(cfg, dt=dt)
        fld = propagate(scn, initial_state(scn, xg), run_cfg, t_end, x_grid=xg,
                        save_every=int(round(abs(t_end - g0.t_min) / dt)), backend=backend)
        err = float(np.max(np.abs(fld.values[-1] - reference_values(scn, xg.x, t_end))))
        order = anomaly = None
        if rows:
            prev = rows[-1].error
            order = math.log2(prev / err) if err > 0 and prev > 0 else None
            ratio = prev / err if err > 0 else math.inf
            anomaly = err > prev or (prev <= floor and (ratio >= 3 or ratio <= 1 / 3))
        rows.append(ConvergenceRow(n_x, xg.dx, dt, err, order, bool(anomaly)))
        n_x = 2 * (n_x - 1) + 1
        dt /= 2
    return rows


def observed_order(rows: list[ConvergenceRow]) -> float:
    """Order between the last two rows."""
    return rows[-1].order


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def write_field_csv(field: ComplexField, path: str | Path, sidecar: dict | None = None) -> Path:
    """Row-major dump (time outer, x inner) with 17 significant digits, plus
    a JSON sidecar next to it."""
    path = Path(path)
    g = field.grid
    X, T = g.mesh()
    vals = field.values
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "t", "re", "im", "abs"])
        for xi, ti, z in zip(X.ravel(), T.ravel(), vals.ravel()):
            w.writerow([f"{xi:.17g}", f"{ti:.17g}", f"{z.real:.17g}", f"{z.imag:.17g}", f"{abs(z):.17g}"])
    meta = {"grid": g.to_dict(), **(sidecar or {})}
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def write_convergence_csv(rows: list[ConvergenceRow], path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n_x", "dx", "dt", "error", "order", "anomaly"])
        for r in rows:
            w.writerow([r.n_x, f"{r.dx:.17g}", f"{r.dt:.17g}", f"{r.error:.17g}",
                        "" if r.order is None else f"{r.order:.17g}", int(r.anomaly)])
    return path


def mass(values: np.ndarray, dx: float) -> np.ndarray:
    """Discrete L2 norm squared per time level (trapezoid)."""
    a = np.abs(np.atleast_2d(values)) ** 2
    return dx * (a.sum(axis=-1) - 0.5 * (a[..., 0] + a[..., -1]))


__all__ = [
    "BOUNDARY_MODES", "ConvergenceError", "ConvergenceRow", "SolverConfig", "convergence_study", "initial_state",
    "mass", "observed_order", "propagate", "reference_values", "residual_of_candidate", "time_slice", "write_convergence_csv",
    "write_field_csv",
]
