"""Command-line front end.

Exit status: 0 when every check passes, 1 when a condition or accuracy
check fails, 2 on usage or validation errors. Every command writes
``report.json`` into ``--out``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .conditions import PreconditionError
from .constructor import FreeFunctions
from .exprcore import DiffError, DomainError, Expr, GridError, GridSpec, ParseError, RealField, evaluate, parse
from .laxcheck import akns_case1, compat_residuals, eq1000_residual, load_laxfunctions
from .report import DEFAULT_TOL, ResidualReport
from .sampling import GridSampler
from .scenario import (
    AUTO,
    Scenario,
    ScenarioError,
    catalog,
    catalog_description,
    catalog_names,
    check_scenario,
    load_scenario,
    save_scenario,
)
from .similarity import GaugeSpec, check_homogeneous, compute_X, consistency_reports, map_solution, transform
from .simulator import (
    ConvergenceError,
    SolverConfig,
    initial_state,
    mass,
    propagate,
    reference_values,
    residual_of_candidate,
    write_field_csv,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
USAGE_ERRORS = (ScenarioError, ParseError, GridError, PreconditionError, DomainError, DiffError,
                ValueError, KeyError, FileNotFoundError, json.JSONDecodeError)

NAMED_Q = {
    "sn": "-sn(X/sqrt(2), -1)",
    "zero": "0",
}


@dataclass
class RunReport:
    command: str
    scenario: str | None = None
    reports: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    error: str | None = None
    wall_time: float = 0.0
    exit_status: int = EXIT_OK

    def finish(self) -> int:
        if self.error is not None:
            self.exit_status = EXIT_USAGE
        elif not all(r["pass"] for r in self.reports):
            self.exit_status = EXIT_FAIL
        else:
            self.exit_status = EXIT_OK
        return self.exit_status

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "scenario": self.scenario,
            "reports": self.reports,
            "artifacts": self.artifacts,
            "metrics": self.metrics,
            "error": self.error,
            "wall_time": self.wall_time,
            "exit_status": self.exit_status,
        }


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------

def _params(items) -> dict:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise ValueError(f"--param expects name=value, got {item!r}")
        out[name.strip()] = float(value)
    return out


def _coef_overrides(items) -> dict:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"--coef expects name=EXPR, got {item!r}")
        out[name.strip()] = value.strip()
    return out


def _grid(spec: str | None) -> GridSpec | None:
    """``x_min,x_max,n_x[,t_min,t_max,n_t]``."""
    if spec is None:
        return None
    parts = [p.strip() for p in spec.split(",")]
    if len(parts) not in (3, 6):
        raise ValueError(f"--grid expects 3 or 6 comma-separated values, got {spec!r}")
    x_min, x_max, n_x = float(parts[0]), float(parts[1]), int(parts[2])
    if len(parts) == 3:
        return GridSpec(x_min, x_max, n_x)
    return GridSpec(x_min, x_max, n_x, float(parts[3]), float(parts[4]), int(parts[5]))


def _tolerance(arg: float | None) -> float:
    if arg is not None:
        return arg
    env = os.environ.get("NLS_TOL")
    return float(env) if env else DEFAULT_TOL


def _scenario(ref: str, params: dict) -> Scenario:
    """A scenario file path or a catalog name."""
    if Path(ref).is_file():
        scn = load_scenario(ref)
        return scn.with_params(**params) if params else scn
    if ref in catalog_names():
        return catalog(ref, **params)
    raise ScenarioError(f"{ref!r} is neither a scenario file nor a catalog name")


def _apply_common(scn: Scenario, args) -> Scenario:
    coefs = _coef_overrides(getattr(args, "coef", None))
    if coefs:
        scn = scn.with_coefficients(**coefs)
    grid = _grid(getattr(args, "grid", None))
    if grid is not None:
        scn = scn.with_grid(grid)
    return scn


def _json_reports(reports: list[ResidualReport]) -> list[dict]:
    return [r.to_json() for r in reports]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _check_one(job) -> tuple[str, list[dict]]:
    ref, params, coefs, grid_spec, tol = job
    scn = _scenario(ref, params)
    if coefs:
        scn = scn.with_coefficients(**coefs)
    grid = _grid(grid_spec)
    if grid is not None:
        scn = scn.with_grid(grid)
    return scn.name, _json_reports(check_scenario(scn, tol=tol))


def cmd_check(args, rr: RunReport, out: Path) -> None:
    tol = _tolerance(args.tol)
    params = _params(args.param)
    coefs = _coef_overrides(args.coef)
    refs = list(args.scenario or []) + list(args.catalog or [])
    if "all" in refs:
        refs = [r for r in refs if r != "all"] + catalog_names()
    if not refs:
        raise ValueError("check needs --scenario or --catalog")
    jobs = [(r, params, coefs, args.grid, tol) for r in refs]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_check_one, jobs))
    else:
        results = [_check_one(j) for j in jobs]
    rr.scenario = ",".join(name for name, _ in results)
    for name, reports in results:
        for r in reports:
            r["scenario"] = name
            rr.reports.append(r)


def cmd_construct(args, rr: RunReport, out: Path) -> None:
    tol = _tolerance(args.tol)
    params = _params(args.param)
    grid = _grid(args.grid) or GridSpec(-5.0, 5.0, 401, 0.0, 1.0, 101)
    free = FreeFunctions.from_strings(c1=args.c1, c2=args.c2, c3=args.c3, c4=args.c4)
    g = parse(args.g)
    if np.any(GridSampler(grid, params)(g) == 0):
        raise PreconditionError("g vanishes on the grid")
    scn = Scenario(args.name, {"g": g, "f": AUTO, "gamma": AUTO, "v": AUTO}, free, grid, params)
    res = scn.resolve()
    c = res.coeffs
    rr.scenario = scn.name
    closed = {"f": str(c.f), "gamma": str(c.gamma)}
    if isinstance(c.v, RealField):
        v_path = out / "v.csv"
        _write_real_csv(c.v, v_path, "v")
        rr.artifacts.append(v_path.name)
    else:
        closed["v"] = str(c.v)
    done = scn.with_coefficients(f=c.f, gamma=c.gamma, v=AUTO if isinstance(c.v, RealField) else c.v)
    scn_path = out / "scenario.json"
    save_scenario(done, scn_path)
    rr.artifacts.insert(0, scn_path.name)
    rr.metrics["closed_forms"] = closed
    rr.metrics["v_kind"] = res.v_kind
    reports = check_scenario(scn, tol=tol)
    rr.reports.extend(_json_reports(reports))
    if not all(r.passed for r in reports):
        print("self-check failed: the quadrature is probably too coarse; increase n_x", file=sys.stderr)


def _write_real_csv(fld: RealField, path: Path, name: str) -> None:
    X, T = fld.grid.mesh()
    with open(path, "w") as fh:
        fh.write(f"x,t,{name}\n")
        for xi, ti, vi in zip(X.ravel(), T.ravel(), fld.values.ravel()):
            fh.write(f"{xi:.17g},{ti:.17g},{vi:.17g}\n")


def _gauge_source(ref: str, params: dict) -> tuple[str, GaugeSpec, GridSpec, Expr | None, Scenario | None]:
    """Gauge, grid and optional closed-form f from a scenario (file or
    catalog name) or from a bare ``{gauge, grid, f?}`` file."""
    if Path(ref).is_file():
        data = json.loads(Path(ref).read_text())
        if "coefficients" not in data:
            f = parse(str(data["f"])) if data.get("f") else None
            grid = GridSpec.from_dict(data["grid"])
            return data.get("name", "gauge"), GaugeSpec.from_json(data["gauge"], params), grid, f, None
    scn = _scenario(ref, params)
    if scn.gauge is None:
        raise ScenarioError(f"{ref!r} carries no gauge")
    f = scn.coefficients.get("f")
    return scn.name, scn.gauge, scn.grid, f if isinstance(f, Expr) else None, scn


def cmd_map(args, rr: RunReport, out: Path) -> None:
    tol = _tolerance(args.tol)
    params = _params(args.param)
    name, gauge, grid, f_expr, scn = _gauge_source(args.gauge, params)
    grid = _grid(args.grid) or grid
    Q = parse(NAMED_Q.get(args.Q, args.Q), variables=("X",))
    rr.scenario = name
    mapped = map_solution(gauge, Q, grid, f=f_expr)
    if scn is None:
        tr = transform(gauge, grid, f_expr)
        coeffs = {"f": f_expr if f_expr is not None else tr.f, "g": tr.g, "gamma": gauge.gamma, "v": tr.v}
        target = Scenario(name, coeffs, grid=grid, params=params)
    else:
        target = scn.with_grid(grid)
    X = compute_X(gauge, grid).values
    reports = [residual_of_candidate(target, mapped, grid, tol)]
    reports.append(check_homogeneous(Q, gauge.epsilon, gauge.delta, (float(X.min()), float(X.max())),
                                     params=params, tol=tol))
    res = target.resolve(grid).coeffs
    reports.extend(consistency_reports(gauge, grid, f=f_expr, g=res.g, v=res.v, tol=tol))
    rr.reports.extend(_json_reports(reports))
    path = write_field_csv(mapped.psi, out / "psi.csv", {"gauge": gauge.to_json(), "Q": str(Q)})
    rr.artifacts.extend([path.name, path.with_suffix(".json").name])


def cmd_lax(args, rr: RunReport, out: Path) -> None:
    tol = _tolerance(args.tol)
    scn = _apply_common(_scenario(args.scenario, _params(args.param)), args)
    if args.laxfns is not None:
        L = load_laxfunctions(args.laxfns)
    else:
        L = akns_case1(args.akns)
    rr.scenario = scn.name
    c = scn.resolve().coeffs
    reports = compat_residuals(L, c, scn.grid, tol)
    rr.reports.extend(_json_reports(reports))
    rr.metrics["eq1000"] = eq1000_residual(L, c, scn.grid, tol).to_json()


def cmd_simulate(args, rr: RunReport, out: Path) -> None:
    scn = _apply_common(_scenario(args.scenario, _params(args.param)), args)
    rr.scenario = scn.name
    cfg = SolverConfig(args.dt, args.boundary, args.fp_tol, args.max_iter)
    grid = scn.grid
    t_end = grid.t_min + args.T
    n_steps = int(round(args.T / args.dt))
    save_every = args.save_every or max(1, n_steps // 100)
    while n_steps % save_every:
        save_every -= 1
    if args.initial is not None:
        re = parse(args.initial)
        psi0 = np.broadcast_to(evaluate(re, {"x": grid.x, "t": grid.t_min}, scn.params), grid.x.shape)
    else:
        psi0 = initial_state(scn)
    fld = propagate(scn, psi0, cfg, t_end, save_every=save_every)
    m = mass(fld.values, fld.grid.dx)
    rr.metrics["norm_drift"] = float(abs(np.sqrt(m[-1]) - np.sqrt(m[0])) / np.sqrt(m[0]))
    rr.metrics["steps"] = n_steps
    if scn.psi_ref is not None and args.initial is None:
        ref = np.array([reference_values(scn, fld.grid.x, t) for t in fld.grid.t])
        err = np.abs(fld.values - ref)
        linf = float(err.max())
        rr.metrics["linf_error"] = linf
        rr.reports.append({
            "condition": "linf_error", "max_abs": linf, "rms": float(np.sqrt(np.mean(err**2))),
            "tolerance": args.accuracy, "pass": bool(linf <= args.accuracy), "grid": fld.grid.to_dict(),
        })
    path = write_field_csv(fld, out / "psi.csv", {"config": cfg.to_json(), "scenario": scn.name})
    rr.artifacts.extend([path.name, path.with_suffix(".json").name])


def cmd_catalog(args, rr: RunReport, out: Path) -> None:
    if args.list or args.name is None:
        entries = [{"name": n, "description": catalog_description(n)} for n in catalog_names()]
        rr.metrics["entries"] = entries
        for e in entries:
            print(f"{e['name']:10s} {e['description']}")
        return
    scn = catalog(args.name, **_params(args.param))
    rr.scenario = scn.name
    path = out / f"{scn.name}.json"
    save_scenario(scn, path)
    rr.artifacts.append(path.name)
    print(path.read_text(), end="")


# ---------------------------------------------------------------------------
# Parser and entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nlsint", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario=True):
        sp.add_argument("--out", default=".", help="output directory (default: current)")
        sp.add_argument("--param", action="append", metavar="NAME=VALUE", help="override a scenario parameter")
        sp.add_argument("--tol", type=float, default=None, help="relative tolerance (env NLS_TOL)")
        sp.add_argument("--grid", default=None, metavar="XMIN,XMAX,NX[,TMIN,TMAX,NT]")
        if scenario:
            sp.add_argument("--coef", action="append", metavar="NAME=EXPR", help="override a coefficient")

    sp = sub.add_parser("check", help="evaluate the integrability conditions of scenarios")
    sp.add_argument("--scenario", action="append", metavar="FILE|NAME")
    sp.add_argument("--catalog", action="append", metavar="NAME")
    sp.add_argument("--jobs", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("construct", help="build f, gamma and v from g and free functions")
    sp.add_argument("--g", required=True)
    sp.add_argument("--c1", default="1")
    sp.add_argument("--c2", default="1")
    sp.add_argument("--c3", default="0")
    sp.add_argument("--c4", default="0")
    sp.add_argument("--name", default="constructed")
    common(sp, scenario=False)
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("map", help="map a homogeneous solution Q(X) through a gauge")
    sp.add_argument("--gauge", required=True, metavar="FILE|NAME")
    sp.add_argument("--Q", default="sn", help="expression in X or one of: " + ", ".join(NAMED_Q))
    common(sp, scenario=False)
    sp.set_defaults(func=cmd_map)

    sp = sub.add_parser("lax", help="Lax-pair compatibility residuals")
    sp.add_argument("--scenario", required=True, metavar="FILE|NAME")
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--laxfns", metavar="FILE")
    group.add_argument("--akns", type=float, default=1.0, metavar="LAMBDA")
    common(sp)
    sp.set_defaults(func=cmd_lax)

    sp = sub.add_parser("simulate", help="Crank-Nicolson propagation")
    sp.add_argument("--scenario", required=True, metavar="FILE|NAME")
    sp.add_argument("--dt", type=float, required=True)
    sp.add_argument("--T", type=float, required=True, help="duration")
    sp.add_argument("--boundary", choices=("zero", "analytic"), default="zero")
    sp.add_argument("--initial", default=None, help="real initial profile in x (default: reference solution)")
    sp.add_argument("--accuracy", type=float, default=1e-3, help="L-infinity bound against the reference")
    sp.add_argument("--save-every", type=int, default=None)
    sp.add_argument("--fp-tol", type=float, default=1e-12)
    sp.add_argument("--max-iter", type=int, default=50)
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("catalog", help="list or export built-in scenarios")
    sp.add_argument("name", nargs="?")
    sp.add_argument("--list", action="store_true")
    sp.add_argument("--out", default=".")
    sp.add_argument("--param", action="append", metavar="NAME=VALUE")
    sp.set_defaults(func=cmd_catalog)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    rr = RunReport(args.command)
    start = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
        args.func(args, rr, out)
    except ConvergenceError as exc:
        rr.reports.append({"condition": "fixed_point", "pass": False, "iterations": exc.iterations,
                           "delta": exc.delta, "t": exc.t})
        print(f"error: {exc}", file=sys.stderr)
    except (*USAGE_ERRORS, OverflowError) as exc:
        rr.error = f"{type(exc).__name__}: {exc}"
        print(f"error: {rr.error}", file=sys.stderr)
    rr.wall_time = time.perf_counter() - start
    status = rr.finish()
    for r in rr.reports:
        tag = "PASS" if r["pass"] else "FAIL"
        label = f"{r.get('scenario', rr.scenario)}:{r['condition']}"
        print(f"{tag} {label} max_abs={r.get('max_abs', float('nan')):.3e}")
    try:
        (out / "report.json").write_text(json.dumps(rr.to_json(), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return status


if __name__ == "__main__":
    sys.exit(main())
