"""Integrability conditions, exact solutions and propagation for nonlinear
Schroedinger equations with space- and time-dependent coefficients."""
from .conditions import (
    CoefficientSet,
    PreconditionError,
    check_all,
    compute_H,
    residual_fg,
    residual_gamma,
    residual_painleve,
    residual_v,
    residual_v_hd,
)
from .constructor import FreeFunctions, build_f, build_gamma, build_v, build_v_timeonly
from .exprcore import ComplexField, GridSpec, RealField, diff, evaluate, parse, simplify
from .laxcheck import LaxFunctions, akns_case1, compat_residuals
from .report import ResidualReport
from .scenario import Scenario, catalog, catalog_names, check_scenario, load_scenario, save_scenario
from .similarity import GaugeSpec, check_homogeneous, compute_f, compute_g, compute_theta, compute_v, compute_X, map_solution
from .simulator import SolverConfig, convergence_study, propagate, residual_of_candidate

__version__ = "0.1.0"

__all__ = [
    "CoefficientSet", "ComplexField", "FreeFunctions", "GaugeSpec", "GridSpec", "LaxFunctions",
    "PreconditionError", "RealField", "ResidualReport", "Scenario", "SolverConfig", "akns_case1",
    "build_f", "build_gamma", "build_v", "build_v_timeonly", "catalog", "catalog_names", "check_all",
    "check_homogeneous", "check_scenario", "compat_residuals", "compute_H", "compute_X", "compute_f",
    "compute_g", "compute_theta", "compute_v", "convergence_study", "diff", "evaluate", "load_scenario",
    "map_solution", "parse", "propagate", "residual_fg", "residual_gamma", "residual_of_candidate",
    "residual_painleve", "residual_v", "residual_v_hd", "save_scenario", "simplify",
]
