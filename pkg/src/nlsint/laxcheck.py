"""Compatibility residuals of the reduced 2x2 Lax pair.

After the reduction only eight auxiliary functions remain free: f1, f7, g1,
g13, g6, g10, p1, p2. They may be complex; each is stored as a pair of real
expressions. The spectral parameter is available to expressions as the
parameter ``lambda``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .conditions import CoefficientSet
from .exprcore import Const, Expr, GridSpec, as_expr, parse, simplify
from .report import DEFAULT_TOL, ResidualReport
from .sampling import GridSampler

LAX_EQUATIONS = ("eq2", "eq8", "eq5", "eq3", "eq7", "eq4", "eq6", "eq1")

Pair = tuple[Expr, Expr]


def cpair(re=0.0, im=0.0) -> Pair:
    """Complex value as a (real, imaginary) expression pair."""
    conv = lambda v: parse(v) if isinstance(v, str) else as_expr(v)  # noqa: E731
    return conv(re), conv(im)


@dataclass(frozen=True)
class LaxFunctions:
    f1: Pair
    f7: Pair
    g1: Pair
    g13: Pair
    g6: Pair
    g10: Pair
    p1: Pair
    p2: Pair
    lam: float = 0.0

    @classmethod
    def names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls) if f.name != "lam")

    def replace(self, **changes) -> "LaxFunctions":
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data.update(changes)
        return LaxFunctions(**data)

    def perturbed(self, name: str, delta: complex) -> "LaxFunctions":
        """Copy with ``delta`` added to one entry."""
        re, im = getattr(self, name)
        d = complex(delta)
        return self.replace(**{name: (simplify(re + Const(d.real)), simplify(im + Const(d.imag)))})

    def derived(self, f: Expr) -> dict[str, Pair]:
        """Entries fixed by the reduction, for reference: f4 = i p1,
        f6 = -i p2, g7 = -f p1, g11 = -f p2, g4 = -g16 = -i f p1 p2."""
        (a, b), (c, d) = self.p1, self.p2
        pr, pi = simplify(a * c - b * d), simplify(a * d + b * c)
        return {
            "f4": (simplify(-b), a),
            "f6": (d, simplify(-c)),
            "g7": (simplify(-f * a), simplify(-f * b)),
            "g11": (simplify(-f * c), simplify(-f * d)),
            "g4": (simplify(f * pi), simplify(-f * pr)),
            "g16": (simplify(-f * pi), simplify(f * pr)),
        }

    def to_json(self) -> dict:
        out = {n: {"re": str(getattr(self, n)[0]), "im": str(getattr(self, n)[1])} for n in self.names()}
        out["lambda"] = self.lam
        return out

    @classmethod
    def from_json(cls, d: dict) -> "LaxFunctions":
        kw = {}
        for n in cls.names():
            entry = d.get(n, {"re": "0", "im": "0"})
            kw[n] = cpair(str(entry.get("re", "0")), str(entry.get("im", "0")))
        return cls(**kw, lam=float(d.get("lambda", 0.0)))


def load_laxfunctions(path: str | Path) -> LaxFunctions:
    return LaxFunctions.from_json(json.loads(Path(path).read_text()))


class _ComplexSampler:
    def __init__(self, s: GridSampler):
        self.s = s

    def __call__(self, pair: Pair, var: str | None = None, order: int = 0) -> np.ndarray:
        re, im = pair
        return self.s(re, var, order) + 1j * self.s(im, var, order)


def _lax_terms(L: LaxFunctions, c: CoefficientSet, s: GridSampler) -> dict[str, list[np.ndarray]]:
    z = _ComplexSampler(s)
    f, f_x, g, v, gam = s(c.f), s(c.f, "x", 1), s(c.g), s(c.v), s(c.gamma)
    f1, f7, g1, g13 = z(L.f1), z(L.f7), z(L.g1), z(L.g13)
    g6, g10, p1, p2 = z(L.g6), z(L.g10), z(L.p1), z(L.p2)
    d = f1 - f7
    fp = f * p1 * p2
    fp_x = f_x * p1 * p2 + f * (z(L.p1, "x", 1) * p2 + p1 * z(L.p2, "x", 1))
    return {
        "eq2": [z(L.f1, "t", 1), -z(L.g1, "x", 1)],
        "eq8": [z(L.f7, "t", 1), -z(L.g13, "x", 1)],
        "eq5": [2.0 * fp, g],
        "eq3": [f_x * p1, -f * p1 * d, f * z(L.p1, "x", 1), -g6],
        "eq7": [f_x * p2, f * p2 * d, f * z(L.p2, "x", 1), -g10],
        "eq4": [g6 * d, -1j * p1 * (g1 - g13 - 1j * v + gam), -z(L.g6, "x", 1), 1j * z(L.p1, "t", 1)],
        "eq6": [g10 * d, 1j * p2 * (g1 - g13 - 1j * v - gam), z(L.g10, "x", 1), 1j * z(L.p2, "t", 1)],
        "eq1": [fp_x, g10 * p1, g6 * p2],
    }


def _sampler(L: LaxFunctions, c: CoefficientSet, grid: GridSpec) -> GridSampler:
    return GridSampler(grid, {**c.params, "lambda": L.lam})


def compat_residuals(L: LaxFunctions, c: CoefficientSet, grid: GridSpec,
                     tol: float = DEFAULT_TOL) -> list[ResidualReport]:
    """One report per compatibility equation, in the order of LAX_EQUATIONS.
    Complex residuals are measured by their modulus."""
    s = _sampler(L, c, grid)
    terms = _lax_terms(L, c, s)
    coords = s.coords()
    return [ResidualReport.from_terms(k, grid, sum(terms[k]), terms[k], tol, coords) for k in LAX_EQUATIONS]


def eq1000_residual(L: LaxFunctions, c: CoefficientSet, grid: GridSpec, tol: float = DEFAULT_TOL) -> ResidualReport:
    """-g_x/2 + g10 p1 + g6 p2, which equals eq1 - d/dx(eq5)/2."""
    s = _sampler(L, c, grid)
    z = _ComplexSampler(s)
    terms = [-0.5 * s(c.g, "x", 1), z(L.g10) * z(L.p1), z(L.g6) * z(L.p2)]
    return ResidualReport.from_terms("eq1000", grid, sum(terms), terms, tol, s.coords())


def akns_case1(lam: float) -> LaxFunctions:
    """Constant AKNS pair for f = g = 1, gamma = v = 0.

    p1 p2 = -1/2 from eq5; f1 - f7 = 2 i lambda; eq3 and eq7 then give
    g6 and g10, and eq4/eq6 force g1 - g13 = -4 i lambda^2.
    """
    return LaxFunctions(
        f1=cpair(0, "lambda"),
        f7=cpair(0, "-lambda"),
        g1=cpair(0, "-2*lambda^2"),
        g13=cpair(0, "2*lambda^2"),
        g6=cpair(0, "-2*lambda"),
        g10=cpair(0, "-lambda"),
        p1=cpair(1.0),
        p2=cpair(-0.5),
        lam=float(lam),
    )


__all__ = [
    "LAX_EQUATIONS", "LaxFunctions", "akns_case1", "compat_residuals", "cpair", "eq1000_residual",
    "load_laxfunctions",
]
