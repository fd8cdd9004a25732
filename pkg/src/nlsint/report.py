"""Residual reports shared by every checker."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exprcore import GridSpec

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class ResidualReport:
    """Summary of a pointwise residual on a grid.

    ``passed`` holds iff ``max_abs <= tolerance * max(1, normalization)``,
    where ``normalization`` is the largest magnitude of any single term that
    entered the residual. ``values`` keeps the pointwise residual itself.
    """

    condition: str
    grid: GridSpec | None
    max_abs: float
    rms: float
    normalization: float
    tolerance: float
    passed: bool
    worst: dict = field(default_factory=dict)
    values: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def max_rel(self) -> float:
        return self.max_abs / max(1.0, self.normalization)

    @classmethod
    def from_terms(cls, condition, grid, residual, terms=(), tol=DEFAULT_TOL, coords=None):
        r = np.abs(np.asarray(residual))
        if r.size == 0:
            raise ValueError("empty residual")
        norm = 0.0
        for term in terms:
            norm = max(norm, float(np.max(np.abs(term))))
        max_abs = float(np.max(r))
        rms = float(np.sqrt(np.mean(r**2)))
        worst = {}
        if coords is not None:
            idx = np.unravel_index(int(np.argmax(r)), r.shape)
            for name, arr in coords.items():
                worst[name] = float(np.broadcast_to(arr, r.shape)[idx])
        passed = bool(np.isfinite(max_abs) and max_abs <= tol * max(1.0, norm))
        return cls(condition, grid, max_abs, rms, norm, float(tol), passed, worst, np.asarray(residual))

    def to_json(self) -> dict:
        out = {
            "condition": self.condition,
            "max_abs": self.max_abs,
            "rms": self.rms,
            "normalization": self.normalization,
            "max_rel": self.max_rel,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "grid": self.grid.to_dict() if self.grid is not None else None,
        }
        if self.worst:
            out["worst"] = self.worst
        return out
