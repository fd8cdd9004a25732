"""Uniform space-time grids and sampled fields on them."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Uniform rectangle ``[x_min, x_max] x [t_min, t_max]``.

    ``singular_x`` / ``singular_t`` list coordinates where the scenario's
    coefficients blow up; a grid that covers one of them is rejected.
    """

    x_min: float
    x_max: float
    n_x: int
    t_min: float = 0.0
    t_max: float = 0.0
    n_t: int = 1
    singular_x: tuple[float, ...] = field(default=(), compare=False)
    singular_t: tuple[float, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "n_x", int(self.n_x))
        object.__setattr__(self, "n_t", int(self.n_t))
        for name in ("x_min", "x_max", "t_min", "t_max"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise GridError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "singular_x", tuple(float(s) for s in self.singular_x))
        object.__setattr__(self, "singular_t", tuple(float(s) for s in self.singular_t))
        if self.n_x < 3:
            raise GridError(f"n_x must be >= 3, got {self.n_x}")
        if self.n_t < 1:
            raise GridError(f"n_t must be >= 1, got {self.n_t}")
        if not self.x_min < self.x_max:
            raise GridError("x_min must be < x_max")
        if self.t_min > self.t_max:
            raise GridError("t_min must be <= t_max")
        if self.n_t == 1 and self.t_min != self.t_max:
            raise GridError("a single time level needs t_min == t_max")
        if self.n_t > 1 and self.t_min == self.t_max:
            raise GridError("several time levels need t_min < t_max")
        for s in self.singular_x:
            if self.x_min <= s <= self.x_max:
                raise GridError(f"grid [{self.x_min}, {self.x_max}] contains singular point x={s}")
        for s in self.singular_t:
            if self.t_min <= s <= self.t_max:
                raise GridError(f"grid [{self.t_min}, {self.t_max}] contains singular time t={s}")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_x)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.n_t)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_x - 1)

    @property
    def dt(self) -> float:
        return 0.0 if self.n_t == 1 else (self.t_max - self.t_min) / (self.n_t - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_t, self.n_x)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """``(X, T)`` arrays of shape ``(n_t, n_x)``; rows are time slices."""
        return np.meshgrid(self.x, self.t)

    def replace(self, **changes) -> "GridSpec":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "x_min": self.x_min,
            "x_max": self.x_max,
            "n_x": self.n_x,
            "t_min": self.t_min,
            "t_max": self.t_max,
            "n_t": self.n_t,
            **({"singular_x": list(self.singular_x)} if self.singular_x else {}),
            **({"singular_t": list(self.singular_t)} if self.singular_t else {}),
        }

    @classmethod
    def from_dict(cls, d: dict, **extra) -> "GridSpec":
        keys = ("x_min", "x_max", "n_x", "t_min", "t_max", "n_t", "singular_x", "singular_t")
        missing = [k for k in keys[:3] if k not in d]
        if missing:
            raise GridError(f"grid is missing {', '.join(missing)}")
        return cls(**{k: d[k] for k in keys if k in d}, **extra)


@dataclass(frozen=True, eq=False)
class RealField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=self._dtype)
        if vals.size != self.grid.n_x * self.grid.n_t:
            raise GridError(f"expected {self.grid.n_x * self.grid.n_t} samples, got {vals.size}")
        vals = vals.reshape(self.grid.shape)
        if not np.all(np.isfinite(vals)):
            raise GridError("field samples must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    _dtype = float

    def row(self, j: int) -> np.ndarray:
        return self.values[j]


@dataclass(frozen=True, eq=False)
class ComplexField(RealField):
    _dtype = complex

    @property
    def abs(self) -> np.ndarray:
        return np.abs(self.values)
