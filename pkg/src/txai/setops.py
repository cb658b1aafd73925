"""Union/intersection and defuzzification of temporal type-2 fuzzy sets.

Everything works on sampled interval type-2 slices: one per time interval
and z-level, each a lower/upper membership pair on a grid of ``B`` points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, EmptySetError, InputError, OrderingError
from .temporal import TT2FS

DEFAULT_GRID = 201


@dataclass(frozen=True)
class IT2Slice:
    grid: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    zlevel: float = 1.0
    interval: int = 0

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise InputError("slice grid must be a non-empty 1-d array")
        if lower.shape != grid.shape or upper.shape != grid.shape:
            raise InputError("lower/upper must match the grid")
        if np.any(np.diff(grid) <= 0):
            raise InputError("slice grid must be strictly increasing")
        if np.any(lower < 0) or np.any(upper > 1) or np.any(lower > upper):
            raise InputError("slice must satisfy 0 <= lower <= upper <= 1")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def to_dict(self):
        return {
            "interval": self.interval,
            "z": self.zlevel,
            "grid": self.grid.tolist(),
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
        }


@dataclass(frozen=True)
class SlicedSet:
    """Sampled envelopes of a (possibly combined) set: arrays of shape (Q, I, B)."""

    grid: np.ndarray
    zlevels: tuple
    lower: np.ndarray
    upper: np.ndarray

    def slice(self, q: int, i: int) -> IT2Slice:
        return IT2Slice(self.grid, self.lower[q, i], self.upper[q, i], self.zlevels[i], q)

    @property
    def n_intervals(self) -> int:
        return self.lower.shape[0]


def default_grid(tset: TT2FS, n: int = DEFAULT_GRID) -> np.ndarray:
    lo, hi = tset.var.universe
    return np.linspace(lo, hi, n)


def _check_grid(tset: TT2FS, grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise InputError("empty grid")
    lo, hi = tset.var.universe
    if grid.min() < lo or grid.max() > hi:
        raise InputError(f"grid leaves the universe [{lo}, {hi}]")
    return grid


def slice_set(tset: TT2FS, q: int, i: int, grid=None) -> IT2Slice:
    """Time-interval slice ``q`` then z-slice ``i``, sampled on ``grid``."""
    grid = default_grid(tset) if grid is None else _check_grid(tset, grid)
    lower, upper = tset.envelope(q, i, grid)
    return IT2Slice(grid, lower, upper, tset.zlevels[i], q)


def sample(tset: TT2FS, grid=None) -> SlicedSet:
    grid = default_grid(tset) if grid is None else _check_grid(tset, grid)
    env = tset.envelopes(grid)
    return SlicedSet(grid, tset.zlevels, env[:, :, 0], env[:, :, 1])


def combine(a: TT2FS, b: TT2FS, op: str = "union", grid=None) -> SlicedSet:
    """Pointwise max (union) or min (intersection) of lower and upper envelopes."""
    if a.axis != b.axis:
        raise ConfigurationError("sets live on different time axes")
    if a.zlevels != b.zlevels:
        raise ConfigurationError("sets use different z-levels")
    if a.var.universe != b.var.universe:
        raise ConfigurationError("sets have different feature universes")
    if op == "union":
        fn = np.maximum
    elif op == "intersection":
        fn = np.minimum
    else:
        raise ConfigurationError(f"unknown set operation {op!r}")
    sa, sb = sample(a, grid), sample(b, grid)
    return SlicedSet(sa.grid, a.zlevels, fn(sa.lower, sb.lower), fn(sa.upper, sb.upper))


def _centroid(x, w) -> float:
    return float(np.dot(x, w) / np.sum(w))


def _km_endpoint(x, lower, upper, left: bool) -> float:
    """Original Karnik-Mendel iteration for one centroid endpoint."""
    theta = 0.5 * (lower + upper)
    y = _centroid(x, theta)
    k = -1
    for _ in range(x.size + 2):
        # switch point: x[k] <= y < x[k+1]
        k_new = int(np.searchsorted(x, y, side="right")) - 1
        if k_new == k:
            break
        k = k_new
        head = np.arange(x.size) <= k
        theta = np.where(head, upper, lower) if left else np.where(head, lower, upper)
        if not np.sum(theta) > 0:
            # all mass sits on x[k] == y with zero lower there; y is already optimal
            break
        y = _centroid(x, theta)
    return y


def km_type_reduce(s: IT2Slice) -> tuple[float, float]:
    """Left and right centroids ``(y_l, y_r)`` of a sampled IT2 set."""
    if not np.any(s.upper > 0):
        raise EmptySetError("upper membership is zero everywhere: no centroid")
    x, lo, up = s.grid, s.lower, s.upper
    yl = _km_endpoint(x, lo, up, left=True)
    yr = _km_endpoint(x, lo, up, left=False)
    # both endpoints are weighted means of the grid; keep them inside it
    yl = min(max(yl, x[0]), x[-1])
    yr = min(max(yr, x[0]), x[-1])
    return (yl, yr) if yl <= yr else (yr, yl)


def centroid_average(values, zlevels) -> float:
    """z-weighted mean ``sum(z_i * v_i) / sum(z_i)``."""
    values = np.asarray(values, dtype=float)
    z = np.asarray(zlevels, dtype=float)
    if values.shape[-1] != z.size:
        raise InputError("one value per z-level required")
    return np.tensordot(values, z, axes=([-1], [0])) / z.sum()


def centroid_average_pairs(pairs, zlevels) -> tuple[float, float]:
    pairs = np.asarray(pairs, dtype=float)
    return float(centroid_average(pairs[:, 0], zlevels)), float(centroid_average(pairs[:, 1], zlevels))


def nie_tan(y_l: float, y_r: float) -> float:
    """Crisp value of an interval: its midpoint."""
    if y_l > y_r:
        raise OrderingError(f"y_l={y_l} exceeds y_r={y_r}")
    return 0.5 * (y_l + y_r)


def type_reduce(obj, q: int, grid=None) -> list[tuple[float, float]]:
    sliced = obj if isinstance(obj, SlicedSet) else sample(obj, grid)
    return [km_type_reduce(sliced.slice(q, i)) for i in range(len(sliced.zlevels))]


def defuzzify_interval(obj, q: int, grid=None) -> float:
    """Crisp value for interval ``q`` of a TT2FS or a :class:`SlicedSet`.

    KM per z-level, z-weighted averaging of the left and right centroids,
    then the midpoint.
    """
    sliced = obj if isinstance(obj, SlicedSet) else sample(obj, grid)
    if not 0 <= q < sliced.n_intervals:
        raise InputError(f"interval index {q} out of range")
    pairs = type_reduce(sliced, q)
    y_l, y_r = centroid_average_pairs(pairs, sliced.zlevels)
    return nie_tan(min(y_l, y_r), max(y_l, y_r))


def defuzzify(obj, grid=None) -> list[float]:
    """One crisp value per time interval."""
    sliced = obj if isinstance(obj, SlicedSet) else sample(obj, grid)
    return [defuzzify_interval(sliced, q) for q in range(sliced.n_intervals)]
