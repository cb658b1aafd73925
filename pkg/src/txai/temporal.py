"""Temporal fuzzification.

Conditional relative frequency of a conceptual label over discrete time
points, its periodic interpolation, the fuzzy relations that credit a primary
membership with that frequency, and the per-interval, per-z-level envelopes
(time-slice then z-slice) that make up a temporal type-2 fuzzy set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ConfigurationError, DomainError, InputError
from .fuzzy import LinguisticVariable, argmax_cols

RELATIONS = ("godel", "lukasiewicz", "gaines_rescher", "mamdani_min", "mamdani_product")
MAMDANI = ("mamdani_min", "mamdani_product")
DEFAULT_RELATION = "mamdani_product"
DEFAULT_ZLEVELS = (0.2, 0.4, 0.6, 0.8, 1.0)
INTERPOLATIONS = ("linear", "monotone_cubic")


def normalize_relation(name: str) -> str:
    key = name.strip().lower().replace("-", "_")
    if key not in RELATIONS:
        raise ConfigurationError(f"unknown fuzzy relation {name!r}; expected one of {RELATIONS}")
    return key


# ---------------------------------------------------------------------------
# Time axis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeAxis:
    """Discrete time points grouped into named, contiguous intervals.

    ``positions`` are numeric coordinates of the points on a cyclic time line
    of length ``period``.  Interval membership is given by point indices;
    an interval may wrap from the last point to the first.
    """

    positions: tuple
    intervals: tuple  # ((name, (point indices...)), ...)
    period: float = None
    labels: tuple = None

    def __post_init__(self):
        pos = tuple(float(p) for p in self.positions)
        n = len(pos)
        if n < 1:
            raise ConfigurationError("time axis needs at least one point")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ConfigurationError("time points must be strictly increasing")
        period = self.period
        if period is None:
            period = (pos[-1] - pos[0]) * n / (n - 1) if n > 1 else 1.0
        period = float(period)
        if period <= pos[-1] - pos[0]:
            raise ConfigurationError("period must exceed the span of the time points")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "period", period)
        labels = tuple(self.labels) if self.labels is not None else tuple(str(p) for p in self.positions)
        if len(labels) != n:
            raise ConfigurationError("one label per time point")
        object.__setattr__(self, "labels", labels)

        intervals = tuple((str(name), tuple(int(i) for i in idx)) for name, idx in self.intervals)
        if not intervals:
            raise ConfigurationError("time axis needs at least one interval")
        seen = []
        for name, idx in intervals:
            if not idx:
                raise ConfigurationError(f"interval {name!r} has no time points")
            if not _cyclic_contiguous(idx, n):
                raise ConfigurationError(f"interval {name!r} is not contiguous")
            seen.extend(idx)
        if sorted(seen) != list(range(n)):
            raise ConfigurationError("intervals must partition the time points")
        names = [name for name, _ in intervals]
        if len(set(names)) != len(names):
            raise ConfigurationError("duplicate interval names")
        object.__setattr__(self, "intervals", intervals)
        lookup = np.empty(n, dtype=int)
        for q, (_, idx) in enumerate(intervals):
            lookup[list(idx)] = q
        object.__setattr__(self, "_point_interval", lookup)

    @classmethod
    def hours(cls, bounds=None):
        """24 hourly points with half-open ``[start, end)`` hour intervals.

        The default is Morning [0, 11), Daytime [11, 19), Evening [19, 24).
        """
        if bounds is None:
            bounds = {"Morning": (0, 11), "Daytime": (11, 19), "Evening": (19, 24)}
        intervals = []
        for name, (start, end) in bounds.items():
            hrs = range(start, end) if start < end else list(range(start, 24)) + list(range(0, end))
            intervals.append((name, tuple(hrs)))
        return cls(tuple(range(24)), tuple(intervals), 24.0, tuple(f"{h:02d}:00" for h in range(24)))

    @classmethod
    def single_interval(cls, positions, name="All", period=None, labels=None):
        idx = tuple(range(len(positions)))
        return cls(tuple(positions), ((name, idx),), period, labels)

    @property
    def n_points(self) -> int:
        return len(self.positions)

    @property
    def n_intervals(self) -> int:
        return len(self.intervals)

    @property
    def interval_names(self) -> list[str]:
        return [name for name, _ in self.intervals]

    def interval_of_point(self, n):
        return self._point_interval[n]

    def interval_index(self, name: str) -> int:
        try:
            return self.interval_names.index(name)
        except ValueError:
            raise ConfigurationError(f"no interval named {name!r}") from None

    def points_of(self, q: int) -> tuple:
        return self.intervals[q][1]

    def in_span(self, t: float) -> bool:
        return self.positions[0] <= t < self.positions[0] + self.period

    def to_dict(self):
        return {
            "positions": list(self.positions),
            "period": self.period,
            "labels": list(self.labels),
            "intervals": [{"name": name, "points": list(idx)} for name, idx in self.intervals],
        }

    @classmethod
    def from_dict(cls, d):
        intervals = tuple((iv["name"], tuple(iv["points"])) for iv in d["intervals"])
        return cls(tuple(d["positions"]), intervals, d.get("period"), tuple(d["labels"]) if d.get("labels") else None)


def _cyclic_contiguous(idx, n) -> bool:
    s = sorted(set(idx))
    if len(s) != len(idx):
        return False
    gaps = sum(1 for a, b in zip(s, s[1:] + [s[0] + n]) if b - a != 1)
    return gaps <= 1


# ---------------------------------------------------------------------------
# Conditional relative frequency and conditional distribution
# ---------------------------------------------------------------------------


def frequency_from_counts(counts) -> np.ndarray:
    """Normalise per-time-point counts by their mode (maximum)."""
    counts = np.asarray(counts, dtype=float)
    top = counts.max() if counts.size else 0.0
    if top <= 0:
        return np.zeros_like(counts)
    return counts / top


def argmax_counts(xs, points, var: LinguisticVariable, n_points: int) -> np.ndarray:
    """Counts of shape (J, N): how often each CoL is the argmax at each point."""
    xs = np.asarray(xs, dtype=float)
    points = np.asarray(points, dtype=int)
    winners = argmax_cols(var, xs) if xs.size else np.zeros(0, dtype=int)
    counts = np.zeros((len(var.cols), n_points))
    np.add.at(counts, (winners, points), 1.0)
    return counts


def conditional_relative_frequency(instances, var: LinguisticVariable, col, axis: TimeAxis) -> np.ndarray:
    """Mode-normalised frequency with which ``col`` is the argmax label per time point.

    ``instances`` is an iterable of ``(x, n)`` pairs with ``n`` a time point
    index.  A label that never wins yields all zeros.
    """
    j = var.index(col) if isinstance(col, str) else (var.cols.index(col) if not isinstance(col, int) else col)
    pairs = list(instances)
    if pairs:
        xs, pts = zip(*pairs)
    else:
        xs, pts = (), ()
    pts = np.asarray(pts, dtype=int)
    if pts.size and (pts.min() < 0 or pts.max() >= axis.n_points):
        raise InputError("time point index out of range")
    return frequency_from_counts(argmax_counts(xs, pts, var, axis.n_points)[j])


def interpolate(g, axis: TimeAxis, method: str = "linear"):
    """Periodic interpolant through ``(positions[n], g[n])`` clamped to [0, 1]."""
    g = np.asarray(g, dtype=float)
    if g.shape != (axis.n_points,):
        raise InputError(f"expected {axis.n_points} frequency values, got shape {g.shape}")
    if np.any((g < 0) | (g > 1)):
        raise InputError("frequency values must lie in [0, 1]")
    pos = np.asarray(axis.positions)
    t0, period = pos[0], axis.period

    if axis.n_points == 1:
        value = float(g[0])
        return lambda t: np.full(np.shape(t), value) if np.ndim(t) else value

    if method == "linear":
        def f(t):
            return np.clip(np.interp(t, pos, g, period=period), 0.0, 1.0)
    elif method == "monotone_cubic":
        pad = min(3, axis.n_points)
        xs = np.concatenate([pos[-pad:] - period, pos, pos[:pad] + period])
        ys = np.concatenate([g[-pad:], g, g[:pad]])
        spline = PchipInterpolator(xs, ys)

        def f(t):
            tt = t0 + np.mod(np.asarray(t, dtype=float) - t0, period)
            return np.clip(spline(tt), 0.0, 1.0)
    else:
        raise ConfigurationError(f"unknown interpolation method {method!r}")

    def wrapped(t):
        out = f(t)
        return float(out) if np.ndim(out) == 0 else out

    return wrapped


@dataclass(frozen=True)
class ConditionalDistribution:
    """Discrete frequencies ``g`` and their continuous interpolant ``f``."""

    col: str
    g: tuple
    axis: TimeAxis
    method: str = "linear"
    f: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        g = tuple(float(v) for v in self.g)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "f", interpolate(np.array(g), self.axis, self.method))

    @property
    def observed(self) -> bool:
        return any(v > 0 for v in self.g)

    def __call__(self, t):
        if not self.observed:
            return np.zeros(np.shape(t)) if np.ndim(t) else 0.0
        return self.f(t)

    def interval_values(self, q: int) -> np.ndarray:
        return np.array([self.g[n] for n in self.axis.points_of(q)])

    def interval_scalar(self, q: int, reduce: str = "mean") -> float:
        vals = self.interval_values(q)
        if reduce == "mean":
            return float(vals.mean())
        if reduce == "max":
            return float(vals.max())
        raise ConfigurationError(f"unknown reduction {reduce!r}")

    def to_dict(self):
        return {"col": self.col, "g": list(self.g), "method": self.method}


def conditional_distribution(instances, var, col, axis, method="linear") -> ConditionalDistribution:
    name = col if isinstance(col, str) else var.cols[col].name
    g = conditional_relative_frequency(instances, var, col, axis)
    return ConditionalDistribution(name, tuple(g), axis, method)


# ---------------------------------------------------------------------------
# Fuzzy relations
# ---------------------------------------------------------------------------


def relation_values(rel: str, mu_time, mu_feature):
    """Vectorised relation between a time-credit value and a feature membership."""
    t = np.asarray(mu_time, dtype=float)
    a = np.asarray(mu_feature, dtype=float)
    if rel == "mamdani_product":
        return t * a
    if rel == "mamdani_min":
        return np.minimum(t, a)
    if rel == "godel":
        return np.where(t <= a, 1.0, a)
    if rel == "gaines_rescher":
        return np.where(t <= a, 1.0, 0.0)
    if rel == "lukasiewicz":
        return np.minimum(1.0, 1.0 - t + a)
    raise ConfigurationError(f"unknown fuzzy relation {rel!r}")


def apply_relation(rel: str, mu_time: float, mu_feature: float) -> float:
    rel = normalize_relation(rel)
    for v in (mu_time, mu_feature):
        if not (isinstance(v, (int, float, np.floating)) and 0.0 <= v <= 1.0):
            raise InputError(f"relation inputs must lie in [0, 1], got {v!r}")
    return float(relation_values(rel, mu_time, mu_feature))


# ---------------------------------------------------------------------------
# Temporal type-2 fuzzy sets
# ---------------------------------------------------------------------------


def _check_zlevels(zlevels) -> tuple:
    z = tuple(float(v) for v in zlevels)
    if not z:
        raise ConfigurationError("need at least one z-level")
    if any(not (0.0 < v <= 1.0) for v in z) or any(b <= a for a, b in zip(z, z[1:])):
        raise ConfigurationError(f"z-levels must be strictly increasing in (0, 1]: {z}")
    return z


def zlevel_alphas(zlevels, shrink: float = 0.5) -> np.ndarray:
    """Quantile trims per z-level: 0 at the lowest level, ``shrink / 2`` at the top."""
    z = np.asarray(zlevels, dtype=float)
    if z.size == 1:
        return np.zeros(1)
    return 0.5 * shrink * (z - z[0]) / (z[-1] - z[0])


@dataclass(frozen=True)
class TT2FS:
    """A temporal type-2 fuzzy set in time-slice / z-slice form.

    ``freq_bounds[q, i]`` holds the two frequency quantiles for interval ``q``
    at z-level ``i``; the membership envelope at ``x`` is the relation
    applied to each bound and the primary membership, ordered low/high.
    """

    var: LinguisticVariable
    col: int
    axis: TimeAxis
    dist: ConditionalDistribution
    zlevels: tuple
    relation: str
    freq_bounds: np.ndarray = field(compare=False)
    shrink: float = 0.5

    @property
    def mf(self):
        return self.var.cols[self.col].mf

    @property
    def col_name(self) -> str:
        return self.var.cols[self.col].name

    @property
    def n_levels(self) -> int:
        return len(self.zlevels)

    def envelope(self, q: int, i: int, x):
        """(lower, upper) membership at ``x`` for interval ``q``, z-level index ``i``."""
        mu = self.mf(x)
        if not self.dist.observed:
            zero = np.zeros_like(mu)
            return zero, zero
        lo_f, hi_f = self.freq_bounds[q, i]
        a = relation_values(self.relation, lo_f, mu)
        b = relation_values(self.relation, hi_f, mu)
        return np.minimum(a, b), np.maximum(a, b)

    def envelopes(self, x) -> np.ndarray:
        """All envelopes at once: shape (Q, I, 2, *x.shape)."""
        mu = np.asarray(self.mf(x))
        if not self.dist.observed:
            return np.zeros((self.axis.n_intervals, self.n_levels, 2) + mu.shape)
        fb = self.freq_bounds.reshape(self.freq_bounds.shape + (1,) * mu.ndim)
        a = relation_values(self.relation, fb[:, :, 0], mu)
        b = relation_values(self.relation, fb[:, :, 1], mu)
        return np.stack([np.minimum(a, b), np.maximum(a, b)], axis=2)

    def to_dict(self):
        return {
            "variable": self.var.to_dict(),
            "col": self.col_name,
            "axis": self.axis.to_dict(),
            "distribution": self.dist.to_dict(),
            "zlevels": list(self.zlevels),
            "relation": self.relation,
            "shrink": self.shrink,
            "observed": self.dist.observed,
            "envelopes": [
                {
                    "interval": name,
                    "levels": [
                        {"z": z, "freq_lower": float(self.freq_bounds[q, i, 0]),
                         "freq_upper": float(self.freq_bounds[q, i, 1])}
                        for i, z in enumerate(self.zlevels)
                    ],
                }
                for q, name in enumerate(self.axis.interval_names)
            ],
        }

    @classmethod
    def from_dict(cls, d):
        var = LinguisticVariable.from_dict(d["variable"])
        axis = TimeAxis.from_dict(d["axis"])
        dd = d["distribution"]
        dist = ConditionalDistribution(dd["col"], tuple(dd["g"]), axis, dd.get("method", "linear"))
        fb = np.array(
            [[[lv["freq_lower"], lv["freq_upper"]] for lv in env["levels"]] for env in d["envelopes"]]
        )
        return cls(var, var.index(d["col"]), axis, dist, tuple(d["zlevels"]), d["relation"], fb, d["shrink"])

    def __eq__(self, other):
        if not isinstance(other, TT2FS):
            return NotImplemented
        return (
            self.var == other.var and self.col == other.col and self.axis == other.axis
            and self.dist == other.dist and self.zlevels == other.zlevels
            and self.relation == other.relation and self.shrink == other.shrink
            and np.array_equal(self.freq_bounds, other.freq_bounds)
        )

    __hash__ = None


def build_tt2fs(var, col, axis, dist, zlevels=DEFAULT_ZLEVELS, rel=DEFAULT_RELATION, shrink=0.5) -> TT2FS:
    """Construct the per-interval, per-z-level envelopes of a label.

    For interval ``q`` with frequencies ``F_q`` the z-level ``i`` bounds are
    the empirical ``alpha_i`` and ``1 - alpha_i`` quantiles of ``F_q``; the
    lowest level spans ``[min F_q, max F_q]`` and higher levels are nested
    inside it.
    """
    j = var.index(col) if isinstance(col, str) else int(col)
    if dist.axis != axis:
        raise ConfigurationError("conditional distribution was computed on a different time axis")
    if len(dist.g) != axis.n_points:
        raise ConfigurationError("conditional distribution length does not match the time axis")
    z = _check_zlevels(zlevels)
    rel = normalize_relation(rel)
    if not 0.0 <= shrink <= 1.0:
        raise ConfigurationError("shrink factor must lie in [0, 1]")
    alphas = zlevel_alphas(z, shrink)
    g = np.asarray(dist.g)
    bounds = np.empty((axis.n_intervals, len(z), 2))
    for q in range(axis.n_intervals):
        pts = axis.points_of(q)
        if not pts:
            raise ConfigurationError(f"interval {axis.intervals[q][0]!r} has no time points")
        fq = g[list(pts)]
        bounds[q, :, 0] = np.quantile(fq, alphas)
        bounds[q, :, 1] = np.quantile(fq, 1.0 - alphas)
    # float rounding in np.quantile must not break nesting across levels
    bounds[:, :, 0] = np.maximum.accumulate(bounds[:, :, 0], axis=1)
    bounds[:, :, 1] = np.minimum.accumulate(bounds[:, :, 1], axis=1)
    bounds[:, :, 1] = np.maximum(bounds[:, :, 1], bounds[:, :, 0])
    return TT2FS(var, j, axis, dist, z, rel, bounds, float(shrink))


def eval_tmf(tset: TT2FS, x: float, t: float, rel: str = None) -> float:
    """Temporal membership: relation between the frequency at ``t`` and the membership at ``x``."""
    x, t = float(x), float(t)
    if not (math.isfinite(x) and math.isfinite(t)):
        raise InputError("non-finite input")
    if not tset.var.contains(x):
        raise DomainError(f"x={x} outside universe {tset.var.universe}")
    if not tset.axis.in_span(t):
        raise DomainError(f"t={t} outside time span starting at {tset.axis.positions[0]}")
    rel = normalize_relation(rel or tset.relation)
    return float(relation_values(rel, tset.dist(t), tset.mf(x)))


def tmf_grid(tset: TT2FS, xs, ts, rel: str = None) -> np.ndarray:
    """TMF on the outer product grid, shape (len(ts), len(xs))."""
    rel = normalize_relation(rel or tset.relation)
    f = np.asarray(tset.dist(np.asarray(ts, dtype=float)), dtype=float)
    mu = tset.mf(np.asarray(xs, dtype=float))
    return relation_values(rel, f[:, None], mu[None, :])


# ---------------------------------------------------------------------------
# All sets of a problem
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TemporalFuzzySets:
    """Every label's TT2FS for a list of linguistic variables on one time axis."""

    variables: tuple
    axis: TimeAxis
    zlevels: tuple
    relation: str
    sets: tuple  # sets[v][j]

    @classmethod
    def fit(cls, X, points, variables, axis, zlevels=DEFAULT_ZLEVELS, relation=DEFAULT_RELATION,
            method="linear", shrink=0.5):
        """Compute conditional distributions from data and build all sets.

        ``X`` has one column per variable; ``points`` gives each row's time
        point index.
        """
        X = np.asarray(X, dtype=float)
        points = np.asarray(points, dtype=int)
        relation = normalize_relation(relation)
        zlevels = _check_zlevels(zlevels)
        sets = []
        for v, var in enumerate(variables):
            counts = argmax_counts(X[:, v], points, var, axis.n_points)
            row = []
            for j, col in enumerate(var.cols):
                dist = ConditionalDistribution(col.name, tuple(frequency_from_counts(counts[j])), axis, method)
                row.append(build_tt2fs(var, j, axis, dist, zlevels, relation, shrink))
            sets.append(tuple(row))
        return cls(tuple(variables), axis, zlevels, relation, tuple(sets))

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def var_names(self) -> list[str]:
        return [v.name for v in self.variables]

    def var_index(self, name: str) -> int:
        try:
            return self.var_names.index(name)
        except ValueError:
            raise ConfigurationError(f"unknown variable {name!r}") from None

    def degrees(self, X) -> np.ndarray:
        """Envelope values for every instance: shape (n, V, Jmax, Q, I, 2).

        Labels missing from a variable with fewer CoLs are left at zero.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n = X.shape[0]
        jmax = max(len(v.cols) for v in self.variables)
        out = np.zeros((n, self.n_vars, jmax, self.axis.n_intervals, len(self.zlevels), 2))
        for v, row in enumerate(self.sets):
            for j, s in enumerate(row):
                out[:, v, j] = np.moveaxis(s.envelopes(X[:, v]), -1, 0)
        return out

    def to_dict(self):
        return {
            "axis": self.axis.to_dict(),
            "zlevels": list(self.zlevels),
            "relation": self.relation,
            "sets": [[s.to_dict() for s in row] for row in self.sets],
        }

    @classmethod
    def from_dict(cls, d):
        sets = tuple(tuple(TT2FS.from_dict(s) for s in row) for row in d["sets"])
        variables = tuple(row[0].var for row in sets)
        return cls(variables, TimeAxis.from_dict(d["axis"]), tuple(d["zlevels"]), d["relation"], sets)
