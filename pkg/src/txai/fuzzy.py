"""Type-1 membership functions, conceptual labels and linguistic variables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DegenerateDataError, DomainError, InputError

MF_KINDS = ("gaussian", "trapezoid", "triangular", "shoulder_left", "shoulder_right")
_N_PARAMS = {"gaussian": 2, "trapezoid": 4, "triangular": 3, "shoulder_left": 2, "shoulder_right": 2}


def _ramp_up(x, a, b):
    if b > a:
        with np.errstate(over="ignore"):  # subnormal widths overflow to inf, then clip
            return np.clip((x - a) / (b - a), 0.0, 1.0)
    return np.where(x >= a, 1.0, 0.0)


def _ramp_down(x, c, d):
    if d > c:
        with np.errstate(over="ignore"):
            return np.clip((d - x) / (d - c), 0.0, 1.0)
    return np.where(x <= c, 1.0, 0.0)


@dataclass(frozen=True)
class MembershipFunction:
    """A primary (type-1) membership function.

    ``params`` by kind:

    * ``gaussian``: (center, sigma)
    * ``trapezoid``: (a, b, c, d) with a <= b <= c <= d
    * ``triangular``: (a, b, c) with a <= b <= c
    * ``shoulder_left``: (a, b), 1 below a falling to 0 at b
    * ``shoulder_right``: (a, b), 0 below a rising to 1 at b
    """

    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind not in MF_KINDS:
            raise ConfigurationError(f"unknown membership function kind {self.kind!r}")
        params = tuple(float(p) for p in self.params)
        if len(params) != _N_PARAMS[self.kind]:
            raise ConfigurationError(
                f"{self.kind} takes {_N_PARAMS[self.kind]} parameters, got {len(params)}"
            )
        if not all(math.isfinite(p) for p in params):
            raise ConfigurationError("membership function parameters must be finite")
        if self.kind == "gaussian":
            if params[1] <= 0:
                raise ConfigurationError("gaussian sigma must be positive")
        elif list(params) != sorted(params):
            raise ConfigurationError(f"{self.kind} breakpoints must be non-decreasing")
        object.__setattr__(self, "params", params)

    @classmethod
    def gaussian(cls, center, sigma):
        return cls("gaussian", (center, sigma))

    @classmethod
    def trapezoid(cls, a, b, c, d):
        return cls("trapezoid", (a, b, c, d))

    @classmethod
    def triangular(cls, a, b, c):
        return cls("triangular", (a, b, c))

    def __call__(self, x):
        """Vectorised evaluation; no finiteness check (see :func:`eval_membership`)."""
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == "gaussian":
            out = np.exp(-((x - p[0]) ** 2) / (2.0 * p[1] ** 2))
        elif self.kind == "trapezoid":
            out = np.minimum(_ramp_up(x, p[0], p[1]), _ramp_down(x, p[2], p[3]))
        elif self.kind == "triangular":
            out = np.minimum(_ramp_up(x, p[0], p[1]), _ramp_down(x, p[1], p[2]))
        elif self.kind == "shoulder_left":
            out = _ramp_down(x, p[0], p[1])
        else:
            out = _ramp_up(x, p[0], p[1])
        return np.clip(out, 0.0, 1.0)

    @property
    def peak(self) -> float:
        """A point where the function reaches its maximum."""
        p = self.params
        if self.kind == "gaussian":
            return p[0]
        if self.kind == "trapezoid":
            return 0.5 * (p[1] + p[2])
        if self.kind == "triangular":
            return p[1]
        if self.kind == "shoulder_left":
            return p[0]
        return p[1]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}

    @classmethod
    def from_dict(cls, d) -> "MembershipFunction":
        return cls(d["kind"], tuple(d["params"]))


def eval_membership(mf: MembershipFunction, x) -> float:
    """Membership of a single finite point, clamped to [0, 1]."""
    x = float(x)
    if not math.isfinite(x):
        raise InputError(f"membership evaluated at non-finite x={x}")
    return float(mf(x))


@dataclass(frozen=True)
class ConceptualLabel:
    name: str
    mf: MembershipFunction

    def to_dict(self):
        return {"name": self.name, "mf": self.mf.to_dict()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["name"], MembershipFunction.from_dict(d["mf"]))


@dataclass(frozen=True)
class LinguisticVariable:
    """A named input with an ordered tuple of conceptual labels (CoLs).

    Construction checks that every point of ``universe`` (sampled on
    ``coverage_resolution`` points) has positive membership in some CoL.
    """

    name: str
    universe: tuple
    cols: tuple
    coverage_resolution: int = field(default=1000, compare=False)

    def __post_init__(self):
        lo, hi = (float(v) for v in self.universe)
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
            raise ConfigurationError(f"{self.name}: degenerate universe [{lo}, {hi}]")
        object.__setattr__(self, "universe", (lo, hi))
        cols = tuple(self.cols)
        if not cols:
            raise ConfigurationError(f"{self.name}: needs at least one conceptual label")
        names = [c.name for c in cols]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"{self.name}: duplicate CoL names {names}")
        object.__setattr__(self, "cols", cols)
        grid = np.linspace(lo, hi, self.coverage_resolution)
        uncovered = self.memberships(grid).max(axis=0) <= 0.0
        if uncovered.any():
            raise ConfigurationError(
                f"{self.name}: universe not covered near x={grid[uncovered][0]:.6g}"
            )

    @property
    def col_names(self) -> list[str]:
        return [c.name for c in self.cols]

    def index(self, col_name: str) -> int:
        try:
            return self.col_names.index(col_name)
        except ValueError:
            raise ConfigurationError(f"{self.name} has no CoL {col_name!r}") from None

    def memberships(self, x) -> np.ndarray:
        """Array of shape (J, *x.shape) of primary memberships."""
        x = np.asarray(x, dtype=float)
        return np.stack([c.mf(x) for c in self.cols])

    def contains(self, x) -> bool:
        return self.universe[0] <= x <= self.universe[1]

    def to_dict(self):
        return {
            "name": self.name,
            "universe": list(self.universe),
            "cols": [c.to_dict() for c in self.cols],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["name"], tuple(d["universe"]), tuple(ConceptualLabel.from_dict(c) for c in d["cols"]))


def argmax_col(var: LinguisticVariable, x: float) -> tuple[int, float]:
    """Index and membership of the CoL with the largest membership at ``x``.

    Ties go to the lowest index.
    """
    x = float(x)
    if not math.isfinite(x):
        raise InputError(f"non-finite input {x}")
    if not var.contains(x):
        raise DomainError(f"{x} outside universe {var.universe} of {var.name}")
    mu = var.memberships(x)
    j = int(np.argmax(mu))
    return j, float(mu[j])


def argmax_cols(var: LinguisticVariable, xs) -> np.ndarray:
    """Vectorised :func:`argmax_col` without the universe check."""
    return np.argmax(var.memberships(xs), axis=0)


def fit_primary_mfs(data, n_labels: int, policy: str = "quantile") -> list[MembershipFunction]:
    """Fit ``n_labels`` Gaussian membership functions to a data column.

    ``quantile`` places centres at equally spaced quantiles between the 10th
    and 90th percentile (the median when ``n_labels == 1``); ``uniform``
    spaces them evenly over the same span.  All functions share one sigma,
    half the mean gap between adjacent centres, so the argmax label of a
    point is always its nearest centre.

    When heavy ties make quantile centres collide, centres are recomputed on
    the distinct values, and failing that spread uniformly.
    """
    data = np.asarray(data, dtype=float)
    data = data[np.isfinite(data)]
    if n_labels < 1:
        raise ConfigurationError("need at least one label")
    distinct = np.unique(data)
    if distinct.size < max(2, n_labels):
        raise DegenerateDataError(
            f"need at least {max(2, n_labels)} distinct values, got {distinct.size}"
        )
    lo, hi = float(distinct[0]), float(distinct[-1])
    if n_labels == 1:
        sigma = (hi - lo) / 2.0
        if not sigma * sigma > 0:
            raise DegenerateDataError("data spread too small for a usable membership width")
        return [MembershipFunction.gaussian(float(np.median(data)), sigma)]

    probs = np.linspace(0.1, 0.9, n_labels)
    if policy == "quantile":
        centers = np.quantile(data, probs)
        if np.any(np.diff(centers) <= 0):
            centers = np.quantile(distinct, probs)
    elif policy == "uniform":
        centers = lo + probs * (hi - lo)
    else:
        raise ConfigurationError(f"unknown fit policy {policy!r}")
    if np.any(np.diff(centers) <= 0):
        centers = lo + probs * (hi - lo)
    sigma = 0.5 * float(np.mean(np.diff(centers)))
    if not sigma * sigma > 0:
        raise DegenerateDataError("data spread too small for a usable membership width")
    return [MembershipFunction.gaussian(float(c), sigma) for c in centers]


def fit_variable(name, data, col_names, policy="quantile") -> LinguisticVariable:
    """Build a :class:`LinguisticVariable` whose universe is the data range."""
    data = np.asarray(data, dtype=float)
    mfs = fit_primary_mfs(data, len(col_names), policy)
    cols = tuple(ConceptualLabel(n, mf) for n, mf in zip(col_names, mfs))
    return LinguisticVariable(name, (float(np.min(data)), float(np.max(data))), cols)
