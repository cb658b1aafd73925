"""Experiment configuration loaded from YAML."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import yaml

from .data import IngestSchema
from .errors import ConfigurationError
from .fuzzy import LinguisticVariable, fit_variable
from .learner import CVPlan, GAConfig
from .temporal import DEFAULT_ZLEVELS, INTERPOLATIONS, TimeAxis, normalize_relation


@dataclass(frozen=True)
class ExperimentConfig:
    features: tuple = ("Temperature", "Light", "CO2")
    timestamp: str = "date"
    label: str = "Occupancy"
    label_names: dict = field(default_factory=lambda: {"0": "NotOccupied", "1": "Occupied"})
    positive: str = "Occupied"
    output: str = "Occupancy"
    col_names: tuple = ("Low", "Medium", "High")
    fit_policy: str = "quantile"
    variables: tuple = None  # explicit LinguisticVariable dicts override fitting
    hours: dict = field(default_factory=lambda: {"Morning": (0, 11), "Daytime": (11, 19), "Evening": (19, 24)})
    zlevels: tuple = DEFAULT_ZLEVELS
    relation: str = "mamdani_product"
    shrink: float = 0.5
    interpolation: str = "linear"
    tnorm: str = "product"
    gamma_reduce: str = "mean"
    mode: str = "txai"
    leak_free: bool = False
    grid: int = 201
    seed: int = 0
    n_jobs: int = 1
    ga: GAConfig = field(default_factory=GAConfig)
    cv: CVPlan = field(default_factory=CVPlan)

    def __post_init__(self):
        z = tuple(float(v) for v in self.zlevels)
        if not z or any(not 0 < v <= 1 for v in z) or any(b <= a for a, b in zip(z, z[1:])):
            raise ConfigurationError(f"z-levels must be strictly increasing in (0, 1], got {z}")
        object.__setattr__(self, "zlevels", z)
        object.__setattr__(self, "relation", normalize_relation(self.relation))
        if self.mode not in ("txai", "gt2"):
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        if self.interpolation not in INTERPOLATIONS:
            raise ConfigurationError(f"unknown interpolation {self.interpolation!r}")
        if self.tnorm not in ("product", "min"):
            raise ConfigurationError(f"unknown t-norm {self.tnorm!r}")
        if self.gamma_reduce not in ("mean", "max"):
            raise ConfigurationError("gamma_reduce is 'mean' or 'max'")
        if self.grid < 2:
            raise ConfigurationError("grid needs at least 2 points")
        if not 0 <= self.shrink <= 1:
            raise ConfigurationError("shrink must lie in [0, 1]")
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "col_names", tuple(self.col_names))
        object.__setattr__(self, "hours", {k: tuple(v) for k, v in self.hours.items()})
        self.axis()  # validates the partition

    def axis(self) -> TimeAxis:
        try:
            return TimeAxis.hours(self.hours)
        except ValueError as e:
            raise ConfigurationError(f"bad interval definition: {e}") from None

    def schema(self) -> IngestSchema:
        classes = tuple(self.label_names.values()) if self.label_names else None
        return IngestSchema(self.timestamp, self.features, self.label, ",", classes, self.label_names)

    def build_variables(self, dataset) -> list[LinguisticVariable]:
        if self.variables:
            out = [LinguisticVariable.from_dict(d) for d in self.variables]
            if [v.name for v in out] != list(self.features):
                raise ConfigurationError("variable definitions must follow the feature order")
            return out
        return [fit_variable(name, dataset.X[:, k], self.col_names, self.fit_policy)
                for k, name in enumerate(self.features)]

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "seed" in kw:
            kw["ga"] = replace(kw.get("ga", self.ga), seed=kw["seed"])
            kw["cv"] = replace(kw.get("cv", self.cv), seed=kw["seed"])
        return replace(self, **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["zlevels"] = list(self.zlevels)
        d["features"] = list(self.features)
        d["col_names"] = list(self.col_names)
        d["hours"] = {k: list(v) for k, v in self.hours.items()}
        return d


def config_from_dict(d: dict) -> ExperimentConfig:
    d = dict(d or {})
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(d) - known
    if unknown:
        raise ConfigurationError(f"unknown configuration keys {sorted(unknown)}")
    ga = dict(d.pop("ga", None) or {})
    cv = dict(d.pop("cv", None) or {})
    # a top-level seed feeds both sections unless they set their own
    if "seed" in d:
        ga.setdefault("seed", d["seed"])
        cv.setdefault("seed", d["seed"])
    if d.get("label_names") is not None:
        d["label_names"] = {str(k): str(v) for k, v in d["label_names"].items()}
    try:
        return ExperimentConfig(ga=GAConfig(**ga), cv=CVPlan(**cv), **d)
    except TypeError as e:
        raise ConfigurationError(str(e)) from None


def load_config(path=None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"no such config file: {path}")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as e:
        raise ConfigurationError(f"invalid YAML in {path}: {e}") from None
    if data is not None and not isinstance(data, dict):
        raise ConfigurationError("config root must be a mapping")
    return config_from_dict(data)
