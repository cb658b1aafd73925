"""Per-time-interval fuzzy rule-based classification.

The object-level API (:func:`firing_strength`, :func:`rule_weights`,
:func:`association_degree`, :func:`classify`) follows the inference steps
one rule and one instance at a time.  The array kernels underneath
(:func:`firing_array`, :func:`weights_from_firing`, :func:`crisp_association`,
:func:`select_winners`) are what the learner calls in bulk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError, InputError
from .setops import centroid_average, nie_tan
from .temporal import TT2FS, TemporalFuzzySets, TimeAxis

TIME_VAR = "Time"


# ---------------------------------------------------------------------------
# Rules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rule:
    """IF var_1 is col_1 AND ... THEN output is consequent.

    ``weights`` holds one ``(lower, upper)`` rule weight per z-level once
    computed; ``interval`` names the time interval (``None`` for a global
    rule base).
    """

    antecedents: tuple
    consequent: object
    weights: tuple = None
    interval: str = None

    def __post_init__(self):
        ants = tuple((str(v), str(c)) for v, c in self.antecedents)
        if not 1 <= len(ants) <= 3:
            raise ConfigurationError(f"a rule needs 1 to 3 antecedents, got {len(ants)}")
        names = [v for v, _ in ants]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"variable repeated in antecedents {ants}")
        object.__setattr__(self, "antecedents", ants)
        if self.weights is not None:
            w = tuple((float(lo), float(hi)) for lo, hi in self.weights)
            for lo, hi in w:
                if not (0.0 <= lo <= hi <= 1.0 + 1e-12):
                    raise ConfigurationError(f"invalid rule weight pair ({lo}, {hi})")
            object.__setattr__(self, "weights", w)

    @property
    def key(self):
        return (frozenset(self.antecedents), self.consequent)

    def weight_arrays(self) -> np.ndarray:
        if self.weights is None:
            raise ConfigurationError("rule weights not computed")
        return np.asarray(self.weights)

    def crisp_weight(self, zlevels) -> float:
        w = self.weight_arrays()
        return nie_tan(float(centroid_average(w[:, 0], zlevels)), float(centroid_average(w[:, 1], zlevels)))

    def top_weight(self) -> float:
        """Midpoint of the rule weight at the highest z-level (tie-breaker)."""
        if self.weights is None:
            return 0.0
        lo, hi = self.weights[-1]
        return 0.5 * (lo + hi)

    def to_text(self, output="Output", zlevels=None) -> str:
        ants = " AND ".join(f"{v} is {c}" for v, c in self.antecedents)
        text = f"IF {ants} THEN {output} is {self.consequent}"
        if zlevels is not None and self.weights is not None:
            text += f"  [RW={self.crisp_weight(zlevels):.3f}]"
        return text

    def to_dict(self):
        d = {"antecedents": [list(a) for a in self.antecedents], "consequent": self.consequent}
        if self.weights is not None:
            d["weights"] = [list(w) for w in self.weights]
        if self.interval is not None:
            d["interval"] = self.interval
        return d

    @classmethod
    def from_dict(cls, d):
        w = d.get("weights")
        return cls(tuple(tuple(a) for a in d["antecedents"]), d["consequent"],
                   tuple(tuple(x) for x in w) if w is not None else None, d.get("interval"))


@dataclass(frozen=True)
class RuleBase:
    rules: tuple
    zlevels: tuple
    interval: str = None

    def __post_init__(self):
        rules = tuple(self.rules)
        keys = [r.key for r in rules]
        if len(set(keys)) != len(keys):
            raise ConfigurationError("duplicate rule (same antecedents and consequent)")
        object.__setattr__(self, "rules", rules)
        object.__setattr__(self, "zlevels", tuple(float(z) for z in self.zlevels))

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def to_text(self, output="Output") -> str:
        head = f"# interval: {self.interval}" if self.interval is not None else "# global rule base"
        lines = [head]
        for p, r in enumerate(self.rules, 1):
            lines.append(f"R{p}: {r.to_text(output, self.zlevels if r.weights else None)}")
        return "\n".join(lines)

    def to_dict(self):
        return {"interval": self.interval, "zlevels": list(self.zlevels),
                "rules": [r.to_dict() for r in self.rules]}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(Rule.from_dict(r) for r in d["rules"]), tuple(d["zlevels"]), d.get("interval"))


@dataclass(frozen=True)
class Prediction:
    """Winning label, rule index and every rule's crisp association degree.

    ``label`` is ``None`` when no rule fired (abstention).
    """

    label: object
    rule_index: int
    h: tuple = field(default=())

    @property
    def abstained(self) -> bool:
        return self.label is None


ABSTAIN = None


# ---------------------------------------------------------------------------
# Array kernels
# ---------------------------------------------------------------------------


def firing_array(D: np.ndarray, ants, tnorm: str = "product") -> np.ndarray:
    """Firing strengths of one rule for all instances.

    ``D`` has shape (n, V, J, I, 2); ``ants`` is a sequence of ``(v, j)``
    index pairs.  Returns shape (n, I, 2).
    """
    ants = list(ants)
    w = D[:, ants[0][0], ants[0][1]]
    if tnorm == "product":
        for v, j in ants[1:]:
            w = w * D[:, v, j]
    elif tnorm == "min":
        for v, j in ants[1:]:
            w = np.minimum(w, D[:, v, j])
    else:
        raise ConfigurationError(f"unknown t-norm {tnorm!r}")
    return w


def weights_from_firing(W: np.ndarray, is_consequent: np.ndarray, normalizer: float) -> np.ndarray:
    """Rule weight = confidence * support, per z-level and bound.

    ``W`` is (n, I, 2) firing on the training data, ``is_consequent`` flags
    the instances of the rule's class.  Confidence is the in-class share of
    the total firing; support is the in-class firing divided by
    ``normalizer``.  A rule that never fires gets weight 0.  The two bound
    products are returned in ascending order.
    """
    W = np.asarray(W, dtype=float)
    if W.shape[0] == 0:
        return np.zeros(W.shape[1:])
    mask = np.asarray(is_consequent, dtype=bool)
    num = W[mask].sum(axis=0)
    den = W.sum(axis=0)
    conf = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    supp = num / float(normalizer)
    rw = np.clip(conf * supp, 0.0, 1.0)
    # confidence is a ratio, so the lower-firing product can exceed the upper one
    return np.sort(rw, axis=-1)


def crisp_association(W: np.ndarray, RW: np.ndarray, zlevels) -> np.ndarray:
    """Crisp association degree per instance: midpoint of the z-averaged bounds."""
    H = W * RW[None]
    z = np.asarray(zlevels, dtype=float)
    lo = H[:, :, 0] @ z / z.sum()
    hi = H[:, :, 1] @ z / z.sum()
    return 0.5 * (lo + hi)


def select_winners(H: np.ndarray, top_weights) -> np.ndarray:
    """Winning rule per instance, -1 when every association degree is zero.

    ``H`` is (P, n).  Ties go to the larger top-level rule weight, then to
    the lower rule index.
    """
    H = np.asarray(H, dtype=float)
    if H.shape[0] == 0:
        return np.full(H.shape[1], -1)
    best = H.max(axis=0)
    tied = H == best[None]
    tw = np.asarray(top_weights, dtype=float)[:, None]
    idx = np.argmax(np.where(tied, tw, -np.inf), axis=0)
    idx[best <= 0] = -1
    return idx


# ---------------------------------------------------------------------------
# Inference context
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InferenceSpace:
    """Maps named antecedents onto degree tensors.

    In ``txai`` mode each instance reads the envelopes of its own time
    interval.  In ``gt2`` mode ``fsets`` has a single interval and a crisp
    ``Time`` variable (one label per interval of ``time_axis``) is appended.
    """

    fsets: TemporalFuzzySets
    time_axis: TimeAxis
    mode: str = "txai"
    tnorm: str = "product"

    def __post_init__(self):
        if self.mode not in ("txai", "gt2"):
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        if self.mode == "txai" and self.fsets.axis != self.time_axis:
            raise ConfigurationError("txai mode needs sets built on the inference time axis")
        if self.mode == "gt2" and self.fsets.axis.n_intervals != 1:
            raise ConfigurationError("gt2 mode needs sets built on a single-interval axis")

    @property
    def zlevels(self):
        return self.fsets.zlevels

    @property
    def var_names(self) -> list[str]:
        names = self.fsets.var_names
        return names + [TIME_VAR] if self.mode == "gt2" else names

    def col_names(self, v: int) -> list[str]:
        if self.mode == "gt2" and v == self.fsets.n_vars:
            return self.time_axis.interval_names
        return self.fsets.variables[v].col_names

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    def encode(self, rule: Rule):
        out = []
        for var, col in rule.antecedents:
            try:
                v = self.var_names.index(var)
                j = self.col_names(v).index(col)
            except ValueError:
                raise ConfigurationError(f"unknown antecedent ({var}, {col})") from None
            out.append((v, j))
        return tuple(out)

    def degrees(self, X, intervals) -> np.ndarray:
        """Degree tensor (n, V, J, I, 2) with each row read at its interval."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        intervals = np.asarray(intervals, dtype=int)
        full = self.fsets.degrees(X)  # (n, V, J, Q, I, 2)
        n = X.shape[0]
        if self.mode == "txai":
            return full[np.arange(n), :, :, intervals]
        D = full[:, :, :, 0]
        n_time = self.time_axis.n_intervals
        J = max(D.shape[2], n_time)
        out = np.zeros((n, D.shape[1] + 1, J) + D.shape[3:])
        out[:, : D.shape[1], : D.shape[2]] = D
        out[np.arange(n), -1, intervals] = 1.0
        return out

    def to_dict(self):
        return {"mode": self.mode, "tnorm": self.tnorm, "time_axis": self.time_axis.to_dict(),
                "fsets": self.fsets.to_dict()}

    @classmethod
    def from_dict(cls, d):
        return cls(TemporalFuzzySets.from_dict(d["fsets"]), TimeAxis.from_dict(d["time_axis"]),
                   d["mode"], d.get("tnorm", "product"))


def instance_vector(space: InferenceSpace, instance) -> np.ndarray:
    """Feature vector in variable order from a mapping or a sequence."""
    names = space.fsets.var_names
    if isinstance(instance, Mapping):
        missing = [n for n in names if n not in instance]
        if missing:
            raise InputError(f"instance lacks variables {missing}")
        vals = [instance[n] for n in names]
    else:
        vals = list(instance)
        if len(vals) != len(names):
            raise InputError(f"instance needs {len(names)} values, got {len(vals)}")
    x = np.asarray(vals, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InputError("instance contains non-finite values")
    return x


def _require_rule_vars(space: InferenceSpace, rule: Rule, instance):
    if isinstance(instance, Mapping):
        for var, _ in rule.antecedents:
            if var != TIME_VAR and var not in instance:
                raise InputError(f"instance lacks antecedent variable {var!r}")


# ---------------------------------------------------------------------------
# Object-level steps
# ---------------------------------------------------------------------------


def membership_degree(tset: TT2FS, x: float, q: int, i: int) -> tuple[float, float]:
    """Lower and upper membership of ``x`` at interval ``q``, z-level index ``i``."""
    x = float(x)
    if not math.isfinite(x):
        raise InputError("non-finite input")
    if not tset.var.contains(x):
        raise DomainError(f"x={x} outside universe {tset.var.universe} of {tset.var.name}")
    lo, hi = tset.envelope(q, i, x)
    return float(lo), float(hi)


def _firing_all_levels(space: InferenceSpace, rule: Rule, instance, q: int) -> np.ndarray:
    _require_rule_vars(space, rule, instance)
    x = instance_vector(space, instance)
    D = space.degrees(x[None], [q])
    return firing_array(D, space.encode(rule), space.tnorm)[0]


def firing_strength(space: InferenceSpace, rule: Rule, instance, q: int, i: int) -> tuple[float, float]:
    """Product (or min) of the antecedent membership bounds at z-level index ``i``."""
    w = _firing_all_levels(space, rule, instance, q)
    return float(w[i, 0]), float(w[i, 1])


def rule_weights(space: InferenceSpace, rule: Rule, X, y, intervals, normalizer=None) -> np.ndarray:
    """Rule weights ``(I, 2)`` on training data ``(X, y)`` read at ``intervals``.

    ``normalizer`` divides the support; it defaults to the number of
    training instances.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=object)
    if X.shape[0] == 0:
        raise InputError("rule weights need training data")
    D = space.degrees(X, intervals)
    W = firing_array(D, space.encode(rule), space.tnorm)
    norm = X.shape[0] if normalizer is None else normalizer
    return weights_from_firing(W, y == rule.consequent, norm)


def rule_weight(space, rule, X, y, intervals, i, normalizer=None) -> tuple[float, float]:
    rw = rule_weights(space, rule, X, y, intervals, normalizer)
    return float(rw[i, 0]), float(rw[i, 1])


def with_weights(space: InferenceSpace, rules: Sequence[Rule], X, y, intervals, support_norm="instances"):
    """Return copies of ``rules`` carrying weights computed on ``(X, y)``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=object)
    D = space.degrees(X, intervals)
    norm = X.shape[0] if support_norm == "instances" else max(len(rules), 1)
    out = []
    for r in rules:
        W = firing_array(D, space.encode(r), space.tnorm)
        rw = weights_from_firing(W, y == r.consequent, norm)
        out.append(replace(r, weights=tuple(map(tuple, rw))))
    return out


def association_degree(space: InferenceSpace, rule: Rule, instance, q: int):
    """Crisp association degree and its per-z lower/upper values.

    Returns ``(h, h_lower, h_upper)`` with arrays of one value per z-level.
    """
    w = _firing_all_levels(space, rule, instance, q)
    H = w * rule.weight_arrays()
    z = space.zlevels
    crisp = nie_tan(float(centroid_average(H[:, 0], z)), float(centroid_average(H[:, 1], z)))
    return crisp, H[:, 0], H[:, 1]


def _predict_bulk(space: InferenceSpace, rulebase: RuleBase, D: np.ndarray):
    rules = list(rulebase.rules)
    if not rules:
        n = D.shape[0]
        return np.full(n, -1), np.zeros((0, n))
    H = np.stack([
        crisp_association(firing_array(D, space.encode(r), space.tnorm), r.weight_arrays(), space.zlevels)
        for r in rules
    ])
    return select_winners(H, [r.top_weight() for r in rules]), H


def classify(space: InferenceSpace, rulebase: RuleBase, instance, q: int) -> Prediction:
    """Consequent of the rule with the largest crisp association degree."""
    if len(rulebase) == 0:
        raise ConfigurationError("empty rule base")
    x = instance_vector(space, instance)
    D = space.degrees(x[None], [q])
    idx, H = _predict_bulk(space, rulebase, D)
    h = tuple(float(v) for v in H[:, 0])
    k = int(idx[0])
    if k < 0:
        return Prediction(ABSTAIN, -1, h)
    return Prediction(rulebase.rules[k].consequent, k, h)


def classify_gt2_baseline(space: InferenceSpace, rulebase: RuleBase, instance, time_interval: int) -> Prediction:
    """Global rule base with time as an extra crisp linguistic input."""
    if space.mode != "gt2":
        raise ConfigurationError("classify_gt2_baseline needs a gt2 inference space")
    return classify(space, rulebase, instance, time_interval)


# ---------------------------------------------------------------------------
# Fitted model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TXAIModel:
    """Inference space plus rule bases keyed by interval index (or one global base)."""

    space: InferenceSpace
    rulebases: tuple
    classes: tuple
    output: str = "Output"

    def rulebase_for(self, q: int) -> RuleBase:
        return self.rulebases[0] if self.space.mode == "gt2" else self.rulebases[q]

    def predict_detail(self, X, intervals):
        """Labels (``None`` for abstentions) and winning rule indices."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        intervals = np.asarray(intervals, dtype=int)
        labels = np.empty(X.shape[0], dtype=object)
        winners = np.full(X.shape[0], -1)
        if X.shape[0] == 0:
            return labels, winners
        D = self.space.degrees(X, intervals)
        groups = [np.arange(X.shape[0])] if self.space.mode == "gt2" else [
            np.flatnonzero(intervals == q) for q in range(self.space.time_axis.n_intervals)
        ]
        for q, rows in enumerate(groups):
            if rows.size == 0:
                continue
            rb = self.rulebase_for(q)
            idx, _ = _predict_bulk(self.space, rb, D[rows])
            winners[rows] = idx
            for r, k in zip(rows, idx):
                labels[r] = rb.rules[k].consequent if k >= 0 else ABSTAIN
        return labels, winners

    def predict(self, X, intervals) -> np.ndarray:
        return self.predict_detail(X, intervals)[0]

    def to_text(self) -> str:
        names = self.space.time_axis.interval_names
        if self.space.mode == "gt2":
            return self.rulebases[0].to_text(self.output)
        return "\n\n".join(
            replace(rb, interval=rb.interval or names[q]).to_text(self.output)
            for q, rb in enumerate(self.rulebases)
        )

    def to_dict(self):
        return {"space": self.space.to_dict(), "rulebases": [rb.to_dict() for rb in self.rulebases],
                "classes": list(self.classes), "output": self.output}

    @classmethod
    def from_dict(cls, d):
        return cls(InferenceSpace.from_dict(d["space"]), tuple(RuleBase.from_dict(r) for r in d["rulebases"]),
                   tuple(d["classes"]), d.get("output", "Output"))
