"""Rule transition matrices between consecutive time intervals."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, EmptySetError, InputError, UndefinedTransitionError
from .inference import InferenceSpace, Rule, RuleBase


def _tnorm(values, tnorm):
    values = np.asarray(values, dtype=float)
    if tnorm == "product":
        return float(np.prod(values))
    if tnorm == "min":
        return float(np.min(values))
    raise ConfigurationError(f"unknown t-norm {tnorm!r}")


def gamma(space: InferenceSpace, rule: Rule, q: int, tnorm="product", reduce="mean") -> float:
    """Possibility of ``rule`` in interval ``q`` from its antecedents' frequencies.

    Each antecedent contributes the mean (or max) conditional relative
    frequency of its label over the interval's time points.
    """
    if space.mode != "txai":
        raise ConfigurationError("transition possibilities need a txai inference space")
    if not 0 <= q < space.time_axis.n_intervals:
        raise InputError(f"interval index {q} out of range")
    vals = []
    for v, j in space.encode(rule):
        vals.append(space.fsets.sets[v][j].dist.interval_scalar(q, reduce))
    return _tnorm(vals, tnorm)


def eta(gamma_c: float, gamma_d: float) -> float:
    """Joint possibility of two rules in consecutive intervals."""
    for g in (gamma_c, gamma_d):
        if not 0.0 <= g <= 1.0:
            raise InputError(f"possibility {g} outside [0, 1]")
    return gamma_c * gamma_d


@dataclass(frozen=True)
class RuleTransitionMatrix:
    from_interval: str
    to_interval: str
    matrix: np.ndarray  # (U, V) transition possibilities
    eta: np.ndarray
    cooccur: np.ndarray  # S_cd
    total: float  # S for the target interval
    rows: tuple  # rule labels of the source base
    cols: tuple

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (len(self.rows), len(self.cols)):
            raise InputError("matrix shape does not match the rule lists")
        object.__setattr__(self, "matrix", m)

    @property
    def shape(self):
        return self.matrix.shape

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"{self.from_interval}\\{self.to_interval}", *self.cols])
        for name, row in zip(self.rows, self.matrix):
            w.writerow([name, *(f"{v:.6f}" for v in row)])
        return buf.getvalue()


def transition_counts(win_from, days_from, win_to, days_to, n_from, n_to, wrap=False):
    """Presence-indicator sigma counts over paired windows.

    A window is a calendar day; with ``wrap`` the target interval is read
    on the following day.  Windows lacking a winner in either interval are
    skipped.  Returns ``(S_cd, S_total)``.
    """
    def presence(win, days, n):
        table = {}
        for w, d in zip(np.asarray(win, dtype=int), np.asarray(days, dtype=int)):
            if w < 0:
                continue
            table.setdefault(int(d), np.zeros(n, dtype=int))[w] = 1
        return table

    src = presence(win_from, days_from, n_from)
    dst = presence(win_to, days_to, n_to)
    S = np.zeros((n_from, n_to))
    total = 0.0
    for d, rc in sorted(src.items()):
        rd = dst.get(d + 1 if wrap else d)
        if rd is None:
            continue
        S += np.outer(rc, rd)
        total += rd.sum()
    return S, total


def rtm(space: InferenceSpace, base_from: RuleBase, base_to: RuleBase, q_from: int, q_to: int,
        winners, intervals, days, tnorm="product", reduce="mean") -> RuleTransitionMatrix:
    """Transition possibilities ``eta_cd * S_cd / S`` between two rule bases.

    ``winners`` holds the winning rule index per instance (``-1`` for
    abstentions) within its own interval's base; ``days`` the day ordinal.
    """
    if len(base_from) == 0 or len(base_to) == 0:
        raise EmptySetError("rule transition matrix over an empty rule base")
    winners = np.asarray(winners, dtype=int)
    intervals = np.asarray(intervals, dtype=int)
    days = np.asarray(days, dtype=int)
    Q = space.time_axis.n_intervals
    wrap = q_to <= q_from and Q > 1 or (Q == 1)
    a, b = intervals == q_from, intervals == q_to
    S, total = transition_counts(winners[a], days[a], winners[b], days[b], len(base_from), len(base_to), wrap)
    names = space.time_axis.interval_names
    if total == 0:
        raise UndefinedTransitionError(f"no rule wins paired between {names[q_from]} and {names[q_to]}")
    g_c = np.array([gamma(space, r, q_from, tnorm, reduce) for r in base_from.rules])
    g_d = np.array([gamma(space, r, q_to, tnorm, reduce) for r in base_to.rules])
    E = np.outer(g_c, g_d)
    rows = tuple(f"R{k + 1}" for k in range(len(base_from)))
    cols = tuple(f"R{k + 1}" for k in range(len(base_to)))
    return RuleTransitionMatrix(names[q_from], names[q_to], E * S / total, E, S, float(total), rows, cols)


def model_rtms(model, dataset, tnorm="product", reduce="mean") -> list:
    """Matrices for every consecutive interval pair, closing the cycle."""
    space = model.space
    if space.mode != "txai":
        raise ConfigurationError("transition matrices need per-interval rule bases")
    _, winners = model.predict_detail(dataset.X, dataset.intervals)
    Q = space.time_axis.n_intervals
    return [
        rtm(space, model.rulebases[q], model.rulebases[(q + 1) % Q], q, (q + 1) % Q,
            winners, dataset.intervals, dataset.days, tnorm, reduce)
        for q in range(Q)
    ]


def most_likely_trajectory(rtms) -> list:
    """Greedy chain of per-step maxima as ``[(interval, rule index), ...]``.

    The first matrix picks its largest cell; each later step takes the
    largest entry in the row of the rule reached so far.  Ties go to the
    lower index.
    """
    rtms = list(rtms)
    if not rtms:
        raise EmptySetError("no transition matrices")
    for m in rtms:
        if m.matrix.size == 0:
            raise EmptySetError("empty transition matrix")
    for a, b in zip(rtms, rtms[1:]):
        if a.to_interval != b.from_interval or a.shape[1] != b.shape[0]:
            raise ConfigurationError(f"matrices {a.from_interval}->{a.to_interval} and "
                                     f"{b.from_interval}->{b.to_interval} do not chain")
    c, d = np.unravel_index(int(np.argmax(rtms[0].matrix)), rtms[0].shape)
    path = [(rtms[0].from_interval, int(c)), (rtms[0].to_interval, int(d))]
    for m in rtms[1:]:
        d = int(np.argmax(m.matrix[path[-1][1]]))
        path.append((m.to_interval, d))
    return path


def trajectory_steps(rtms, path) -> list:
    """Transition possibility for each link of ``path``."""
    return [float(m.matrix[path[k][1], path[k + 1][1]]) for k, m in enumerate(rtms)]


def render_trajectory(model, rtms, path) -> str:
    """Text chain of rules with the possibility on each link."""
    bases = {rb.interval or model.space.time_axis.interval_names[q]: rb for q, rb in enumerate(model.rulebases)}
    zl = model.space.zlevels
    lines = []
    steps = trajectory_steps(rtms, path)
    for k, (name, idx) in enumerate(path):
        rule = bases[name].rules[idx]
        lines.append(f"[{name}] R{idx + 1}: {rule.to_text(model.output, zl)}")
        if k < len(steps):
            lines.append(f"    --({steps[k]:.3f})-->")
    return "\n".join(lines)
