"""Genetic rule-base learning and the repeated nested cross-validation protocol."""

from __future__ import annotations

import logging
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from joblib import Parallel, delayed
from sklearn.model_selection import StratifiedKFold, StratifiedShuffleSplit

from .errors import ConfigurationError, InputError, StratificationError
from .inference import (
    InferenceSpace,
    Rule,
    RuleBase,
    TXAIModel,
    crisp_association,
    firing_array,
    select_winners,
    weights_from_firing,
)
from .temporal import TemporalFuzzySets, TimeAxis

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GAConfig:
    generations: int = 20
    population: int = 50
    max_antecedents: int = 3
    max_rules: int = 30
    prune_threshold: float = 0.001
    init_rules: int = 8
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1  # per rule
    add_rate: float = 0.3
    delete_rate: float = 0.3
    tournament_size: int = 3
    elitism: int = 1
    support_norm: str = "instances"
    seed: int = 0

    def __post_init__(self):
        for name in ("population", "max_antecedents", "max_rules", "init_rules", "tournament_size"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be at least 1")
        if self.max_antecedents > 3:
            raise ConfigurationError("rules carry at most 3 antecedents")
        if self.generations < 0 or self.elitism < 0:
            raise ConfigurationError("generations and elitism must be non-negative")
        if self.elitism > self.population:
            raise ConfigurationError("elitism cannot exceed the population")
        for name in ("crossover_rate", "mutation_rate", "add_rate", "delete_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1]")
        if self.prune_threshold < 0:
            raise ConfigurationError("prune threshold must be non-negative")
        if self.support_norm not in ("instances", "rules"):
            raise ConfigurationError("support_norm is 'instances' or 'rules'")


@dataclass(frozen=True)
class CVPlan:
    repeats: int = 10
    test_fraction: float = 0.20
    inner_folds: int = 10
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.repeats < 1:
            raise ConfigurationError("repeats must be at least 1")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigurationError("test fraction must lie in (0, 1)")
        if self.inner_folds < 2:
            raise ConfigurationError("need at least 2 inner folds")


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def confusion_metrics(tp, fn, tn, fp) -> dict:
    """Binary metrics for the positive class from confusion counts."""
    recall = tp / (tp + fn) if tp + fn else 0.0
    specificity = tn / (tn + fp) if tn + fp else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    present = [r for r, n in ((recall, tp + fn), (specificity, tn + fp)) if n]
    bacc = float(np.mean(present)) if present else 0.0
    return {"balanced_accuracy": bacc, "recall": recall, "precision": precision, "f_score": f}


def classification_metrics(y_true, y_pred, positive=None) -> dict:
    """Balanced accuracy, recall, precision and F-score.

    Abstentions (``None`` predictions) count as errors.  With ``positive``
    set, recall/precision/F refer to that class; otherwise they are
    macro-averaged over the classes present in ``y_true``.
    """
    y_true = np.asarray(y_true, dtype=object)
    y_pred = np.asarray(y_pred, dtype=object)
    classes = sorted(set(y_true.tolist()), key=str)
    if not classes:
        return {"balanced_accuracy": 0.0, "recall": 0.0, "precision": 0.0, "f_score": 0.0}
    recalls = {c: float(np.mean(y_pred[y_true == c] == c)) for c in classes}
    bacc = float(np.mean(list(recalls.values())))

    def prf(c):
        tp = float(np.sum((y_pred == c) & (y_true == c)))
        fp = float(np.sum((y_pred == c) & (y_true != c)))
        fn = float(np.sum((y_pred != c) & (y_true == c)))
        r = tp / (tp + fn) if tp + fn else 0.0
        p = tp / (tp + fp) if tp + fp else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        return r, p, f

    if positive is not None:
        r, p, f = prf(positive)
    else:
        r, p, f = (float(v) for v in np.mean([prf(c) for c in classes], axis=0))
    return {"balanced_accuracy": bacc, "recall": r, "precision": p, "f_score": f}


def balanced_accuracy(y_true_idx: np.ndarray, y_pred_idx: np.ndarray, n_classes: int) -> float:
    """Fast balanced accuracy on integer labels; ``-1`` predictions are errors."""
    recalls = []
    for c in range(n_classes):
        mask = y_true_idx == c
        if mask.any():
            recalls.append(np.mean(y_pred_idx[mask] == c))
    return float(np.mean(recalls)) if recalls else 0.0


# ---------------------------------------------------------------------------
# Rule evaluation cache
# ---------------------------------------------------------------------------


class _RuleTable:
    """Memoises rule weights (training) and crisp association degrees (validation)."""

    def __init__(self, space, D_train, y_train, D_val, zlevels, n_classes, normalizer):
        self.space = space
        self.D_train = D_train
        self.y_train = y_train
        self.D_val = D_val
        self.zlevels = zlevels
        self.n_classes = n_classes
        self.normalizer = normalizer
        self._firing = {}
        self._entries = {}

    def _fire(self, ants):
        if ants not in self._firing:
            self._firing[ants] = (
                firing_array(self.D_train, ants, self.space.tnorm),
                firing_array(self.D_val, ants, self.space.tnorm),
            )
        return self._firing[ants]

    def entry(self, gene):
        """(rule weights (I,2), crisp upper weight, top weight, validation h)."""
        if gene not in self._entries:
            ants, c = gene
            w_tr, w_val = self._fire(ants)
            rw = weights_from_firing(w_tr, self.y_train == c, self.normalizer)
            z = np.asarray(self.zlevels)
            upper_avg = float(rw[:, 1] @ z / z.sum())
            h = crisp_association(w_val, rw, self.zlevels)
            self._entries[gene] = (rw, upper_avg, 0.5 * (rw[-1, 0] + rw[-1, 1]), h)
        return self._entries[gene]


@dataclass
class GAResult:
    rulebase: RuleBase
    fitness: float
    trace: list = field(default_factory=list)
    degenerate: bool = False


class RuleGA:
    """Evolves variable-length lists of rules for one training/validation split.

    A gene is ``(antecedents, consequent)`` with ``antecedents`` a sorted
    tuple of ``(variable, label)`` index pairs.
    """

    def __init__(self, space: InferenceSpace, config: GAConfig, classes, rng):
        self.space = space
        self.cfg = config
        self.classes = list(classes)
        self.rng = rng
        self.n_vars = space.n_vars
        self.n_cols = [len(space.col_names(v)) for v in range(self.n_vars)]
        self.max_ants = min(config.max_antecedents, self.n_vars)

    # -- variation ---------------------------------------------------------

    def random_gene(self):
        k = int(self.rng.integers(1, self.max_ants + 1))
        vs = sorted(self.rng.choice(self.n_vars, size=k, replace=False).tolist())
        ants = tuple((v, int(self.rng.integers(self.n_cols[v]))) for v in vs)
        return ants, int(self.rng.integers(len(self.classes)))

    def random_individual(self):
        n = int(self.rng.integers(1, min(self.cfg.init_rules, self.cfg.max_rules) + 1))
        return [self.random_gene() for _ in range(n)]

    def mutate_gene(self, gene):
        ants, c = gene
        ants = dict(ants)
        op = int(self.rng.integers(3))
        if op == 0:
            v = list(ants)[int(self.rng.integers(len(ants)))]
            if self.n_cols[v] > 1:
                choices = [j for j in range(self.n_cols[v]) if j != ants[v]]
                ants[v] = int(self.rng.choice(choices))
        elif op == 1:
            v = int(self.rng.integers(self.n_vars))
            if v in ants and len(ants) > 1:
                del ants[v]
            elif v not in ants and len(ants) < self.max_ants:
                ants[v] = int(self.rng.integers(self.n_cols[v]))
        elif len(self.classes) > 1:
            c = int(self.rng.choice([k for k in range(len(self.classes)) if k != c]))
        return tuple(sorted(ants.items())), c

    def mutate(self, ind):
        ind = [self.mutate_gene(g) if self.rng.random() < self.cfg.mutation_rate else g for g in ind]
        if len(ind) < self.cfg.max_rules and self.rng.random() < self.cfg.add_rate:
            ind.append(self.random_gene())
        if len(ind) > 1 and self.rng.random() < self.cfg.delete_rate:
            del ind[int(self.rng.integers(len(ind)))]
        return ind

    def crossover(self, a, b):
        i = int(self.rng.integers(len(a) + 1))
        j = int(self.rng.integers(len(b) + 1))
        c1, c2 = a[:i] + b[j:], b[:j] + a[i:]
        out = []
        for c in (c1, c2):
            c = c[: self.cfg.max_rules]
            out.append(c if c else [self.random_gene()])
        return out

    def tournament(self, fitness):
        idx = self.rng.choice(len(fitness), size=min(self.cfg.tournament_size, len(fitness)), replace=False)
        return int(min(idx, key=lambda k: (-fitness[k][0], fitness[k][1], k)))

    # -- evaluation --------------------------------------------------------

    def clean(self, ind, table: _RuleTable):
        """Drop duplicate and sub-threshold rules."""
        seen, out = set(), []
        for g in ind:
            if g in seen:
                continue
            seen.add(g)
            if table.entry(g)[1] < self.cfg.prune_threshold:
                continue
            out.append(g)
        return out[: self.cfg.max_rules]

    def fitness(self, ind, table: _RuleTable, y_val_idx):
        if not ind:
            return 0.0
        entries = [table.entry(g) for g in ind]
        H = np.stack([e[3] for e in entries])
        win = select_winners(H, [e[2] for e in entries])
        cons = np.array([g[1] for g in ind])
        pred = np.where(win >= 0, cons[np.maximum(win, 0)], -1)
        return balanced_accuracy(y_val_idx, pred, len(self.classes))

    def run(self, table: _RuleTable, y_val_idx):
        cfg = self.cfg
        pop = [self.clean(self.random_individual(), table) for _ in range(cfg.population)]
        scores = [(self.fitness(ind, table, y_val_idx), len(ind)) for ind in pop]
        trace = []

        def order():
            return sorted(range(len(pop)), key=lambda k: (-scores[k][0], scores[k][1], k))

        ranked = order()
        trace.append(scores[ranked[0]][0])
        for _ in range(cfg.generations):
            children = [list(pop[k]) for k in ranked[: cfg.elitism]]
            while len(children) < cfg.population:
                a = pop[self.tournament(scores)]
                b = pop[self.tournament(scores)]
                if self.rng.random() < cfg.crossover_rate:
                    kids = self.crossover(a, b)
                else:
                    kids = [list(a), list(b)]
                for kid in kids:
                    if len(children) < cfg.population:
                        kid = self.clean(self.mutate(kid), table)
                        children.append(kid)
            pop = children
            scores = [(self.fitness(ind, table, y_val_idx), len(ind)) for ind in pop]
            ranked = order()
            trace.append(scores[ranked[0]][0])
        best = ranked[0]
        return pop[best], scores[best][0], trace


def _genes_to_rulebase(space, genes, table, classes, zlevels, interval_name):
    rules = []
    for g in genes:
        ants, c = g
        names = tuple((space.var_names[v], space.col_names(v)[j]) for v, j in ants)
        rw = table.entry(g)[0]
        rules.append(Rule(names, classes[c], tuple(map(tuple, rw)), interval_name))
    return RuleBase(tuple(rules), zlevels, interval_name)


def _degenerate_rulebase(space, table, classes, label_idx, zlevels, interval_name):
    """One-rule base for single-class training data: the label that fires most."""
    best, best_sum = None, -1.0
    for v in range(space.n_vars):
        for j in range(len(space.col_names(v))):
            s = float(table._fire(((v, j),))[0][:, :, 1].sum())
            if s > best_sum:
                best, best_sum = ((v, j),), s
    gene = (best, label_idx)
    return _genes_to_rulebase(space, [gene], table, classes, zlevels, interval_name)


def run_ga(space: InferenceSpace, train, validation, config: GAConfig, classes, q=None, seed=None) -> GAResult:
    """Learn one rule base by GA on ``train`` with validation fitness.

    ``train`` and ``validation`` are ``(X, y, intervals)`` triples.  With
    ``q`` given only rows of that interval are used.
    """
    classes = list(classes)
    rng = np.random.default_rng(config.seed if seed is None else seed)

    def pick(split):
        X, y, iv = (np.asarray(a) for a in split)
        X = np.atleast_2d(X.astype(float))
        y = y.astype(object)
        iv = iv.astype(int)
        if q is not None:
            m = iv == q
            X, y, iv = X[m], y[m], iv[m]
        return X, y, iv

    Xtr, ytr, ivtr = pick(train)
    Xva, yva, ivva = pick(validation)
    if Xtr.shape[0] == 0 or Xva.shape[0] == 0:
        raise InputError("training and validation data must be non-empty")
    D_tr = space.degrees(Xtr, ivtr)
    D_va = space.degrees(Xva, ivva)
    class_idx = {c: k for k, c in enumerate(classes)}
    y_tr_idx = np.array([class_idx[c] for c in ytr])
    y_va_idx = np.array([class_idx[c] for c in yva])
    normalizer = Xtr.shape[0]
    if config.support_norm == "rules":
        normalizer = config.max_rules
    table = _RuleTable(space, D_tr, y_tr_idx, D_va, space.zlevels, len(classes), normalizer)
    name = space.time_axis.interval_names[q] if q is not None else None

    present = np.unique(y_tr_idx)
    if present.size == 1:
        msg = f"training data for interval {name!r} holds a single class; using a one-rule base"
        warnings.warn(msg)
        log.warning(msg)
        rb = _degenerate_rulebase(space, table, classes, int(present[0]), space.zlevels, name)
        genes = [(space.encode(r), class_idx[r.consequent]) for r in rb.rules]
        fit = RuleGA(space, config, classes, rng).fitness(genes, table, y_va_idx)
        return GAResult(rb, fit, [fit] * (config.generations + 1), degenerate=True)

    ga = RuleGA(space, config, classes, rng)
    genes, fit, trace = ga.run(table, y_va_idx)
    return GAResult(_genes_to_rulebase(space, genes, table, classes, space.zlevels, name), fit, trace)


def learn_rulebase(space, train, validation, q, config: GAConfig, classes, seed=None) -> RuleBase:
    return run_ga(space, train, validation, config, classes, q, seed).rulebase


# ---------------------------------------------------------------------------
# Model construction
# ---------------------------------------------------------------------------


def build_space(dataset, variables, zlevels, relation, mode="txai", shrink=0.5,
                interpolation="linear", tnorm="product") -> InferenceSpace:
    """Fit conditional distributions on ``dataset`` and wrap them for inference."""
    axis = dataset.axis
    if mode == "txai":
        fsets = TemporalFuzzySets.fit(dataset.X, dataset.points, variables, axis, zlevels, relation,
                                      interpolation, shrink)
    elif mode == "gt2":
        flat = TimeAxis.single_interval(axis.positions, "All", axis.period, axis.labels)
        fsets = TemporalFuzzySets.fit(dataset.X, dataset.points, variables, flat, zlevels, relation,
                                      interpolation, shrink)
    else:
        raise ConfigurationError(f"unknown mode {mode!r}")
    return InferenceSpace(fsets, axis, mode, tnorm)


def fit_model(space, train, validation, config: GAConfig, classes, seed=0, output="Output"):
    """Learn every rule base of a model; returns ``(model, {interval: GAResult})``."""
    seeds = np.random.SeedSequence(seed).spawn(space.time_axis.n_intervals)
    results = {}
    if space.mode == "gt2":
        res = run_ga(space, train, validation, config, classes, None, np.random.default_rng(seeds[0]))
        results[None] = res
        bases = (res.rulebase,)
    else:
        bases = []
        for q in range(space.time_axis.n_intervals):
            res = run_ga(space, train, validation, config, classes, q, np.random.default_rng(seeds[q]))
            results[q] = res
            bases.append(res.rulebase)
        bases = tuple(bases)
    return TXAIModel(space, bases, tuple(classes), output), results


# ---------------------------------------------------------------------------
# Experiment protocol
# ---------------------------------------------------------------------------


@dataclass
class ExperimentReport:
    mode: str
    records: list  # one dict per (repeat, fold, split)
    traces: list  # one dict per GA run
    metadata: dict

    METRICS = ("balanced_accuracy", "recall", "precision", "f_score")

    def values(self, split, metric):
        return np.array([r[metric] for r in self.records if r["split"] == split])

    def summary(self) -> dict:
        out = {}
        for split in ("validation", "test"):
            out[split] = {
                m: {"mean": float(self.values(split, m).mean()), "std": float(self.values(split, m).std())}
                for m in self.METRICS
            }
        return out

    def per_repeat(self, split="test", metric="recall") -> list:
        reps = sorted({r["repeat"] for r in self.records})
        return [
            float(np.mean([r[metric] for r in self.records if r["split"] == split and r["repeat"] == k]))
            for k in reps
        ]

    def convergence(self) -> np.ndarray:
        """Mean best validation balanced accuracy per generation over all GA runs."""
        traces = np.array([t["trace"] for t in self.traces], dtype=float)
        return traces.mean(axis=0) if traces.size else np.zeros(0)

    def to_dict(self):
        return {
            "mode": self.mode,
            "metadata": self.metadata,
            "summary": self.summary(),
            "per_repeat_test_recall": self.per_repeat(),
            "records": self.records,
            "traces": self.traces,
        }


def _check_strata(y, n_splits, what):
    values, counts = np.unique(np.asarray(y, dtype=str), return_counts=True)
    if values.size < 2:
        raise StratificationError(f"{what}: need at least two classes, found {values.tolist()}")
    if counts.min() < n_splits:
        raise StratificationError(
            f"{what}: class {values[np.argmin(counts)]!r} has {counts.min()} instances, fewer than {n_splits} strata"
        )


def outer_splits(y, plan: CVPlan):
    """One (train, test) index pair per repeat."""
    y = np.asarray(y, dtype=str)
    _check_strata(y, 2, "outer split")
    out = []
    for r in range(plan.repeats):
        seed = plan.seed + r
        if plan.stratified:
            sss = StratifiedShuffleSplit(n_splits=1, test_size=plan.test_fraction, random_state=seed)
            tr, te = next(sss.split(np.zeros(len(y)), y))
        else:
            perm = np.random.default_rng(seed).permutation(len(y))
            k = int(round(plan.test_fraction * len(y)))
            te, tr = np.sort(perm[:k]), np.sort(perm[k:])
        out.append((np.sort(tr), np.sort(te)))
    return out


def inner_splits(y, plan: CVPlan, repeat: int):
    y = np.asarray(y, dtype=str)
    _check_strata(y, plan.inner_folds, "inner folds")
    skf = StratifiedKFold(n_splits=plan.inner_folds, shuffle=True, random_state=plan.seed + repeat)
    return [(np.sort(a), np.sort(b)) for a, b in skf.split(np.zeros(len(y)), y)]


def _run_fold(dataset, variables, settings, config, classes, positive, r, k, tr, va, te, seed, space):
    mode = settings["mode"]
    if space is None:
        space = build_space(dataset.subset(tr), variables, settings["zlevels"], settings["relation"], mode,
                            settings["shrink"], settings["interpolation"], settings["tnorm"])

    def split(idx):
        return dataset.X[idx], dataset.y[idx], dataset.intervals[idx]

    model, results = fit_model(space, split(tr), split(va), config, classes, seed)
    records = []
    for name, idx in (("validation", va), ("test", te)):
        pred = model.predict(dataset.X[idx], dataset.intervals[idx])
        m = classification_metrics(dataset.y[idx], pred, positive)
        m.update({"repeat": r, "fold": k, "split": name, "n": int(len(idx)),
                  "abstained": int(sum(p is None for p in pred))})
        records.append(m)
    names = space.time_axis.interval_names
    traces = [
        {"repeat": r, "fold": k, "interval": names[q] if q is not None else "global",
         "trace": [float(v) for v in res.trace], "n_rules": len(res.rulebase)}
        for q, res in results.items()
    ]
    return records, traces


def run_experiment(dataset, variables, plan: CVPlan, config: GAConfig, mode="txai", positive=None,
                   zlevels=(0.2, 0.4, 0.6, 0.8, 1.0), relation="mamdani_product", shrink=0.5,
                   interpolation="linear", tnorm="product", leak_free=False, n_jobs=1) -> ExperimentReport:
    """Repeated nested cross-validation of the GA-learned classifier.

    Each repeat holds out a stratified test fraction; the remainder is split
    into ``inner_folds`` stratified folds, each serving once as validation
    set for a GA run trained on the other folds.  Every fold's model is
    scored on its validation fold and on the repeat's test set.

    Conditional distributions come from the whole dataset unless
    ``leak_free`` is set, in which case each fold fits them on its own
    training rows.
    """
    classes = list(dataset.classes)
    settings = {"mode": mode, "zlevels": tuple(zlevels), "relation": relation, "shrink": shrink,
                "interpolation": interpolation, "tnorm": tnorm}
    shared = None
    if not leak_free:
        shared = build_space(dataset, variables, zlevels, relation, mode, shrink, interpolation, tnorm)

    jobs = []
    root = np.random.SeedSequence(config.seed)
    rep_seeds = root.spawn(plan.repeats)
    for r, (outer_tr, te) in enumerate(outer_splits(dataset.y, plan)):
        fold_seeds = rep_seeds[r].spawn(plan.inner_folds)
        for k, (a, b) in enumerate(inner_splits(dataset.y[outer_tr], plan, r)):
            seed = int(fold_seeds[k].generate_state(1)[0])
            jobs.append((r, k, outer_tr[a], outer_tr[b], te, seed))

    run = delayed(_run_fold)
    results = Parallel(n_jobs=n_jobs)(
        run(dataset, variables, settings, config, classes, positive, r, k, tr, va, te, seed, shared)
        for r, k, tr, va, te, seed in jobs
    )
    records = [rec for recs, _ in results for rec in recs]
    traces = [t for _, ts in results for t in ts]
    metadata = {
        "mode": mode,
        "plan": asdict(plan),
        "ga": asdict(config),
        "relation": relation,
        "zlevels": list(zlevels),
        "shrink": shrink,
        "interpolation": interpolation,
        "tnorm": tnorm,
        "leak_free": leak_free,
        "distributions_from": "training rows of each fold" if leak_free else "entire dataset",
        "n_instances": len(dataset),
        "classes": [str(c) for c in classes],
        "positive": positive,
    }
    return ExperimentReport(mode, records, traces, metadata)


def fit_dataset(dataset, variables, config: GAConfig, mode="txai", validation_fraction=0.1,
                zlevels=(0.2, 0.4, 0.6, 0.8, 1.0), relation="mamdani_product", shrink=0.5,
                interpolation="linear", tnorm="product", output="Output"):
    """Fit one model on a whole dataset with a stratified validation hold-out.

    Distributions use every row; the GA trains rule weights on the rest
    and scores fitness on the hold-out.  Returns ``(model, results)``.
    """
    y = np.asarray(dataset.y, dtype=str)
    _check_strata(y, 2, "validation hold-out")
    sss = StratifiedShuffleSplit(n_splits=1, test_size=validation_fraction, random_state=config.seed)
    tr, va = (np.sort(a) for a in next(sss.split(np.zeros(len(y)), y)))
    space = build_space(dataset, variables, zlevels, relation, mode, shrink, interpolation, tnorm)

    def split(idx):
        return dataset.X[idx], dataset.y[idx], dataset.intervals[idx]

    return fit_model(space, split(tr), split(va), config, dataset.classes, config.seed, output)
