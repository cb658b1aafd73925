import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from txai import golden
from txai.errors import ConfigurationError, DomainError, InputError
from txai.fuzzy import ConceptualLabel, LinguisticVariable, MembershipFunction
from txai.inference import (
    InferenceSpace,
    Rule,
    RuleBase,
    TXAIModel,
    association_degree,
    classify,
    classify_gt2_baseline,
    firing_strength,
    membership_degree,
    rule_weight,
    rule_weights,
    select_winners,
    weights_from_firing,
    with_weights,
)
from txai.temporal import ConditionalDistribution, TemporalFuzzySets, TimeAxis, TT2FS

Z = golden.ZLEVELS


def example_space():
    """Sets whose Morning envelopes at (19.7, 4.3) equal the worked example's degrees."""
    axis = TimeAxis.hours()
    point = {"Feature1": 19.7, "Feature2": 4.3}
    variables, sets = [], []
    for name in golden.VARIABLES:
        mf = MembershipFunction.gaussian(point[name], 10.0)
        var = LinguisticVariable(name, (0.0, 40.0), tuple(ConceptualLabel(l, mf) for l in golden.LABELS))
        variables.append(var)
        row = []
        for j, lab in enumerate(golden.LABELS):
            lo, hi = golden.DEGREES[name][lab]
            fb = np.zeros((3, 5, 2))
            fb[:, :, 0], fb[:, :, 1] = lo, hi
            dist = ConditionalDistribution(lab, (1.0,) * 24, axis)
            row.append(TT2FS(var, j, axis, dist, Z, "mamdani_product", fb))
        sets.append(tuple(row))
    fs = TemporalFuzzySets(tuple(variables), axis, Z, "mamdani_product", tuple(sets))
    return InferenceSpace(fs, axis)


def example_rules():
    return [
        Rule(ants, cons, tuple(zip(lo, hi)), "Morning")
        for (ants, cons), (lo, hi) in zip(golden.RULES, golden.RULE_WEIGHTS)
    ]


INSTANCE = {"Feature1": 19.7, "Feature2": 4.3}


# -- worked example through the object API --------------------------------------


def test_membership_degree_examples():
    sp = example_space()
    low1 = sp.fsets.sets[0][0]
    assert membership_degree(low1, 19.7, 0, 2) == pytest.approx((0.54, 0.64))
    med2 = sp.fsets.sets[1][1]
    assert membership_degree(med2, 4.3, 0, 0) == pytest.approx((0.50, 0.58))
    with pytest.raises(DomainError):
        membership_degree(low1, 45.0, 0, 0)


def test_membership_zero_when_primary_zero():
    axis = TimeAxis.hours()
    mf = MembershipFunction.trapezoid(0, 0, 5, 6)
    other = MembershipFunction.trapezoid(5, 6, 10, 10)
    var = LinguisticVariable("V", (0, 10), (ConceptualLabel("A", mf), ConceptualLabel("B", other)))
    from txai.temporal import build_tt2fs

    s = build_tt2fs(var, 0, axis, ConditionalDistribution("A", tuple(np.linspace(0.1, 1, 24)), axis))
    assert membership_degree(s, 8.0, 1, 3) == (0.0, 0.0)


def test_firing_strength_examples():
    sp = example_space()
    r1, r2, _ = example_rules()
    assert firing_strength(sp, r1, INSTANCE, 0, 2)[0] == pytest.approx(0.297)
    assert firing_strength(sp, r2, INSTANCE, 0, 0)[1] == pytest.approx(0.447, abs=1e-3)
    single = Rule((("Feature2", "High"),), "Output1")
    assert firing_strength(sp, single, INSTANCE, 0, 4) == pytest.approx((0.44, 0.49))


def test_firing_missing_variable():
    sp = example_space()
    with pytest.raises(InputError):
        firing_strength(sp, example_rules()[0], {"Feature1": 19.7}, 0, 0)


def test_association_examples():
    sp = example_space()
    rules = example_rules()
    crisp, lo, hi = association_degree(sp, rules[1], INSTANCE, 0)
    assert hi[0] == pytest.approx(0.326, abs=1e-3)
    got = [association_degree(sp, r, INSTANCE, 0)[0] for r in rules]
    assert got == pytest.approx(golden.EXPECTED_CRISP, abs=2e-3)
    zero = Rule((("Feature1", "Low"),), "Output2", tuple((0.0, 0.0) for _ in Z))
    assert association_degree(sp, zero, INSTANCE, 0)[0] == 0.0


def test_classify_example():
    sp = example_space()
    pred = classify(sp, RuleBase(tuple(example_rules()), Z, "Morning"), INSTANCE, 0)
    assert pred.label == "Output1" and pred.rule_index == 1 and not pred.abstained
    assert len(pred.h) == 3


def test_golden_module():
    res = golden.run_golden()
    assert res.ok, res.report()
    assert res.label == "Output1" and res.winner == 1


# -- rule weights ---------------------------------------------------------------


def brute_rw(sp, rule, X, y, q):
    """Double loop over instances and levels."""
    I = len(sp.zlevels)
    out = np.zeros((I, 2))
    for i in range(I):
        for b in range(2):
            num = den = 0.0
            for x, lab in zip(X, y):
                w = firing_strength(sp, rule, x, q, i)[b]
                den += w
                if lab == rule.consequent:
                    num += w
            conf = num / den if den > 0 else 0.0
            out[i, b] = conf * num / len(X)
    return np.sort(out, axis=1)


def test_rule_weights_match_oracle(synthetic_ds, synthetic_fsets):
    sp = InferenceSpace(synthetic_fsets, synthetic_ds.axis)
    rng = np.random.default_rng(0)
    idx = rng.choice(np.flatnonzero(synthetic_ds.intervals == 1), 10, replace=False)
    X, y = synthetic_ds.X[idx], synthetic_ds.y[idx]
    rules = [
        Rule((("Light", "High"),), "Occupied"),
        Rule((("Temperature", "Low"), ("CO2", "Low")), "NotOccupied"),
        Rule((("Temperature", "Medium"), ("Light", "Low"), ("CO2", "High")), "Occupied"),
    ]
    for r in rules:
        got = rule_weights(sp, r, X, y, np.full(10, 1))
        assert got == pytest.approx(brute_rw(sp, r, X, y, 1), abs=1e-12)
        assert rule_weight(sp, r, X, y, np.full(10, 1), 2) == pytest.approx(tuple(got[2]))


def test_confidence_one_and_zero_firing():
    W = np.array([[[0.2, 0.4]], [[0.5, 0.6]], [[0.0, 0.0]]])
    rw = weights_from_firing(W, np.array([True, True, False]), 3)
    # confidence is 1, so RW equals the support
    assert rw[0] == pytest.approx([0.7 / 3, 1.0 / 3])
    assert not weights_from_firing(np.zeros((4, 2, 2)), np.array([True, False, True, False]), 4).any()
    assert weights_from_firing(np.zeros((0, 2, 2)), np.zeros(0, bool), 1).shape == (2, 2)


def test_with_weights_and_training_error(synthetic_ds, synthetic_fsets):
    sp = InferenceSpace(synthetic_fsets, synthetic_ds.axis)
    rules = with_weights(sp, [Rule((("Light", "High"),), "Occupied")], synthetic_ds.X, synthetic_ds.y,
                         synthetic_ds.intervals)
    assert rules[0].weights is not None and rules[0].top_weight() > 0
    with pytest.raises(InputError):
        rule_weights(sp, rules[0], np.zeros((0, 3)), [], [])


# -- classification -------------------------------------------------------------


def test_select_winners_ties_and_abstain():
    # rows are rules, columns instances
    H = np.array([[0.3, 0.0, 0.2], [0.3, 0.0, 0.2], [0.1, 0.0, 0.2]])
    assert select_winners(H, [0.5, 0.9, 0.1]).tolist() == [1, -1, 1]
    # equal weights fall back to the lower index
    assert select_winners(H, [0.4, 0.4, 0.4]).tolist() == [0, -1, 0]
    assert select_winners(np.zeros((0, 2)), []).tolist() == [-1, -1]


def test_classify_abstains():
    sp = example_space()
    rb = RuleBase((Rule((("Feature1", "Low"),), "Output2", tuple((0.0, 0.0) for _ in Z)),), Z)
    pred = classify(sp, rb, INSTANCE, 0)
    assert pred.abstained and pred.rule_index == -1
    with pytest.raises(ConfigurationError):
        classify(sp, RuleBase((), Z), INSTANCE, 0)


def test_single_rule_base():
    sp = example_space()
    pred = classify(sp, RuleBase((example_rules()[2],), Z), INSTANCE, 0)
    assert pred.label == "Output1"


def test_random_rulebase_matches_oracle(synthetic_ds, synthetic_fsets):
    sp = InferenceSpace(synthetic_fsets, synthetic_ds.axis)
    rng = np.random.default_rng(4)
    names, labels = sp.var_names, ["Low", "Medium", "High"]
    rules, seen = [], set()
    while len(rules) < 5:
        k = int(rng.integers(1, 4))
        vs = sorted(rng.choice(3, k, replace=False))
        r = Rule(tuple((names[v], labels[rng.integers(3)]) for v in vs), ["NotOccupied", "Occupied"][rng.integers(2)])
        if r.key not in seen:
            seen.add(r.key)
            rules.append(r)
    rules = with_weights(sp, rules, synthetic_ds.X, synthetic_ds.y, synthetic_ds.intervals)
    rb = RuleBase(tuple(rules), Z)
    model = TXAIModel(sp, (rb, rb, rb), ("NotOccupied", "Occupied"))
    idx = rng.choice(len(synthetic_ds), 50, replace=False)
    labels_bulk, winners = model.predict_detail(synthetic_ds.X[idx], synthetic_ds.intervals[idx])
    for k, i in enumerate(idx):
        x, q = synthetic_ds.X[i], synthetic_ds.intervals[i]
        hs = [association_degree(sp, r, x, q)[0] for r in rules]
        best = max(hs)
        if best <= 0:
            assert winners[k] == -1
            continue
        cands = [p for p, h in enumerate(hs) if h == best]
        want = max(cands, key=lambda p: (rules[p].top_weight(), -p))
        assert winners[k] == want and labels_bulk[k] == rules[want].consequent
        assert classify(sp, rb, x, q).rule_index == want


def test_gt2_space_and_rule_text(synthetic_ds, synthetic_vars):
    from txai.learner import build_space

    sp = build_space(synthetic_ds, synthetic_vars, Z, "mamdani_product", mode="gt2")
    assert sp.var_names[-1] == "Time"
    assert sp.col_names(3) == ["Morning", "Daytime", "Evening"]
    rule = Rule((("Light", "High"), ("Time", "Daytime")), "Occupied")
    assert rule.to_text("Room") == "IF Light is High AND Time is Daytime THEN Room is Occupied"
    (rule,) = with_weights(sp, [rule], synthetic_ds.X, synthetic_ds.y, synthetic_ds.intervals)
    rb = RuleBase((rule,), Z)
    day = synthetic_ds.X[(synthetic_ds.intervals == 1) & (synthetic_ds.y == "Occupied")][0]
    assert classify_gt2_baseline(sp, rb, day, 1).label == "Occupied"
    # the indicator zeroes the rule outside its interval
    assert classify_gt2_baseline(sp, rb, day, 0).abstained
    with pytest.raises(ConfigurationError):
        classify_gt2_baseline(InferenceSpace(sp.fsets, sp.fsets.axis), rb, day, 0)


def test_modes_coincide_on_single_interval(synthetic_ds, synthetic_vars):
    flat = TimeAxis.single_interval(tuple(range(24)), "All", 24)
    fs = TemporalFuzzySets.fit(synthetic_ds.X, synthetic_ds.points, synthetic_vars, flat, Z)
    tx, g2 = InferenceSpace(fs, flat, "txai"), InferenceSpace(fs, flat, "gt2")
    rules = with_weights(tx, [Rule((("Light", "High"),), "Occupied"), Rule((("Light", "Low"),), "NotOccupied")],
                         synthetic_ds.X, synthetic_ds.y, np.zeros(len(synthetic_ds), int))
    rb = RuleBase(tuple(rules), Z)
    for x in synthetic_ds.X[::97]:
        assert classify(tx, rb, x, 0).label == classify_gt2_baseline(g2, rb, x, 0).label


# -- validation and serialisation ---------------------------------------------------


def test_rule_validation():
    with pytest.raises(ConfigurationError):
        Rule((), "A")
    with pytest.raises(ConfigurationError):
        Rule((("A", "x"), ("B", "x"), ("C", "x"), ("D", "x")), "A")
    with pytest.raises(ConfigurationError):
        Rule((("A", "x"), ("A", "y")), "A")
    with pytest.raises(ConfigurationError):
        Rule((("A", "x"),), "A", ((0.5, 0.4),))
    r = Rule((("A", "x"),), "c")
    with pytest.raises(ConfigurationError):
        RuleBase((r, r), Z)


def test_unknown_antecedent():
    sp = example_space()
    with pytest.raises(ConfigurationError):
        sp.encode(Rule((("Feature9", "Low"),), "A"))
    with pytest.raises(ConfigurationError):
        sp.encode(Rule((("Feature1", "Huge"),), "A"))


def test_rulebase_roundtrip_and_text():
    rb = RuleBase(tuple(example_rules()), Z, "Morning")
    back = RuleBase.from_dict(json.loads(json.dumps(rb.to_dict())))
    assert back == rb
    text = rb.to_text("Output")
    assert text.splitlines()[0] == "# interval: Morning"
    assert "R2: IF Feature1 is Medium AND Feature2 is Medium THEN Output is Output1  [RW=" in text


def test_model_roundtrip(synthetic_ds, synthetic_fsets):
    sp = InferenceSpace(synthetic_fsets, synthetic_ds.axis)
    rules = with_weights(sp, [Rule((("Light", "High"),), "Occupied"), Rule((("CO2", "Low"),), "NotOccupied")],
                         synthetic_ds.X, synthetic_ds.y, synthetic_ds.intervals)
    rbs = tuple(RuleBase(tuple(rules), Z, n) for n in ("Morning", "Daytime", "Evening"))
    model = TXAIModel(sp, rbs, ("NotOccupied", "Occupied"), "Occupancy")
    back = TXAIModel.from_dict(json.loads(json.dumps(model.to_dict())))
    a = model.predict(synthetic_ds.X, synthetic_ds.intervals)
    b = back.predict(synthetic_ds.X, synthetic_ds.intervals)
    assert a.tolist() == b.tolist()
    assert back.to_text() == model.to_text()
    assert model.predict(np.zeros((0, 3)), []).shape == (0,)


# -- properties --------------------------------------------------------------------


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=12, max_size=12), st.lists(st.booleans(), min_size=3, max_size=3))
def test_bounds_propagate(vals, mask):
    a = np.array(vals).reshape(3, 2, 2)
    W = np.sort(a, axis=-1)  # firing (n=3, I=2, 2) with lower <= upper
    RW = weights_from_firing(W, np.array(mask), 3)
    assert np.all(RW[:, 0] <= RW[:, 1]) and np.all((0 <= RW) & (RW <= 1))
    H = W * RW[None]
    assert np.all(H[..., 0] <= H[..., 1])


@settings(max_examples=300, deadline=None)
@given(st.lists(st.one_of(st.just(0.0), st.floats(1e-300, 1)), min_size=6, max_size=6), st.floats(0.01, 100))
def test_argmax_invariant_under_scaling(hs, c):
    H = np.array(hs).reshape(3, 2)
    tw = [0.3, 0.2, 0.1]
    assert select_winners(H, tw).tolist() == select_winners(H * c, tw).tolist()


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=10, max_size=10), st.integers(0, 4))
def test_support_numerator_monotone(vals, drop):
    W = np.sort(np.array(vals).reshape(5, 1, 2), axis=-1)
    y = np.array([True, False, True, True, False])
    num = W[y].sum(axis=0)
    keep = np.arange(5) != drop
    assert np.all(W[keep][y[keep]].sum(axis=0) <= num + 1e-15)
