import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from txai.errors import ConfigurationError, DomainError, InputError
from txai.fuzzy import ConceptualLabel, LinguisticVariable, MembershipFunction, argmax_cols
from txai.temporal import (
    RELATIONS,
    ConditionalDistribution,
    TemporalFuzzySets,
    TimeAxis,
    TT2FS,
    apply_relation,
    build_tt2fs,
    conditional_distribution,
    conditional_relative_frequency,
    eval_tmf,
    frequency_from_counts,
    interpolate,
    normalize_relation,
    tmf_grid,
    zlevel_alphas,
)

from conftest import three_label_var

FIG_COUNTS = [17, 20, 12, 11, 8, 11, 2, 0, 3, 7, 15, 19]
FIG_G = [0.85, 1.0, 0.6, 0.55, 0.4, 0.55, 0.1, 0.0, 0.15, 0.35, 0.75, 0.95]


def months_axis():
    seasons = (("Winter", (11, 0, 1)), ("Spring", (2, 3, 4)), ("Summer", (5, 6, 7)), ("Autumn", (8, 9, 10)))
    return TimeAxis(tuple(range(12)), seasons, period=12)


def single_col_var():
    mf = MembershipFunction.gaussian(8, 4)
    return LinguisticVariable("Temp", (0, 30), (ConceptualLabel("Cold", mf),))


# -- time axis ------------------------------------------------------------------


def test_hour_boundaries(hours_axis):
    names = hours_axis.interval_names
    assert names == ["Morning", "Daytime", "Evening"]
    assert names[hours_axis.interval_of_point(10)] == "Morning"
    assert names[hours_axis.interval_of_point(11)] == "Daytime"
    assert names[hours_axis.interval_of_point(18)] == "Daytime"
    assert names[hours_axis.interval_of_point(19)] == "Evening"
    assert hours_axis.period == 24


def test_wrapping_interval_allowed():
    ax = months_axis()
    assert ax.interval_of_point(0) == ax.interval_of_point(11) == 0


@pytest.mark.parametrize("intervals", [
    (("A", (0, 1)), ("B", (2,))),  # misses point 3
    (("A", (0, 1, 2)), ("B", (2, 3))),  # overlap
    (("A", (0, 2)), ("B", (1, 3))),  # not contiguous
    (("A", ()), ("B", (0, 1, 2, 3))),  # empty interval
    (("A", (0, 1)), ("A", (2, 3))),  # duplicate names
])
def test_axis_partition_errors(intervals):
    with pytest.raises(ConfigurationError):
        TimeAxis((0, 1, 2, 3), intervals, period=4)


def test_axis_roundtrip(hours_axis):
    assert TimeAxis.from_dict(hours_axis.to_dict()) == hours_axis


# -- conditional relative frequency -----------------------------------------


def test_frequency_golden():
    assert frequency_from_counts(FIG_COUNTS).tolist() == FIG_G


def test_frequency_from_instances():
    # a one-label variable wins everywhere, so counts are just per-point instance counts
    var = single_col_var()
    inst = [(5.0, n) for n, c in enumerate(FIG_COUNTS) for _ in range(c)]
    g = conditional_relative_frequency(inst, var, "Cold", months_axis())
    assert g.tolist() == FIG_G


def test_single_point_axis():
    ax = TimeAxis((0.0,), (("All", (0,)),), period=1.0)
    g = conditional_relative_frequency([(1.0, 0), (2.0, 0)], single_col_var(), 0, ax)
    assert g.tolist() == [1.0]


def test_frequency_matches_tally_oracle():
    var = three_label_var()
    ax = TimeAxis(tuple(range(6)), (("A", (0, 1, 2)), ("B", (3, 4, 5))), period=6)
    rng = np.random.default_rng(3)
    xs, pts = rng.uniform(0, 30, 300), rng.integers(0, 6, 300)
    for j, name in enumerate(var.col_names):
        counts = [0] * 6
        for x, n in zip(xs, pts):
            mus = [c.mf(x) for c in var.cols]
            if max(range(3), key=lambda k: (mus[k], -k)) == j:
                counts[n] += 1
        top = max(counts)
        oracle = [c / top if top else 0.0 for c in counts]
        got = conditional_relative_frequency(zip(xs, pts), var, name, ax)
        assert got.tolist() == pytest.approx(oracle, abs=0)


def test_unobserved_label_all_zero():
    var = three_label_var()
    ax = TimeAxis(tuple(range(4)), (("A", (0, 1, 2, 3)),), period=4)
    g = conditional_relative_frequency([(0.0, 1), (1.0, 2)], var, "High", ax)
    assert g.tolist() == [0, 0, 0, 0]
    dist = ConditionalDistribution("High", tuple(g), ax)
    assert not dist.observed and dist(1.5) == 0.0


def test_time_point_out_of_range():
    with pytest.raises(InputError):
        conditional_relative_frequency([(1.0, 12)], single_col_var(), 0, months_axis())


# -- interpolation ------------------------------------------------------------


def test_interpolate_constant():
    ax = months_axis()
    f = interpolate(np.full(12, 0.5), ax)
    assert np.allclose(f(np.linspace(0, 11.99, 500)), 0.5)


def test_interpolate_linear_midpoint():
    ax = TimeAxis((0, 1, 2, 3), (("A", (0, 1, 2, 3)),), period=4)
    f = interpolate(np.array([0.2, 0.8, 0.0, 0.0]), ax)
    assert f(0.5) == pytest.approx(0.5)


def test_interpolate_passes_through_data_and_wraps():
    ax = months_axis()
    for method in ("linear", "monotone_cubic"):
        f = interpolate(np.array(FIG_G), ax, method)
        assert np.allclose(f(np.arange(12.0)), FIG_G)
        # between December and the next January
        assert f(11.5) == pytest.approx(f(-0.5))
        assert f(11.5) == pytest.approx(0.9, abs=0.06)


def test_monotone_cubic_no_overshoot():
    f = interpolate(np.array(FIG_G), months_axis(), "monotone_cubic")
    vals = f(np.linspace(0, 12, 10_000))
    assert vals.min() >= 0.0 and vals.max() <= 1.0


def test_interpolate_rejects_bad_input():
    with pytest.raises(InputError):
        interpolate(np.array([0.5, 1.5] + [0.0] * 10), months_axis())
    with pytest.raises(ConfigurationError):
        interpolate(np.zeros(12), months_axis(), "spline9")


# -- relations ----------------------------------------------------------------


@pytest.mark.parametrize("rel,t,a,want", [
    ("godel", 0.3, 0.7, 1.0),
    ("godel", 0.7, 0.3, 0.3),
    ("lukasiewicz", 0.9, 0.2, 0.3),
    ("mamdani_product", 0.8, 0.5, 0.4),
    ("mamdani_min", 0.8, 0.5, 0.5),
    ("gaines_rescher", 0.6, 0.5, 0.0),
    ("gaines_rescher", 0.4, 0.5, 1.0),
])
def test_relations(rel, t, a, want):
    assert apply_relation(rel, t, a) == pytest.approx(want)


def test_relation_input_errors():
    with pytest.raises(InputError):
        apply_relation("godel", 1.2, 0.5)
    with pytest.raises(InputError):
        apply_relation("godel", 0.2, -0.1)
    with pytest.raises(ConfigurationError):
        normalize_relation("zadeh-max")


def test_relation_names_accept_hyphens():
    assert normalize_relation("mamdani-product") == "mamdani_product"
    assert normalize_relation("Gaines-Rescher") == "gaines_rescher"


# -- TT2FS ------------------------------------------------------------------


def fig_set(rel="mamdani_product", method="linear"):
    ax = months_axis()
    var = single_col_var()
    dist = ConditionalDistribution("Cold", tuple(FIG_G), ax, method)
    return build_tt2fs(var, "Cold", ax, dist, rel=rel)


def test_eval_tmf_examples():
    s = fig_set()
    # mu(15) = 0.2163 for gaussian(8, 4); f(January) = 0.85
    assert eval_tmf(s, 15.0, 0.0) == pytest.approx(0.2163 * 0.85, abs=1e-4)
    assert eval_tmf(s, 15.0, 0.0) == pytest.approx(0.1839, abs=1e-4)
    assert eval_tmf(s, 8.0, 1.0) == pytest.approx(1.0)
    zero = build_tt2fs(LinguisticVariable("T", (0, 30), (
        ConceptualLabel("A", MembershipFunction.trapezoid(0, 0, 5, 6)),
        ConceptualLabel("B", MembershipFunction.trapezoid(5, 6, 30, 30)))), "A", s.axis, s.dist)
    for rel in ("mamdani_product", "mamdani_min"):
        assert eval_tmf(zero, 20.0, 3.3, rel) == 0.0


def test_eval_tmf_domain_errors():
    s = fig_set()
    with pytest.raises(DomainError):
        eval_tmf(s, 15.0, 12.0)
    with pytest.raises(DomainError):
        eval_tmf(s, 31.0, 1.0)


def test_tmf_grid_shape_and_values():
    s = fig_set()
    xs, ts = np.linspace(0, 30, 7), np.array([0.0, 1.0, 5.5])
    grid = tmf_grid(s, xs, ts)
    assert grid.shape == (3, 7)
    assert grid[1, 2] == pytest.approx(eval_tmf(s, xs[2], 1.0))


def test_constant_interval_collapses():
    ax = months_axis()
    dist = ConditionalDistribution("Cold", (0.5,) * 12, ax)
    s = build_tt2fs(single_col_var(), 0, ax, dist)
    x = np.linspace(0, 30, 31)
    for q in range(4):
        for i in range(5):
            lo, hi = s.envelope(q, i, x)
            assert np.array_equal(lo, hi)


def test_first_level_spans_min_max():
    s = fig_set()
    x = np.linspace(0, 30, 31)
    mu = s.mf(x)
    g = np.array(FIG_G)
    for q in range(4):
        fq = g[list(s.axis.points_of(q))]
        lo, hi = s.envelope(q, 0, x)
        assert np.allclose(lo, mu * fq.min())
        assert np.allclose(hi, mu * fq.max())


def test_three_point_quantile_table():
    ax = TimeAxis((0, 1, 2), (("A", (0, 1, 2)),), period=3)
    dist = ConditionalDistribution("Cold", (0.2, 0.6, 1.0), ax)
    s = build_tt2fs(single_col_var(), 0, ax, dist)
    # alphas 0, 1/16, 1/8, 3/16, 1/4; linear quantiles of {0.2, 0.6, 1.0} are 0.2 + 0.8 * alpha
    assert s.freq_bounds[0, :, 0] == pytest.approx([0.2, 0.25, 0.3, 0.35, 0.4])
    assert s.freq_bounds[0, :, 1] == pytest.approx([1.0, 0.95, 0.9, 0.85, 0.8])


def test_alphas():
    assert zlevel_alphas((0.2, 0.4, 0.6, 0.8, 1.0)).tolist() == pytest.approx([0, 0.0625, 0.125, 0.1875, 0.25])
    assert zlevel_alphas((1.0,)).tolist() == [0.0]


@pytest.mark.parametrize("z", [(), (0.0, 0.5), (0.5, 0.4), (0.5, 1.2)])
def test_bad_zlevels(z):
    with pytest.raises(ConfigurationError):
        build_tt2fs(single_col_var(), 0, months_axis(), ConditionalDistribution("Cold", tuple(FIG_G), months_axis()), z)


def test_axis_mismatch():
    other = TimeAxis(tuple(range(12)), (("All", tuple(range(12))),), period=12)
    dist = ConditionalDistribution("Cold", tuple(FIG_G), other)
    with pytest.raises(ConfigurationError):
        build_tt2fs(single_col_var(), 0, months_axis(), dist)


def test_unobserved_set_is_zero():
    ax = months_axis()
    s = build_tt2fs(single_col_var(), 0, ax, ConditionalDistribution("Cold", (0.0,) * 12, ax))
    assert not s.envelopes(np.linspace(0, 30, 11)).any()


@pytest.mark.parametrize("rel", RELATIONS)
def test_nesting_all_relations(rel):
    s = fig_set(rel)
    env = s.envelopes(np.linspace(0, 30, 61))  # (Q, I, 2, B)
    assert np.all(env[:, :, 0] <= env[:, :, 1])
    assert np.all(np.diff(env[:, :, 0], axis=1) >= -1e-12)
    assert np.all(np.diff(env[:, :, 1], axis=1) <= 1e-12)


def test_tt2fs_roundtrip():
    s = fig_set(method="monotone_cubic")
    back = TT2FS.from_dict(s.to_dict())
    assert back == s
    x = np.linspace(0, 30, 13)
    assert np.array_equal(back.envelopes(x), s.envelopes(x))


def test_fsets_fit_and_roundtrip(synthetic_ds, synthetic_fsets):
    fs = synthetic_fsets
    assert fs.var_names == ["Temperature", "Light", "CO2"]
    D = fs.degrees(synthetic_ds.X[:50])
    assert D.shape == (50, 3, 3, 3, 5, 2)
    assert np.all((0 <= D) & (D <= 1)) and np.all(D[..., 0] <= D[..., 1])
    back = TemporalFuzzySets.from_dict(fs.to_dict())
    assert np.array_equal(back.degrees(synthetic_ds.X[:50]), D)
    # each variable has at least one label whose frequency peaks at 1
    for row in fs.sets:
        assert max(max(s.dist.g) for s in row) == 1.0


def test_distribution_oracle_on_synthetic(synthetic_ds, synthetic_fsets):
    v = 1
    var = synthetic_fsets.variables[v]
    win = argmax_cols(var, synthetic_ds.X[:, v])
    for j in range(3):
        counts = np.bincount(synthetic_ds.points[win == j], minlength=24)
        want = counts / counts.max() if counts.max() else counts
        assert synthetic_fsets.sets[v][j].dist.g == pytest.approx(want.tolist())


def test_conditional_distribution_helper():
    var = single_col_var()
    d = conditional_distribution([(5.0, 0), (5.0, 0), (6.0, 3)], var, 0, months_axis())
    assert d.col == "Cold" and d.g[0] == 1.0 and d.g[3] == 0.5
    assert d.interval_scalar(0) == pytest.approx(1 / 3)
    assert d.interval_scalar(1, "max") == 0.5


# -- properties ------------------------------------------------------------------


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 30), st.floats(0, 11.999), st.sampled_from(RELATIONS))
def test_tmf_in_unit_interval(x, t, rel):
    assert 0.0 <= eval_tmf(fig_set(), x, t, rel) <= 1.0


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1),
       st.sampled_from(["mamdani_product", "mamdani_min"]))
def test_mamdani_monotone(t1, t2, a1, a2, rel):
    lo_t, hi_t = sorted((t1, t2))
    lo_a, hi_a = sorted((a1, a2))
    assert apply_relation(rel, lo_t, a1) <= apply_relation(rel, hi_t, a1)
    assert apply_relation(rel, t1, lo_a) <= apply_relation(rel, t1, hi_a)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 29.9), st.floats(0, 11.9), st.floats(-0.05, 0.05), st.floats(-0.05, 0.05))
def test_tmf_lipschitz(x, t, dx, dt):
    s = fig_set()
    x2, t2 = min(max(x + dx, 0), 30), min(max(t + dt, 0), 11.99)
    # gaussian slope <= 1/(sigma*sqrt(e)) ~ 0.152; linear f slope <= 0.4 per month
    bound = 0.16 * abs(x2 - x) + 0.41 * abs(t2 - t) + 1e-12
    assert abs(eval_tmf(s, x, t) - eval_tmf(s, x2, t2)) <= bound


def test_normality_at_grid_resolution():
    s = fig_set()
    for rel in ("mamdani_product", "mamdani_min"):
        grid = tmf_grid(s, np.linspace(0, 30, 301), np.arange(12.0), rel)
        assert grid.max() >= 1 - 1e-9
