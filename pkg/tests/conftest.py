import os
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np
import pytest

from txai.data import Dataset, IngestSchema, ingest
from txai.fuzzy import ConceptualLabel, LinguisticVariable, MembershipFunction, fit_variable
from txai.synthetic import simulate, write_csv
from txai.temporal import TimeAxis, TemporalFuzzySets

OCC_SCHEMA = IngestSchema(label_names={"0": "NotOccupied", "1": "Occupied"})
LMH = ("Low", "Medium", "High")


def occupancy_path():
    """Location of the public occupancy training file, if present."""
    env = os.environ.get("TXAI_OCCUPANCY_DATA")
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[1] / "data" / "datatraining.txt"


def three_label_var(name="F", lo=0.0, hi=30.0):
    mid = 0.5 * (lo + hi)
    s = (hi - lo) / 4
    cols = tuple(ConceptualLabel(n, MembershipFunction.gaussian(c, s)) for n, c in zip(LMH, (lo, mid, hi)))
    return LinguisticVariable(name, (lo, hi), cols)


@pytest.fixture(scope="session")
def hours_axis():
    return TimeAxis.hours()


@pytest.fixture(scope="session")
def synthetic_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("occ") / "synthetic.csv"
    return write_csv(path, simulate(n_days=8, step_minutes=5, seed=0))


@pytest.fixture(scope="session")
def synthetic_ds(synthetic_csv):
    return ingest(synthetic_csv, OCC_SCHEMA)


@pytest.fixture(scope="session")
def synthetic_vars(synthetic_ds):
    return [fit_variable(n, synthetic_ds.X[:, k], LMH) for k, n in enumerate(synthetic_ds.feature_names)]


@pytest.fixture(scope="session")
def synthetic_fsets(synthetic_ds, synthetic_vars):
    return TemporalFuzzySets.fit(synthetic_ds.X, synthetic_ds.points, synthetic_vars, synthetic_ds.axis)


def make_separable(n=600, seed=0):
    """Two features over the day; the class is 'Pos' exactly when Feature1 is in its High region."""
    rng = np.random.default_rng(seed)
    x1 = rng.uniform(0, 100, n)
    x2 = rng.uniform(0, 10, n)
    start = datetime(2020, 1, 6)
    stamps = tuple(start + timedelta(minutes=int(m)) for m in rng.integers(0, 7 * 24 * 60, n))
    X = np.column_stack([x1, x2])
    variables = [fit_variable("Feature1", x1, LMH), fit_variable("Feature2", x2, LMH)]
    from txai.fuzzy import argmax_cols

    y = np.where(argmax_cols(variables[0], x1) == 2, "Pos", "Neg").astype(object)
    return Dataset(("Feature1", "Feature2"), X, y, stamps, TimeAxis.hours()), variables


@pytest.fixture(scope="session")
def separable():
    return make_separable()


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Records the one-line verdict of an acceptance criterion."""
    def record(n, title, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {title}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
