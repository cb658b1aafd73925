"""Replay of a hand-worked two-feature classification example.

Membership degrees and rule weights are given; firing strengths,
association degrees, crisp association values and the predicted label are
recomputed and compared against the hand-worked figures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .inference import crisp_association, firing_array, select_winners

ZLEVELS = (0.2, 0.4, 0.6, 0.8, 1.0)
VARIABLES = ("Feature1", "Feature2")
LABELS = ("Low", "Medium", "High")

# degrees[var][label] = (lower per z, upper per z); instance Feature1=19.7, Feature2=4.3
DEGREES = {
    "Feature1": {
        "Low": ((0.50, 0.52, 0.54, 0.52, 0.51), (0.61, 0.63, 0.64, 0.61, 0.60)),
        "Medium": ((0.63, 0.63, 0.65, 0.63, 0.61), (0.77, 0.78, 0.78, 0.77, 0.75)),
        "High": ((0.65, 0.64, 0.64, 0.63, 0.63), (0.69, 0.69, 0.68, 0.68, 0.67)),
    },
    "Feature2": {
        "Low": ((0.31, 0.31, 0.31, 0.31, 0.31), (0.32, 0.32, 0.32, 0.32, 0.32)),
        "Medium": ((0.50, 0.55, 0.55, 0.54, 0.53), (0.58, 0.59, 0.59, 0.58, 0.57)),
        "High": ((0.40, 0.40, 0.40, 0.42, 0.44), (0.43, 0.43, 0.46, 0.46, 0.49)),
    },
}

RULES = (
    ((("Feature1", "Low"), ("Feature2", "Medium")), "Output2"),
    ((("Feature1", "Medium"), ("Feature2", "Medium")), "Output1"),
    ((("Feature1", "High"), ("Feature2", "High")), "Output1"),
)

RULE_WEIGHTS = (
    ((0.31, 0.30, 0.30, 0.29, 0.27), (0.35, 0.34, 0.34, 0.31, 0.30)),
    ((0.69, 0.69, 0.68, 0.66, 0.66), (0.73, 0.73, 0.72, 0.72, 0.72)),
    ((0.22, 0.21, 0.21, 0.21, 0.21), (0.24, 0.22, 0.22, 0.22, 0.22)),
)

EXPECTED_FIRING = (
    ((0.25, 0.286, 0.297, 0.281, 0.27), (0.354, 0.372, 0.378, 0.354, 0.342)),
    ((0.315, 0.347, 0.358, 0.34, 0.323), (0.447, 0.46, 0.46, 0.447, 0.427)),
    ((0.26, 0.256, 0.256, 0.265, 0.277), (0.297, 0.297, 0.313, 0.313, 0.328)),
)

EXPECTED_ASSOCIATION = (
    ((0.077, 0.086, 0.089, 0.081, 0.073), (0.124, 0.126, 0.128, 0.11, 0.103)),
    ((0.217, 0.239, 0.243, 0.225, 0.213), (0.326, 0.336, 0.331, 0.322, 0.308)),
    ((0.057, 0.054, 0.054, 0.056, 0.058), (0.071, 0.065, 0.069, 0.069, 0.072)),
)

EXPECTED_CRISP = (0.097, 0.274, 0.063)
EXPECTED_WINNER = 1
EXPECTED_LABEL = "Output1"

TOL = 0.001
TOL_CRISP = 0.002


@dataclass
class GoldenResult:
    firing: np.ndarray  # (rules, z, 2)
    association: np.ndarray
    crisp: np.ndarray
    winner: int
    label: str
    diffs: list  # rows that exceed tolerance

    @property
    def ok(self) -> bool:
        return not self.diffs

    def report(self) -> str:
        lines = []
        for r in range(len(RULES)):
            lo = " ".join(f"{v:.4f}" for v in self.association[r, :, 0])
            hi = " ".join(f"{v:.4f}" for v in self.association[r, :, 1])
            lines.append(f"R{r + 1}: h_lower [{lo}] h_upper [{hi}] crisp {self.crisp[r]:.5f}")
        lines.append(f"winner R{self.winner + 1} -> {self.label}")
        if self.diffs:
            lines.append(f"{len(self.diffs)} value(s) outside tolerance:")
            for d in self.diffs:
                lines.append("  " + ",".join(str(v) for v in d))
        else:
            lines.append("diff: none")
        return "\n".join(lines)


def degree_tensor() -> np.ndarray:
    """Shape (1, V, J, I, 2) as the inference kernels expect."""
    D = np.zeros((1, len(VARIABLES), len(LABELS), len(ZLEVELS), 2))
    for v, var in enumerate(VARIABLES):
        for j, lab in enumerate(LABELS):
            lo, hi = DEGREES[var][lab]
            D[0, v, j, :, 0] = lo
            D[0, v, j, :, 1] = hi
    return D


def _encode(ants):
    return tuple((VARIABLES.index(v), LABELS.index(c)) for v, c in ants)


def run_golden() -> GoldenResult:
    D = degree_tensor()
    firing, assoc, crisp, tops = [], [], [], []
    for (ants, _), (rw_lo, rw_hi) in zip(RULES, RULE_WEIGHTS):
        W = firing_array(D, _encode(ants), "product")  # (1, I, 2)
        RW = np.stack([rw_lo, rw_hi], axis=-1)
        firing.append(W[0])
        assoc.append(W[0] * RW)
        crisp.append(float(crisp_association(W, RW, ZLEVELS)[0]))
        tops.append(0.5 * (rw_lo[-1] + rw_hi[-1]))
    firing, assoc, crisp = np.array(firing), np.array(assoc), np.array(crisp)
    winner = int(select_winners(crisp[:, None], tops)[0])
    label = RULES[winner][1] if winner >= 0 else None

    diffs = []
    for name, got, want in (("firing", firing, EXPECTED_FIRING), ("association", assoc, EXPECTED_ASSOCIATION)):
        want = np.transpose(np.array(want), (0, 2, 1))  # -> (rules, z, bound)
        for r, i, b in np.argwhere(np.abs(got - want) > TOL + 1e-12):
            diffs.append((name, f"R{r + 1}", ZLEVELS[i], ("lower", "upper")[b], float(want[r, i, b]),
                          round(float(got[r, i, b]), 6)))
    for r, (g, w) in enumerate(zip(crisp, EXPECTED_CRISP)):
        if abs(g - w) > TOL_CRISP + 1e-12:
            diffs.append(("crisp", f"R{r + 1}", "", "", w, round(float(g), 6)))
    if winner != EXPECTED_WINNER or label != EXPECTED_LABEL:
        diffs.append(("winner", f"R{winner + 1}", "", "", f"R{EXPECTED_WINNER + 1}", label))
    return GoldenResult(firing, assoc, crisp, winner, label, diffs)
