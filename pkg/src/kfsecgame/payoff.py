"""Strategy enumeration and payoff matrix assembly for the sensor-selection game.

Both players pick nonempty sensor subsets; the payoff (paid by the filter to
the attacker) is the trace of the total state-estimation MSE at the attack
time: trace(P) plus trace(W Sigma_eff W^T) for the effective (used and
attacked) bias covariance.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .attacks import AllocationRule, AttackPlan, effective_sigma, make_plan
from .dynamics import SensorSubset, SensorSuite, SystemModel, kalman_recursion


@dataclass(frozen=True)
class PayoffMatrix:
    """Square payoff matrix over the display-ordered nonempty subsets."""

    subsets: tuple[SensorSubset, ...]
    L: np.ndarray
    attack_mode: AllocationRule
    budget_a2: float
    attack_time: int

    def __post_init__(self) -> None:
        mat = np.array(self.L, dtype=float)
        mat.setflags(write=False)
        object.__setattr__(self, "L", mat)
        object.__setattr__(self, "subsets", tuple(self.subsets))
        n = len(self.subsets)
        if self.L.shape != (n, n):
            raise ValueError("payoff matrix shape does not match the subset order")

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.subsets]


def enumerate_subsets(sensor_count: int) -> list[SensorSubset]:
    """All nonempty subsets in display order: by cardinality, then lexicographic.

    For three sensors this is z1, z2, z3, z1z2, z1z3, z2z3, z1z2z3.
    """
    if not 1 <= sensor_count <= 16:
        raise ValueError("sensor_count must be between 1 and 16")
    subsets = []
    for mask in range(1, 1 << sensor_count):
        subsets.append(SensorSubset([i + 1 for i in range(sensor_count) if mask >> i & 1]))
    subsets.sort(key=lambda s: (len(s), s.indices))
    return subsets


def payoff_entry(
    model: SystemModel,
    suite: SensorSuite,
    defender: SensorSubset,
    attacker: SensorSubset,
    a2: float,
    rule: AllocationRule,
    attack_time: int = 100,
) -> float:
    """Total-MSE trace when `defender` filters and `attacker` injects at `attack_time`.

    The attacker's allocation depends only on the attacked sensors' own noise
    variances (simultaneous move, no knowledge of the defender's choice); the
    filter then sees only the used-and-attacked block of the bias covariance.
    """
    fs = kalman_recursion(model, suite, defender, attack_time)
    plan = make_plan(suite, attacker, a2, rule)
    sig = effective_sigma(plan, defender)
    return float(np.trace(fs.P) + np.trace(fs.W @ sig @ fs.W.T))


def build_payoff_matrix(
    model: SystemModel,
    suite: SensorSuite,
    a2: float,
    rule: AllocationRule,
    attack_time: int = 100,
) -> PayoffMatrix:
    """Evaluate every defender/attacker subset pair into one payoff matrix.

    The defender's gain and covariance are computed once per row; attacker
    plans once per column.
    """
    subsets = enumerate_subsets(suite.size)
    plans: list[AttackPlan] = [make_plan(suite, s, a2, rule) for s in subsets]
    n = len(subsets)
    L = np.empty((n, n))
    for i, defender in enumerate(subsets):
        fs = kalman_recursion(model, suite, defender, attack_time)
        base = float(np.trace(fs.P))
        for j, plan in enumerate(plans):
            sig = effective_sigma(plan, defender)
            L[i, j] = base + float(np.trace(fs.W @ sig @ fs.W.T))
    return PayoffMatrix(
        subsets=tuple(subsets), L=L, attack_mode=rule, budget_a2=a2, attack_time=attack_time
    )


def payoff_to_csv(pm: PayoffMatrix) -> str:
    """Full-precision CSV with subset labels as header row and first column."""
    buf = io.StringIO()
    buf.write("defender," + ",".join(pm.labels) + "\n")
    for label, row in zip(pm.labels, pm.L):
        buf.write(label + "," + ",".join(repr(float(v)) for v in row) + "\n")
    return buf.getvalue()


def payoff_from_csv(text: str) -> tuple[list[str], list[str], np.ndarray]:
    """Parse a payoff CSV back into (row labels, column labels, matrix).

    Accepts rectangular matrices; raises ValueError on malformed input.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise ValueError("payoff CSV needs a header and at least one row")
    header = lines[0].split(",")
    col_labels = [h.strip() for h in header[1:]]
    if not col_labels:
        raise ValueError("payoff CSV header has no column labels")
    row_labels = []
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(col_labels) + 1:
            raise ValueError(f"payoff CSV row has {len(parts) - 1} values, expected {len(col_labels)}")
        row_labels.append(parts[0].strip())
        try:
            rows.append([float(v) for v in parts[1:]])
        except ValueError as exc:
            raise ValueError(f"payoff CSV has a non-numeric entry: {exc}") from exc
    return row_labels, col_labels, np.array(rows)


def format_payoff_table(pm: PayoffMatrix, decimals: int = 1) -> str:
    """Fixed-width text table rounded for display (the CSV keeps full precision)."""
    width = max(8, max(len(lbl) for lbl in pm.labels) + 2)
    out = ["KF\\At".ljust(width) + "".join(lbl.rjust(width) for lbl in pm.labels)]
    for label, row in zip(pm.labels, pm.L):
        out.append(label.ljust(width) + "".join(f"{v:.{decimals}f}".rjust(width) for v in row))
    return "\n".join(out) + "\n"


def dependent_variant_report(
    model: SystemModel,
    suite: SensorSuite,
    a2: float,
    attack_time: int = 100,
    reference: np.ndarray | None = None,
) -> str:
    """Cell-by-cell comparison of the two dependent allocation variants.

    Lists every strategy pair where the variants disagree by more than one
    display unit (0.05), optionally against a reference table. Useful for
    documenting that the variants produce materially different games.
    """
    pm_t2 = build_payoff_matrix(model, suite, a2, AllocationRule.DEPENDENT_TABLE2, attack_time)
    pm_p3 = build_payoff_matrix(model, suite, a2, AllocationRule.DEPENDENT_PROP3, attack_time)
    labels = pm_t2.labels
    lines = [
        "Dependent-attack payoff variants (rank-one bias, inverse-variance weights)",
        f"power budget a^2 = {a2:g}, attack time = {attack_time}",
        "",
        "variant table2: sigma_b_i = c_i * a     (total power a^2 * sum c_i^2)",
        "variant prop3:  sigma_b_i = c_i * a / sqrt(sum c_j^2)  (total power a^2)",
        "",
        "cells that differ by more than 0.05:",
        "defender  attacker   table2    prop3     diff" + ("      reference" if reference is not None else ""),
    ]
    n_diff = 0
    for i, dl in enumerate(labels):
        for j, al in enumerate(labels):
            t2 = pm_t2.L[i, j]
            p3 = pm_p3.L[i, j]
            if abs(t2 - p3) > 0.05:
                n_diff += 1
                line = f"{dl:<9} {al:<9} {t2:8.3f} {p3:8.3f} {p3 - t2:8.3f}"
                if reference is not None:
                    line += f" {reference[i, j]:10.1f}"
                lines.append(line)
    lines.append("")
    lines.append(f"{n_diff} of {len(labels) ** 2} cells differ between the variants.")
    if reference is not None:
        ok_t2 = int(np.sum(np.abs(pm_t2.L - reference) <= 0.1))
        ok_p3 = int(np.sum(np.abs(pm_p3.L - reference) <= 0.1))
        total = reference.size
        lines.append(
            f"agreement with the reference table (within 0.1): "
            f"table2 {ok_t2}/{total}, prop3 {ok_p3}/{total}."
        )
        lines.append(
            "No single variant reproduces every reference cell; the reference's "
            "single-sensor defender rows follow table2 and its multi-sensor rows "
            "follow prop3."
        )
    return "\n".join(lines) + "\n"
