"""Injected-bias covariance construction and the extra MSE it causes.

An attack plan fixes, for a chosen subset of sensors and a power budget a^2,
the covariance Sigma of the zero-mean random bias added to those sensors'
measurements. Sigma is stored at full suite size with structural zeros off the
attacked block, so restriction to the sensors a filter actually uses is plain
submatrix selection.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dynamics import (
    FilterState,
    SensorSubset,
    SensorSuite,
    SystemModel,
    kalman_gain_history,
    stack_measurement_model,
)


class AllocationRule(Enum):
    """How the attacker splits the power budget across the attacked sensors.

    INDEPENDENT       uncorrelated per-sensor noise; everything on the sensor
                      with the smallest measurement noise variance.
    DEPENDENT_PROP3   fully correlated (rank-one) noise, inverse-variance
                      weights normalized so the budget is met exactly.
    DEPENDENT_TABLE2  fully correlated noise with raw inverse-variance weights
                      sigma_b_i = c_i * a; total power is a^2 * sum(c_i^2).
    """

    INDEPENDENT = "independent"
    DEPENDENT_PROP3 = "prop3"
    DEPENDENT_TABLE2 = "table2"

    @property
    def is_dependent(self) -> bool:
        return self is not AllocationRule.INDEPENDENT


@dataclass(frozen=True)
class AttackPlan:
    """Bias covariance for one attacked subset under a power budget."""

    attacked: SensorSubset
    budget_a2: float
    mode: AllocationRule
    sigma_b: np.ndarray  # per-sensor injected s.d., length = suite size
    Sigma: np.ndarray  # full-size bias covariance

    def __post_init__(self) -> None:
        sb = np.array(self.sigma_b, dtype=float)
        sg = np.array(self.Sigma, dtype=float)
        sb.setflags(write=False)
        sg.setflags(write=False)
        object.__setattr__(self, "sigma_b", sb)
        object.__setattr__(self, "Sigma", sg)


@dataclass(frozen=True)
class EmseResult:
    """Extra MSE matrix caused by injected biases, `horizon_n` steps after the first."""

    A: np.ndarray
    horizon_n: int

    def __post_init__(self) -> None:
        a = np.array(self.A, dtype=float)
        a.setflags(write=False)
        object.__setattr__(self, "A", a)

    @property
    def trace(self) -> float:
        return float(np.trace(self.A))


def _weights(suite: SensorSuite, attacked: SensorSubset) -> np.ndarray:
    """Inverse-variance weights over the attacked subset, zero elsewhere; sums to 1."""
    c = np.zeros(suite.size)
    inv = np.array([1.0 / suite.sigma_w(i) ** 2 for i in attacked])
    for i, w in zip(attacked, inv / inv.sum()):
        c[i - 1] = w
    return c


def allocate_independent(
    suite: SensorSuite, attacked: SensorSubset, a2: float
) -> AttackPlan:
    """Put the whole budget on the attacked sensor with the smallest noise variance.

    Ties break toward the lowest sensor index. The resulting Sigma is diagonal
    with a single nonzero entry a2.
    """
    attacked.validate_for(suite)
    if a2 < 0:
        raise ValueError("a2 must be nonnegative")
    target = min(attacked, key=lambda i: (suite.sigma_w(i), i))
    sigma_b = np.zeros(suite.size)
    sigma_b[target - 1] = np.sqrt(a2)
    return AttackPlan(
        attacked=attacked,
        budget_a2=a2,
        mode=AllocationRule.INDEPENDENT,
        sigma_b=sigma_b,
        Sigma=np.diag(sigma_b**2),
    )


def allocate_dependent(
    suite: SensorSuite,
    attacked: SensorSubset,
    a2: float,
    variant: AllocationRule = AllocationRule.DEPENDENT_TABLE2,
) -> AttackPlan:
    """Rank-one (pairwise correlation 1) allocation with inverse-variance weights.

    The PROP3 variant scales the weight vector so trace(Sigma) equals a2
    exactly; the TABLE2 variant uses sigma_b_i = c_i * a unscaled, so
    trace(Sigma) = a2 * sum(c_i^2) <= a2.
    """
    attacked.validate_for(suite)
    if a2 < 0:
        raise ValueError("a2 must be nonnegative")
    if not variant.is_dependent:
        raise ValueError("variant must be one of the dependent rules")
    c = _weights(suite, attacked)
    a = np.sqrt(a2)
    if variant is AllocationRule.DEPENDENT_PROP3:
        sigma_b = c * a / np.sqrt(np.sum(c**2))
    else:
        sigma_b = c * a
    return AttackPlan(
        attacked=attacked,
        budget_a2=a2,
        mode=variant,
        sigma_b=sigma_b,
        Sigma=np.outer(sigma_b, sigma_b),
    )


def make_plan(
    suite: SensorSuite, attacked: SensorSubset, a2: float, rule: AllocationRule
) -> AttackPlan:
    """Dispatch to the allocator matching `rule`."""
    if rule is AllocationRule.INDEPENDENT:
        return allocate_independent(suite, attacked, a2)
    return allocate_dependent(suite, attacked, a2, rule)


def effective_sigma(plan: AttackPlan, used: SensorSubset) -> np.ndarray:
    """Bias covariance restricted to the sensors the filter uses.

    Sensors used but not attacked contribute zero rows/columns because Sigma
    carries structural zeros outside the attacked block.
    """
    idx = [i - 1 for i in used.indices]
    return plan.Sigma[np.ix_(idx, idx)]


def emse_single_injection(
    fs: FilterState, plan: AttackPlan, used: SensorSubset
) -> EmseResult:
    """Extra MSE W Sigma_eff W^T right after a one-time injection.

    Only sensors both used and attacked affect the estimate; disjoint
    subsets give A = 0.
    """
    if used != fs.subset:
        raise ValueError("filter state was computed for a different subset")
    if fs.W.shape[1] != len(used):
        raise ValueError("gain width does not match the used subset")
    if plan.Sigma.shape[0] < used.indices[-1]:
        raise ValueError("plan covariance is too small for the used subset")
    sig = effective_sigma(plan, used)
    A = fs.W @ sig @ fs.W.T
    return EmseResult(A=0.5 * (A + A.T), horizon_n=0)


def emse_continuous(
    model: SystemModel,
    suite: SensorSuite,
    used: SensorSubset,
    sigma_seq,
    start: int,
    horizon: int,
) -> EmseResult:
    """Extra MSE at time start+horizon from biases injected at start, start+1, ...

    `sigma_seq[m]` is the full-size bias covariance at time start+m and must
    cover m = 0..horizon. The accumulation is the forward recurrence
    A_k = B_k A_{k-1} B_k^T + W_k Sigma_k W_k^T with B_k = (I - W_k H) F,
    one matrix product per step.
    """
    if start < 1:
        raise ValueError("start must be >= 1")
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if len(sigma_seq) < horizon + 1:
        raise ValueError("sigma_seq must provide horizon+1 covariances")
    H, _ = stack_measurement_model(suite, used)
    idx = [i - 1 for i in used.indices]
    history = kalman_gain_history(model, suite, used, start + horizon)
    n = model.state_dim
    A = np.zeros((n, n))
    for m in range(horizon + 1):
        W = history[start + m - 1].W
        sig = np.asarray(sigma_seq[m], dtype=float)[np.ix_(idx, idx)]
        if m > 0:
            B = (np.eye(n) - W @ H) @ model.F
            A = B @ A @ B.T
        A = A + W @ sig @ W.T
        A = 0.5 * (A + A.T)
    return EmseResult(A=A, horizon_n=horizon)


def _simplex_grid(total: float, dims: int, points_per_axis: int):
    """All splits of `total` across `dims` slots on a grid of total/(points-1) steps."""
    steps = points_per_axis - 1
    unit = total / steps
    for combo in itertools.product(range(steps + 1), repeat=dims - 1):
        if sum(combo) <= steps:
            yield np.array([*(k * unit for k in combo), (steps - sum(combo)) * unit])


def oracle_best_allocation(
    fs: FilterState, used: SensorSubset, a2: float, mode: str
) -> np.ndarray:
    """Brute-force best allocation over the used sensors; verifier for the allocators.

    mode "independent": grid search over diagonal power splits (step a2/100)
    maximizing trace(W Sigma W^T); returns per-sensor powers aligned with
    used.indices. mode "rank1": the unit direction maximizing ||W u||, found
    by power iteration on W^T W, scaled so the rank-one covariance has trace
    a2; returns per-sensor s.d. values aligned with used.indices.
    """
    if used != fs.subset:
        raise ValueError("filter state was computed for a different subset")
    if len(used) > 3:
        raise ValueError("oracle is limited to subsets of size <= 3")
    width = len(used)
    if mode == "independent":
        gains = np.sum(fs.W**2, axis=0)  # trace(W diag(p) W^T) = sum p_i ||W[:,i]||^2
        best_p = None
        best_val = -np.inf
        for p in _simplex_grid(a2, width, 101):
            val = float(gains @ p)
            if val > best_val + 1e-15:
                best_val = val
                best_p = p
        return best_p
    if mode == "rank1":
        WtW = fs.W.T @ fs.W
        u = np.ones(width) / np.sqrt(width)
        for _ in range(500):
            nxt = WtW @ u
            norm = np.linalg.norm(nxt)
            if norm == 0.0:
                break
            nxt /= norm
            if np.linalg.norm(nxt - u) < 1e-14:
                u = nxt
                break
            u = nxt
        if u[np.argmax(np.abs(u))] < 0:
            u = -u
        return u * np.sqrt(a2)
    raise ValueError(f"unknown oracle mode: {mode!r}")
