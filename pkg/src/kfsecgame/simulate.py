"""Monte Carlo tracking runs that play the sensor-selection game forward in time.

Each trial draws one pure strategy per player from the mixed distributions,
runs the Kalman filter on the defender's subset against a sampled trajectory,
injects a random bias into the attacked sensors at the attack time, and
records squared position errors per step.

Reproducibility contract: trial t of a run seeded with base_seed consumes
randomness from numpy SeedSequence((base_seed, t)) split into four child
streams, in order: trajectory (initial state then process noise), measurement
noise for all sensors per step, strategy draws (defender then attacker
uniform), bias shape (one standard normal per sensor). All scenarios of a
suite share the trial's trajectory/measurement/bias draws (common random
numbers), so curves differ only through the players' choices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .attacks import AllocationRule, AttackPlan, make_plan
from .dynamics import (
    SensorSubset,
    SensorSuite,
    SystemModel,
    kalman_gain_history,
    simulate_trajectory,
    stack_measurement_model,
)
from .game import GameSolution, MixedStrategy
from .payoff import enumerate_subsets

STANDARD_LABELS = ("no_attack", "optimal", "uniform", "pure_first")


@dataclass(frozen=True)
class Scenario:
    """One simulation configuration: policies, attack plans, and attack time."""

    label: str
    subsets: tuple[SensorSubset, ...]
    plans: tuple[AttackPlan, ...]
    defender_policy: np.ndarray
    attacker_policy: np.ndarray | None
    attack_time: int

    def __post_init__(self) -> None:
        d = np.array(self.defender_policy, dtype=float)
        d.setflags(write=False)
        object.__setattr__(self, "defender_policy", d)
        if self.attacker_policy is not None:
            a = np.array(self.attacker_policy, dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, "attacker_policy", a)
        object.__setattr__(self, "subsets", tuple(self.subsets))
        object.__setattr__(self, "plans", tuple(self.plans))
        n = len(self.subsets)
        if len(self.plans) != n:
            raise ValueError("plans must align with subsets")
        for vec in (self.defender_policy, self.attacker_policy):
            if vec is None:
                continue
            if vec.shape != (n,) or np.any(vec < 0) or abs(vec.sum() - 1.0) > 1e-9:
                raise ValueError("policy must be a probability vector over the subsets")
        if self.attack_time < 1:
            raise ValueError("attack_time must be >= 1")


@dataclass(frozen=True)
class MseCurve:
    """Empirical position MSE per step, averaged over trials."""

    label: str
    t: np.ndarray
    mse_pos: np.ndarray
    trials: int
    seed: int

    def __post_init__(self) -> None:
        t = np.array(self.t, dtype=int)
        m = np.array(self.mse_pos, dtype=float)
        t.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "mse_pos", m)


def _policy_vector(policy, n: int) -> np.ndarray:
    if isinstance(policy, MixedStrategy):
        return np.array(policy.probs)
    vec = np.array(policy, dtype=float)
    if vec.shape != (n,):
        raise ValueError("policy vector has the wrong length")
    return vec


def point_mass(index: int, n: int) -> np.ndarray:
    """Degenerate mixed strategy: always pick pure strategy `index`."""
    vec = np.zeros(n)
    vec[index] = 1.0
    return vec


def _draw_indices(policy: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF sample of pure-strategy indices from uniforms in [0, 1)."""
    cdf = np.cumsum(policy)
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(policy) - 1)


def standard_scenarios(
    suite: SensorSuite,
    solution: GameSolution,
    a2: float,
    rule: AllocationRule,
    attack_time: int = 100,
) -> list[Scenario]:
    """The four comparison scenarios sharing one attacker.

    no_attack: defender plays the optimal mix, nothing is injected.
    optimal:   defender optimal mix vs attacker optimal mix.
    uniform:   defender uniform over all subsets vs attacker optimal mix.
    pure_first: defender always uses the first subset vs attacker optimal mix.
    """
    subsets = tuple(enumerate_subsets(suite.size))
    plans = tuple(make_plan(suite, s, a2, rule) for s in subsets)
    n = len(subsets)
    x_star = _policy_vector(solution.defender, n)
    y_star = _policy_vector(solution.attacker, n)
    uniform = np.full(n, 1.0 / n)
    return [
        Scenario("no_attack", subsets, plans, x_star, None, attack_time),
        Scenario("optimal", subsets, plans, x_star, y_star, attack_time),
        Scenario("uniform", subsets, plans, uniform, y_star, attack_time),
        Scenario("pure_first", subsets, plans, point_mass(0, n), y_star, attack_time),
    ]


def _bias_vector(plan: AttackPlan, g: np.ndarray) -> np.ndarray:
    """Map standard normals onto a bias draw with covariance plan.Sigma."""
    if plan.mode is AllocationRule.INDEPENDENT:
        return plan.sigma_b * g
    return plan.sigma_b * g[0]  # rank-one: one shared scalar, correlation 1


def _stream_generators(seed_seq: np.random.SeedSequence, count: int = 4):
    """Child generators derived statelessly (the seed sequence is not mutated),
    so repeated calls with the same sequence reproduce the same draws."""
    return (
        np.random.default_rng(
            np.random.SeedSequence(entropy=seed_seq.entropy,
                                   spawn_key=(*seed_seq.spawn_key, i))
        )
        for i in range(count)
    )


def run_trial(
    model: SystemModel,
    suite: SensorSuite,
    scenario: Scenario,
    horizon: int,
    rng_stream,
) -> np.ndarray:
    """Single-trial reference path. Returns squared position errors, steps 1..horizon.

    `rng_stream` is a numpy SeedSequence (or anything acceptable as its
    entropy); the draw protocol is described in the module docstring.
    """
    if horizon <= scenario.attack_time:
        raise ValueError("horizon must exceed attack_time")
    ss = rng_stream if isinstance(rng_stream, np.random.SeedSequence) else np.random.SeedSequence(rng_stream)
    g_state, g_meas, g_strat, g_bias = _stream_generators(ss)
    m_sensors = suite.size

    x = simulate_trajectory(model, horizon, g_state)
    eps = g_meas.standard_normal((horizon, m_sensors))
    u = g_strat.random(2)
    g = g_bias.standard_normal(m_sensors)

    d_idx = int(_draw_indices(scenario.defender_policy, np.array([u[0]]))[0])
    defender = scenario.subsets[d_idx]
    bias = np.zeros(m_sensors)
    if scenario.attacker_policy is not None:
        a_idx = int(_draw_indices(scenario.attacker_policy, np.array([u[1]]))[0])
        bias = _bias_vector(scenario.plans[a_idx], g)

    H, _ = stack_measurement_model(suite, defender)
    gains = kalman_gain_history(model, suite, defender, horizon)
    cols = [i - 1 for i in defender.indices]
    sd = suite.noise_sds[cols]
    u_in = model.input_term if model.input_term is not None else 0.0
    xh = np.array(model.x0_hat)
    err_sq = np.empty(horizon)
    for k in range(1, horizon + 1):
        xp = model.F @ xh + u_in
        z = H @ x[k] + sd * eps[k - 1, cols]
        if k == scenario.attack_time:
            z = z + bias[cols]
        xh = xp + gains[k - 1].W @ (z - H @ xp)
        err_sq[k - 1] = (xh[0] - x[k, 0]) ** 2
    return err_sq


def _trial_noise(model, suite, trials, horizon, base_seed):
    """Generate every trial's random draws up front, one seed stream per trial."""
    dim = model.state_dim
    m_sensors = suite.size
    z0 = np.empty((trials, dim))
    v = np.empty((trials, horizon))
    eps = np.empty((trials, horizon, m_sensors))
    u = np.empty((trials, 2))
    g = np.empty((trials, m_sensors))
    for t in range(trials):
        streams = _stream_generators(np.random.SeedSequence((base_seed, t)))
        g_state, g_meas, g_strat, g_bias = streams
        z0[t] = g_state.standard_normal(dim)
        v[t] = g_state.standard_normal(horizon)
        eps[t] = g_meas.standard_normal((horizon, m_sensors))
        u[t] = g_strat.random(2)
        g[t] = g_bias.standard_normal(m_sensors)
    return z0, v, eps, u, g


def run_scenarios_with_errors(
    model: SystemModel,
    suite: SensorSuite,
    scenarios: list[Scenario],
    trials: int,
    horizon: int,
    base_seed: int,
) -> tuple[list[MseCurve], list[np.ndarray]]:
    """Batch engine behind run_scenarios; also returns per-trial squared errors.

    Equivalent to averaging run_trial over SeedSequence((base_seed, t)) for
    t = 0..trials-1, vectorized across trials grouped by defender subset.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    for sc in scenarios:
        if horizon <= sc.attack_time:
            raise ValueError("horizon must exceed attack_time")
    z0, v, eps, u, g = _trial_noise(model, suite, trials, horizon, base_seed)

    chol = np.linalg.cholesky(model.P0)
    u_in = model.input_term if model.input_term is not None else 0.0
    x = np.empty((trials, horizon + 1, model.state_dim))
    x[:, 0] = model.x0_hat + z0 @ chol.T
    scaled = model.sigma_v * v
    for k in range(1, horizon + 1):
        x[:, k] = x[:, k - 1] @ model.F.T + u_in + np.outer(scaled[:, k - 1], model.Gamma)

    gain_cache: dict[SensorSubset, list] = {}
    curves = []
    all_errors = []
    for sc in scenarios:
        d_idx = _draw_indices(sc.defender_policy, u[:, 0])
        bias = np.zeros((trials, suite.size))
        if sc.attacker_policy is not None:
            a_idx = _draw_indices(sc.attacker_policy, u[:, 1])
            for j, plan in enumerate(sc.plans):
                rows = np.nonzero(a_idx == j)[0]
                if rows.size == 0:
                    continue
                if plan.mode is AllocationRule.INDEPENDENT:
                    bias[rows] = plan.sigma_b * g[rows]
                else:
                    bias[rows] = np.outer(g[rows, 0], plan.sigma_b)
        err_sq = np.empty((trials, horizon))
        for s_idx, subset in enumerate(sc.subsets):
            rows = np.nonzero(d_idx == s_idx)[0]
            if rows.size == 0:
                continue
            if subset not in gain_cache:
                gain_cache[subset] = kalman_gain_history(model, suite, subset, horizon)
            gains = gain_cache[subset]
            H, _ = stack_measurement_model(suite, subset)
            cols = [i - 1 for i in subset.indices]
            sd = suite.noise_sds[cols]
            xh = np.tile(np.array(model.x0_hat), (rows.size, 1))
            for k in range(1, horizon + 1):
                xp = xh @ model.F.T + u_in
                z = x[rows, k] @ H.T + sd * eps[rows, k - 1][:, cols]
                if k == sc.attack_time:
                    z = z + bias[rows][:, cols]
                xh = xp + (z - xp @ H.T) @ gains[k - 1].W.T
                err_sq[rows, k - 1] = (xh[:, 0] - x[rows, k, 0]) ** 2
        curves.append(
            MseCurve(
                label=sc.label,
                t=np.arange(1, horizon + 1),
                mse_pos=err_sq.mean(axis=0),
                trials=trials,
                seed=base_seed,
            )
        )
        all_errors.append(err_sq)
    return curves, all_errors


def run_scenarios(
    model: SystemModel,
    suite: SensorSuite,
    scenarios: list[Scenario],
    trials: int,
    horizon: int,
    base_seed: int,
) -> list[MseCurve]:
    curves, _ = run_scenarios_with_errors(model, suite, scenarios, trials, horizon, base_seed)
    return curves


def run_scenario_suite(
    model: SystemModel,
    suite: SensorSuite,
    solution: GameSolution,
    trials: int,
    horizon: int,
    base_seed: int,
    a2: float,
    rule: AllocationRule,
    attack_time: int = 100,
) -> list[MseCurve]:
    """Run the four standard scenarios with common random numbers."""
    scenarios = standard_scenarios(suite, solution, a2, rule, attack_time)
    return run_scenarios(model, suite, scenarios, trials, horizon, base_seed)


def curves_to_csv(curves: list[MseCurve]) -> str:
    """One row per step: k plus one mse_<label> column per curve."""
    horizon = len(curves[0].t)
    for c in curves:
        if len(c.t) != horizon:
            raise ValueError("curves must share a horizon")
    header = "k," + ",".join(f"mse_{c.label}" for c in curves)
    lines = [header]
    for row in range(horizon):
        lines.append(
            f"{curves[0].t[row]}," + ",".join(repr(float(c.mse_pos[row])) for c in curves)
        )
    return "\n".join(lines) + "\n"


def suite_summary(curves: list[MseCurve], attack_time: int, tail_steps: int = 50) -> dict:
    """Scenario means over the last `tail_steps` steps and just after the attack."""
    horizon = len(curves[0].t)
    post_lo = attack_time
    post_hi = min(attack_time + 10, horizon)
    out = {
        "trials": curves[0].trials,
        "horizon": horizon,
        "attack_time": attack_time,
        "tail_steps": tail_steps,
        "tail_mean_mse": {},
        "post_attack_window": [post_lo, post_hi],
        "post_attack_mean_mse": {},
    }
    for c in curves:
        out["tail_mean_mse"][c.label] = float(c.mse_pos[-tail_steps:].mean())
        sel = (c.t >= post_lo) & (c.t <= post_hi)
        out["post_attack_mean_mse"][c.label] = float(c.mse_pos[sel].mean())
    return out


def summary_to_json(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True) + "\n"
