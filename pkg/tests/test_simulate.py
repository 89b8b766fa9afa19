import json

import numpy as np
import pytest

from kfsecgame import (
    AllocationRule,
    Scenario,
    SensorSubset,
    curves_to_csv,
    enumerate_subsets,
    kalman_recursion,
    make_plan,
    point_mass,
    run_scenario_suite,
    run_scenarios_with_errors,
    run_trial,
    solve_game,
    standard_scenarios,
    suite_summary,
)


@pytest.fixture(scope="module")
def small_setup(dwna, payoff_independent):
    model, suite = dwna
    sol = solve_game(payoff_independent.L)
    return model, suite, sol


def fixed_pair_scenario(suite, defender, attacker, a2, rule, attack_time, label="fixed"):
    """Point-mass policies on one defender subset and one attacker subset."""
    subsets = tuple(enumerate_subsets(suite.size))
    plans = tuple(make_plan(suite, s, a2, rule) for s in subsets)
    d_idx = subsets.index(SensorSubset(defender))
    policies = {"defender_policy": point_mass(d_idx, len(subsets))}
    if attacker is None:
        policies["attacker_policy"] = None
    else:
        a_idx = subsets.index(SensorSubset(attacker))
        policies["attacker_policy"] = point_mass(a_idx, len(subsets))
    return Scenario(label=label, subsets=subsets, plans=plans,
                    attack_time=attack_time, **policies)


class TestRunTrial:
    def test_batch_engine_matches_reference_path(self, small_setup):
        model, suite, sol = small_setup
        scenarios = standard_scenarios(suite, sol, 100.0,
                                       AllocationRule.DEPENDENT_TABLE2, attack_time=10)
        horizon, trials, seed = 30, 40, 555
        _, errors = run_scenarios_with_errors(model, suite, scenarios, trials, horizon, seed)
        for s_idx, sc in enumerate(scenarios):
            for t in (0, 7, 39):
                single = run_trial(model, suite, sc, horizon,
                                   np.random.SeedSequence((seed, t)))
                assert np.allclose(errors[s_idx][t], single, rtol=1e-12, atol=1e-12)

    def test_no_attack_equals_zero_budget(self, small_setup):
        model, suite, sol = small_setup
        quiet = fixed_pair_scenario(suite, (1, 2), None, 100.0,
                                    AllocationRule.INDEPENDENT, 10)
        zero = fixed_pair_scenario(suite, (1, 2), (1,), 0.0,
                                   AllocationRule.INDEPENDENT, 10)
        ss = np.random.SeedSequence((1, 2, 3))
        a = run_trial(model, suite, quiet, 25, ss)
        b = run_trial(model, suite, zero, 25, ss)
        assert np.array_equal(a, b)

    def test_disjoint_attacker_is_no_attack(self, small_setup):
        model, suite, sol = small_setup
        attacked = fixed_pair_scenario(suite, (1,), (2, 3), 100.0,
                                       AllocationRule.DEPENDENT_PROP3, 10)
        quiet = fixed_pair_scenario(suite, (1,), None, 100.0,
                                    AllocationRule.DEPENDENT_PROP3, 10)
        ss = np.random.SeedSequence(77)
        assert np.array_equal(run_trial(model, suite, attacked, 25, ss),
                              run_trial(model, suite, quiet, 25, ss))

    def test_horizon_must_exceed_attack_time(self, small_setup):
        model, suite, sol = small_setup
        sc = fixed_pair_scenario(suite, (1,), (1,), 1.0, AllocationRule.INDEPENDENT, 50)
        with pytest.raises(ValueError):
            run_trial(model, suite, sc, 50, np.random.SeedSequence(0))


class TestDeterminism:
    def test_identical_seeds_identical_curves(self, small_setup):
        model, suite, sol = small_setup
        kwargs = dict(trials=30, horizon=25, base_seed=42, a2=100.0,
                      rule=AllocationRule.INDEPENDENT, attack_time=10)
        c1 = run_scenario_suite(model, suite, sol, **kwargs)
        c2 = run_scenario_suite(model, suite, sol, **kwargs)
        for a, b in zip(c1, c2):
            assert np.array_equal(a.mse_pos, b.mse_pos)

    def test_different_seeds_differ(self, small_setup):
        model, suite, sol = small_setup
        kwargs = dict(trials=30, horizon=25, a2=100.0,
                      rule=AllocationRule.INDEPENDENT, attack_time=10)
        c1 = run_scenario_suite(model, suite, sol, base_seed=1, **kwargs)
        c2 = run_scenario_suite(model, suite, sol, base_seed=2, **kwargs)
        assert not np.array_equal(c1[0].mse_pos, c2[0].mse_pos)

    def test_no_attack_and_optimal_share_randomness_before_attack(self, small_setup):
        # Common random numbers: the curves may only diverge once the bias
        # lands at the attack step.
        model, suite, sol = small_setup
        curves = run_scenario_suite(model, suite, sol, trials=50, horizon=40,
                                    base_seed=9, a2=100.0,
                                    rule=AllocationRule.INDEPENDENT, attack_time=20)
        no_attack, optimal = curves[0], curves[1]
        assert np.array_equal(no_attack.mse_pos[:19], optimal.mse_pos[:19])
        assert not np.array_equal(no_attack.mse_pos[19:], optimal.mse_pos[19:])


class TestStatisticalConsistency:
    def test_pre_attack_mse_matches_posterior_covariance(self, small_setup):
        # Fixed defender, no attack: the empirical position MSE at a converged
        # step equals the (1,1) posterior covariance entry within 3 standard
        # errors at 1e4 trials.
        model, suite, _ = small_setup
        sc = fixed_pair_scenario(suite, (1,), None, 0.0, AllocationRule.INDEPENDENT, 60)
        trials, horizon, k = 10_000, 80, 70
        _, errors = run_scenarios_with_errors(model, suite, [sc], trials, horizon, 2026)
        sample = errors[0][:, k - 1]
        fs = kalman_recursion(model, suite, SensorSubset([1]), k)
        expected = fs.P[0, 0]
        se = sample.std(ddof=1) / np.sqrt(trials)
        assert abs(sample.mean() - expected) <= 3 * se

    def test_transient_recovers_after_single_injection(self, small_setup):
        model, suite, sol = small_setup
        curves = run_scenario_suite(model, suite, sol, trials=2000, horizon=160,
                                    base_seed=11, a2=100.0,
                                    rule=AllocationRule.DEPENDENT_TABLE2, attack_time=100)
        for curve in curves:
            pre = curve.mse_pos[89:99].mean()
            at_150 = curve.mse_pos[149]
            assert abs(at_150 - pre) <= 0.10 * pre


class TestScenarioConstruction:
    def test_standard_labels_and_policies(self, small_setup):
        model, suite, sol = small_setup
        scenarios = standard_scenarios(suite, sol, 100.0, AllocationRule.INDEPENDENT)
        assert [s.label for s in scenarios] == ["no_attack", "optimal", "uniform", "pure_first"]
        assert scenarios[0].attacker_policy is None
        assert np.array_equal(scenarios[0].defender_policy, sol.defender.probs)
        assert np.allclose(scenarios[2].defender_policy, np.full(7, 1 / 7))
        assert np.array_equal(scenarios[3].defender_policy, point_mass(0, 7))
        assert scenarios[3].subsets[0].indices == (1,)

    def test_policy_validation(self, small_setup):
        _, suite, _ = small_setup
        subsets = tuple(enumerate_subsets(3))
        plans = tuple(make_plan(suite, s, 1.0, AllocationRule.INDEPENDENT) for s in subsets)
        with pytest.raises(ValueError):
            Scenario("bad", subsets, plans, np.full(6, 1 / 6), None, 10)
        with pytest.raises(ValueError):
            Scenario("bad", subsets, plans, np.full(7, 0.5), None, 10)
        with pytest.raises(ValueError):
            Scenario("bad", subsets, plans[:-1], point_mass(0, 7), None, 10)

    def test_trials_guard(self, small_setup):
        model, suite, sol = small_setup
        with pytest.raises(ValueError):
            run_scenario_suite(model, suite, sol, trials=0, horizon=20,
                               base_seed=0, a2=1.0, rule=AllocationRule.INDEPENDENT,
                               attack_time=10)


class TestOutputs:
    def test_curve_csv_layout(self, small_setup):
        model, suite, sol = small_setup
        curves = run_scenario_suite(model, suite, sol, trials=5, horizon=15,
                                    base_seed=3, a2=100.0,
                                    rule=AllocationRule.INDEPENDENT, attack_time=10)
        text = curves_to_csv(curves)
        lines = text.splitlines()
        assert lines[0] == "k,mse_no_attack,mse_optimal,mse_uniform,mse_pure_first"
        assert len(lines) == 16
        assert lines[1].startswith("1,")

    def test_summary_fields(self, small_setup):
        model, suite, sol = small_setup
        curves = run_scenario_suite(model, suite, sol, trials=5, horizon=60,
                                    base_seed=3, a2=100.0,
                                    rule=AllocationRule.INDEPENDENT, attack_time=30)
        summary = suite_summary(curves, attack_time=30)
        parsed = json.loads(json.dumps(summary))
        assert parsed["attack_time"] == 30
        assert set(parsed["tail_mean_mse"]) == {"no_attack", "optimal", "uniform", "pure_first"}
        assert parsed["post_attack_window"] == [30, 40]

    def test_mismatched_horizons_rejected(self, small_setup):
        model, suite, sol = small_setup
        kwargs = dict(base_seed=3, a2=100.0, rule=AllocationRule.INDEPENDENT, attack_time=10)
        c1 = run_scenario_suite(model, suite, sol, trials=5, horizon=15, **kwargs)
        c2 = run_scenario_suite(model, suite, sol, trials=5, horizon=20, **kwargs)
        with pytest.raises(ValueError):
            curves_to_csv([c1[0], c2[0]])


class TestPointMass:
    def test_vector(self):
        assert np.array_equal(point_mass(2, 4), [0.0, 0.0, 1.0, 0.0])

    def test_draws_follow_cdf_edges(self, small_setup):
        from kfsecgame.simulate import _draw_indices

        policy = np.array([0.25, 0.5, 0.25])
        u = np.array([0.0, 0.249, 0.25, 0.74, 0.75, 0.999999])
        assert list(_draw_indices(policy, u)) == [0, 0, 1, 1, 2, 2]
