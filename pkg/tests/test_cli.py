import json

import numpy as np
import pytest

from kfsecgame import AllocationRule, build_dwna_example, build_payoff_matrix, solve_game
from kfsecgame.cli import ConfigError, RunConfig, load_config, main
from kfsecgame.payoff import payoff_from_csv
from _tables import (
    REFERENCE_DEPENDENT,
    STRATEGY_DEPENDENT_ATTACKER,
    STRATEGY_DEPENDENT_KF,
    SUBSET_LABELS,
)


def read_strategy_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")[1:]
    kf = np.array([float(v) for v in lines[1].split(",")[1:]])
    attacker = np.array([float(v) for v in lines[2].split(",")[1:]])
    value = float(lines[3].split(",")[1])
    gap = float(lines[4].split(",")[1])
    return header, kf, attacker, value, gap


class TestPayoffCommand:
    def test_independent_table_top_left_cell(self, tmp_path):
        assert main(["payoff", "--mode", "independent", "--out", str(tmp_path)]) == 0
        text = (tmp_path / "payoff_independent.txt").read_text()
        row = next(ln for ln in text.splitlines() if ln.startswith("z1 ") or ln.startswith("z1  "))
        assert row.split()[1] == "25.4"

    def test_dependent_saturated_full_cell(self, tmp_path):
        assert main(["payoff", "--mode", "dependent", "--variant", "prop3",
                     "--out", str(tmp_path)]) == 0
        text = (tmp_path / "payoff_dependent.txt").read_text()
        last = text.splitlines()[-1]
        assert last.split()[0] == "z1z2z3"
        assert last.split()[-1] == "13.4"

    def test_zero_budget_rows_constant(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"budget_a2": 0.0}))
        assert main(["payoff", "--config", str(cfg), "--out", str(tmp_path)]) == 0
        _, _, mat = payoff_from_csv((tmp_path / "payoff_independent.csv").read_text())
        assert np.all(mat == mat[:, :1])

    def test_csv_full_precision(self, tmp_path, payoff_independent):
        assert main(["payoff", "--out", str(tmp_path)]) == 0
        _, _, mat = payoff_from_csv((tmp_path / "payoff_independent.csv").read_text())
        assert np.array_equal(mat, payoff_independent.L)


class TestSolveCommand:
    def test_independent_defender_row(self, tmp_path):
        assert main(["solve", "--mode", "independent", "--out", str(tmp_path)]) == 0
        header, kf, _, value, gap = read_strategy_csv(tmp_path / "strategy_independent.csv")
        assert header == SUBSET_LABELS
        assert kf[5] == pytest.approx(0.40, abs=0.03)
        assert kf[6] == pytest.approx(0.60, abs=0.03)
        assert gap < 1e-6

    def test_duality_gap_reported_small(self, tmp_path):
        assert main(["solve", "--mode", "dependent", "--out", str(tmp_path)]) == 0
        _, _, _, _, gap = read_strategy_csv(tmp_path / "strategy_dependent.csv")
        assert gap < 1e-6

    def test_from_csv_on_published_table_recovers_published_strategies(self, tmp_path):
        src = tmp_path / "reference.csv"
        lines = ["defender," + ",".join(SUBSET_LABELS)]
        for lbl, row in zip(SUBSET_LABELS, REFERENCE_DEPENDENT):
            lines.append(lbl + "," + ",".join(repr(float(v)) for v in row))
        src.write_text("\n".join(lines) + "\n")
        assert main(["solve", "--mode", "dependent", "--out", str(tmp_path),
                     "--from-csv", str(src)]) == 0
        _, kf, attacker, _, gap = read_strategy_csv(tmp_path / "strategy_dependent.csv")
        assert np.allclose(kf, STRATEGY_DEPENDENT_KF, atol=0.05)
        assert np.allclose(attacker, STRATEGY_DEPENDENT_ATTACKER, atol=0.05)
        assert gap < 1e-6

    def test_round_trip_matches_in_memory_pipeline(self, tmp_path):
        assert main(["payoff", "--mode", "independent", "--out", str(tmp_path)]) == 0
        assert main(["solve", "--mode", "independent", "--out", str(tmp_path),
                     "--from-csv", str(tmp_path / "payoff_independent.csv")]) == 0
        _, kf, attacker, value, _ = read_strategy_csv(tmp_path / "strategy_independent.csv")
        model, suite = build_dwna_example()
        pm = build_payoff_matrix(model, suite, 100.0, AllocationRule.INDEPENDENT, 100)
        sol = solve_game(pm.L)
        assert np.allclose(kf, sol.defender.probs, rtol=0, atol=1e-9)
        assert np.allclose(attacker, sol.attacker.probs, rtol=0, atol=1e-9)
        assert value == pytest.approx(sol.value, abs=1e-9)

    def test_missing_csv_is_config_error(self, tmp_path):
        assert main(["solve", "--out", str(tmp_path),
                     "--from-csv", str(tmp_path / "nope.csv")]) == 1

    def test_nonfinite_csv_rejected(self, tmp_path):
        src = tmp_path / "bad.csv"
        src.write_text("defender,a,b\nr1,1.0,nan\nr2,0.0,2.0\n")
        assert main(["solve", "--out", str(tmp_path), "--from-csv", str(src)]) == 1

    def test_numerical_failure_exit_code(self, tmp_path, monkeypatch):
        from kfsecgame import LpError
        import kfsecgame.cli as cli_mod

        def boom(_):
            raise LpError("LP did not converge")

        monkeypatch.setattr(cli_mod, "solve_game", boom)
        assert main(["solve", "--out", str(tmp_path)]) == 2


class TestSimulateCommand:
    def test_writes_curves_and_summary(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"trials": 60, "horizon": 120, "attack_time": 100}))
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path),
                     "--seed", "5"]) == 0
        lines = (tmp_path / "mse_curves.csv").read_text().splitlines()
        assert lines[0] == "k,mse_no_attack,mse_optimal,mse_uniform,mse_pure_first"
        assert len(lines) == 121
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["trials"] == 60
        assert set(summary["post_attack_mean_mse"]) == {
            "no_attack", "optimal", "uniform", "pure_first"
        }

    def test_single_trial_is_deterministic(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"trials": 1, "horizon": 110}))
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        assert main(["simulate", "--config", str(cfg), "--out", str(out1), "--seed", "3"]) == 0
        assert main(["simulate", "--config", str(cfg), "--out", str(out2), "--seed", "3"]) == 0
        assert (out1 / "mse_curves.csv").read_bytes() == (out2 / "mse_curves.csv").read_bytes()
        assert (out1 / "summary.json").read_bytes() == (out2 / "summary.json").read_bytes()


class TestConfig:
    def test_defaults_validate(self):
        cfg = RunConfig()
        cfg.validate()

    @pytest.mark.parametrize(
        "field,value,needle",
        [
            ("sensors", [], "sensors"),
            ("sensors", [3.0, -1.0], "sensors"),
            ("sigma_v", 0.0, "sigma_v"),
            ("delta", -1.0, "delta"),
            ("x0_hat", [1.0], "x0_hat"),
            ("P0", [[1.0, 0.0], [0.1, 1.0]], "P0"),
            ("P0", [[1.0, 2.0], [2.0, 1.0]], "P0"),
            ("budget_a2", -5.0, "budget_a2"),
            ("attack_mode", "both", "attack_mode"),
            ("dependent_variant", "v3", "dependent_variant"),
            ("attack_time", 0, "attack_time"),
            ("attack_time", 300, "attack_time"),
            ("trials", 0, "trials"),
        ],
    )
    def test_each_invariant_names_its_field(self, field, value, needle):
        cfg = RunConfig()
        setattr(cfg, field, value)
        with pytest.raises(ConfigError, match=needle):
            cfg.validate()

    def test_unknown_field_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"sensor_count": 3}))
        with pytest.raises(ConfigError, match="sensor_count"):
            load_config(str(path))

    def test_invalid_json_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{nope")
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_validation_exit_code(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"trials": 0}))
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 1

    def test_variant_selects_rule(self):
        cfg = RunConfig()
        cfg.attack_mode = "dependent"
        assert cfg.rule is AllocationRule.DEPENDENT_TABLE2
        cfg.dependent_variant = "prop3"
        assert cfg.rule is AllocationRule.DEPENDENT_PROP3
        cfg.attack_mode = "independent"
        assert cfg.rule is AllocationRule.INDEPENDENT
