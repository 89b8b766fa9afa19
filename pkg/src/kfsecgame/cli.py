"""Command-line front end: build payoff tables, solve the game, run simulations.

Configuration is a single JSON object whose fields default to the built-in
three-sensor tracking scenario, so every subcommand runs without a config
file. Exit codes: 0 success, 1 invalid configuration or arguments, 2
numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .attacks import AllocationRule
from .dynamics import dwna_model, position_sensor_suite
from .game import LpError, solve_game, solution_csv, solution_report
from .payoff import (
    build_payoff_matrix,
    format_payoff_table,
    payoff_from_csv,
    payoff_to_csv,
)
from .simulate import curves_to_csv, run_scenario_suite, suite_summary, summary_to_json


class ConfigError(ValueError):
    """Configuration value violates an invariant; message names the field."""


@dataclass
class RunConfig:
    """All pipeline parameters; defaults reproduce the reference scenario."""

    sensors: list[float] = field(default_factory=lambda: [3.0, 4.0, 5.0])
    sigma_v: float = 0.5
    delta: float = 1.0
    x0_hat: list[float] = field(default_factory=lambda: [1.0, 1.0])
    P0: list[list[float]] = field(default_factory=lambda: [[0.25, 0.25], [0.25, 0.5]])
    budget_a2: float = 100.0
    attack_mode: str = "independent"
    dependent_variant: str = "table2"
    attack_time: int = 100
    horizon: int = 200
    trials: int = 10000
    base_seed: int = 20260101
    output_dir: str = "out"

    def validate(self) -> None:
        if not self.sensors:
            raise ConfigError("sensors: at least one sensor is required")
        if any(s <= 0 for s in self.sensors):
            raise ConfigError("sensors: noise s.d. values must be > 0")
        if self.sigma_v <= 0:
            raise ConfigError("sigma_v: must be > 0")
        if self.delta <= 0:
            raise ConfigError("delta: must be > 0")
        if len(self.x0_hat) != 2:
            raise ConfigError("x0_hat: expected [position, velocity]")
        p0 = np.asarray(self.P0, dtype=float)
        if p0.shape != (2, 2):
            raise ConfigError("P0: expected a 2x2 matrix")
        if not np.allclose(p0, p0.T):
            raise ConfigError("P0: must be symmetric")
        if np.any(np.linalg.eigvalsh(p0) <= 0):
            raise ConfigError("P0: must be positive definite")
        if self.budget_a2 < 0:
            raise ConfigError("budget_a2: must be >= 0")
        if self.attack_mode not in ("independent", "dependent"):
            raise ConfigError("attack_mode: must be 'independent' or 'dependent'")
        if self.dependent_variant not in ("table2", "prop3"):
            raise ConfigError("dependent_variant: must be 'table2' or 'prop3'")
        if self.attack_time < 1:
            raise ConfigError("attack_time: must be >= 1")
        if self.attack_time >= self.horizon:
            raise ConfigError("attack_time: must be < horizon")
        if self.trials < 1:
            raise ConfigError("trials: must be >= 1")

    @property
    def rule(self) -> AllocationRule:
        if self.attack_mode == "independent":
            return AllocationRule.INDEPENDENT
        if self.dependent_variant == "prop3":
            return AllocationRule.DEPENDENT_PROP3
        return AllocationRule.DEPENDENT_TABLE2

    def build(self):
        model = dwna_model(self.delta, self.sigma_v, self.x0_hat, self.P0)
        suite = position_sensor_suite(self.sensors)
        return model, suite


def load_config(path: str | None) -> RunConfig:
    cfg = RunConfig()
    if path is None:
        return cfg
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config: top-level JSON value must be an object")
    known = set(asdict(cfg))
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"config: unknown field '{key}'")
        setattr(cfg, key, value)
    return cfg


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, newline="\n")
    except OSError as exc:
        raise ConfigError(f"output_dir: cannot write {path}: {exc}") from exc


def cmd_payoff(cfg: RunConfig) -> list[Path]:
    """Write payoff_<mode>.csv (full precision) and payoff_<mode>.txt (one decimal)."""
    model, suite = cfg.build()
    pm = build_payoff_matrix(model, suite, cfg.budget_a2, cfg.rule, cfg.attack_time)
    out = Path(cfg.output_dir)
    csv_path = out / f"payoff_{cfg.attack_mode}.csv"
    txt_path = out / f"payoff_{cfg.attack_mode}.txt"
    _write(csv_path, payoff_to_csv(pm))
    _write(txt_path, format_payoff_table(pm))
    return [csv_path, txt_path]


def cmd_solve(cfg: RunConfig, from_csv: str | None = None) -> list[Path]:
    """Solve the game and write strategy_<mode>.csv plus a key-value report."""
    if from_csv is not None:
        try:
            text = Path(from_csv).read_text()
        except OSError as exc:
            raise ConfigError(f"from_csv: cannot read {from_csv}: {exc}") from exc
        row_labels, _, matrix = payoff_from_csv(text)
        labels = row_labels
    else:
        model, suite = cfg.build()
        pm = build_payoff_matrix(model, suite, cfg.budget_a2, cfg.rule, cfg.attack_time)
        matrix = pm.L
        labels = pm.labels
    sol = solve_game(matrix)
    out = Path(cfg.output_dir)
    csv_path = out / f"strategy_{cfg.attack_mode}.csv"
    txt_path = out / f"strategy_{cfg.attack_mode}.txt"
    _write(csv_path, solution_csv(sol, labels))
    _write(txt_path, solution_report(sol, labels))
    return [csv_path, txt_path]


def cmd_simulate(cfg: RunConfig) -> list[Path]:
    """Solve the game, run the four standard scenarios, and write curves + summary."""
    model, suite = cfg.build()
    pm = build_payoff_matrix(model, suite, cfg.budget_a2, cfg.rule, cfg.attack_time)
    sol = solve_game(pm.L)
    curves = run_scenario_suite(
        model,
        suite,
        sol,
        trials=cfg.trials,
        horizon=cfg.horizon,
        base_seed=cfg.base_seed,
        a2=cfg.budget_a2,
        rule=cfg.rule,
        attack_time=cfg.attack_time,
    )
    out = Path(cfg.output_dir)
    csv_path = out / "mse_curves.csv"
    json_path = out / "summary.json"
    _write(csv_path, curves_to_csv(curves))
    _write(json_path, summary_to_json(suite_summary(curves, cfg.attack_time)))
    return [csv_path, json_path]


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kf-secgame",
        description=(
            "Sensor-selection security games for multi-sensor Kalman filtering: "
            "payoff tables, mixed-strategy equilibria, Monte Carlo tracking runs."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="path to a JSON config file")
        p.add_argument("--mode", choices=["independent", "dependent"], help="attack mode")
        p.add_argument("--variant", choices=["table2", "prop3"],
                       help="dependent-attack allocation variant")
        p.add_argument("--seed", type=int, help="base RNG seed")
        p.add_argument("--out", help="output directory")

    p_payoff = sub.add_parser("payoff", help="write the payoff matrix as CSV and text")
    common(p_payoff)

    p_solve = sub.add_parser("solve", help="solve for the mixed-strategy saddle point")
    common(p_solve)
    p_solve.add_argument("--from-csv", dest="from_csv",
                         help="solve a payoff matrix read from CSV instead of building one")

    p_sim = sub.add_parser("simulate", help="run the four-scenario Monte Carlo comparison")
    common(p_sim)
    p_sim.add_argument("--trials", type=int, help="Monte Carlo trials")
    return parser


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> None:
    if args.mode is not None:
        cfg.attack_mode = args.mode
    if args.variant is not None:
        cfg.dependent_variant = args.variant
    if args.seed is not None:
        cfg.base_seed = args.seed
    if args.out is not None:
        cfg.output_dir = args.out
    if getattr(args, "trials", None) is not None:
        cfg.trials = args.trials


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        _apply_overrides(cfg, args)
        cfg.validate()
        if args.command == "payoff":
            paths = cmd_payoff(cfg)
        elif args.command == "solve":
            paths = cmd_solve(cfg, from_csv=args.from_csv)
        else:
            paths = cmd_simulate(cfg)
    except (LpError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
