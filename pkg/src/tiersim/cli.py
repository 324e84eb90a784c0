"""Command-line front end: run one simulation or a full sweep and emit
plot-ready CSV tables plus a reproducibility summary.

Exit codes: 0 success, 1 I/O failure, 2 validation or usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .scenario import (
    SCENARIO_TIER_SETS,
    Approach,
    ScenarioConfig,
    ScenarioError,
    Strategy,
    TierId,
    Tolerance,
    config_to_dict,
    default_case_study,
    load_scenario,
)
from .simulation import (
    SweepResult,
    row_from_records,
    run,
    sweep,
)

_APPROACH_BY_FLAG = {"energy": Approach.ENERGY_FOCUSED, "delay": Approach.DELAY_FOCUSED}
_FLAG_BY_APPROACH = {v: k for k, v in _APPROACH_BY_FLAG.items()}

SLOTS_HEADER = [
    "scenario",
    "approach",
    "strategy",
    "density",
    "seed",
    "slot",
    "a3_power_w",
    "strategy_power_w",
    "active_sbs",
    "on_off",
    "total_demand",
    "offload_mbs",
    "offload_uav",
    "offload_haps",
    "offload_sat",
    "dissat_intolerant_tier3",
    "dissat_intolerant_tier4",
    "dissat_mid_tolerant_tier4",
    "dissat_total",
]


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _series_name(scenario: str, approach: Approach, strategy: Strategy) -> str:
    return f"{scenario}_{_FLAG_BY_APPROACH[approach]}_{strategy.value}"


def _write_slots_csv(path: Path, result: SweepResult) -> None:
    lines = [",".join(SLOTS_HEADER)]
    assert result.slots is not None
    for key in sorted(result.slots):
        scenario, density, seed, approach, strategy = key
        for rec in result.slots[key]:
            row = [
                scenario,
                approach,
                strategy,
                str(density),
                str(seed),
                str(rec.slot),
                _fmt(rec.a3_power_w),
                _fmt(rec.strategy_power_w),
                str(sum(rec.on_off)),
                "".join("1" if b else "0" for b in rec.on_off),
                str(rec.total_demand),
                str(rec.offloaded_demand[TierId.TIER1_MBS]),
                str(rec.offloaded_demand[TierId.TIER2_UAV]),
                str(rec.offloaded_demand[TierId.TIER3_HAPS]),
                str(rec.offloaded_demand[TierId.TIER4_SAT]),
                str(rec.dissatisfied[(Tolerance.INTOLERANT, TierId.TIER3_HAPS)]),
                str(rec.dissatisfied[(Tolerance.INTOLERANT, TierId.TIER4_SAT)]),
                str(rec.dissatisfied[(Tolerance.MID_TOLERANT, TierId.TIER4_SAT)]),
                str(rec.dissatisfied_total),
            ]
            lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def _write_curves(out_dir: Path, result: SweepResult) -> None:
    aggs = result.aggregates
    densities = sorted({a.density for a in aggs})
    series = sorted({(a.scenario, a.approach, a.strategy) for a in aggs},
                    key=lambda t: (t[0], t[1].value, t[2].value))
    by_cell = {(a.scenario, a.density, a.approach, a.strategy): a for a in aggs}

    gain_lines = ["density," + ",".join(_series_name(*s) for s in series)]
    for d in densities:
        vals = []
        for sc, ap, st in series:
            a = by_cell.get((sc, d, ap, st))
            vals.append(_fmt(a.gain_mean_pct) if a else "")
        gain_lines.append(f"{d}," + ",".join(vals))
    (out_dir / "gain_curve.csv").write_text("\n".join(gain_lines) + "\n")

    head = []
    for s in series:
        head.append(_series_name(*s) + "_tier3")
        head.append(_series_name(*s) + "_tier4")
    dis_lines = ["density," + ",".join(head)]
    for d in densities:
        vals = []
        for sc, ap, st in series:
            a = by_cell.get((sc, d, ap, st))
            vals.append(_fmt(a.dissat_tier3_mean) if a else "")
            vals.append(_fmt(a.dissat_tier4_mean) if a else "")
        dis_lines.append(f"{d}," + ",".join(vals))
    (out_dir / "dissatisfaction_curve.csv").write_text("\n".join(dis_lines) + "\n")


def _write_summary(out_dir: Path, result: SweepResult, config: ScenarioConfig, grid: dict) -> None:
    doc = {
        "tool": "tiersim",
        "version": __version__,
        "config": config_to_dict(config),
        "grid": grid,
        "rows": [
            {
                "scenario": r.scenario,
                "density": r.density,
                "seed": r.seed,
                "approach": r.approach.value,
                "strategy": r.strategy.value,
                "gain_pct": r.gain_pct,
                "strategy_power_sum_w": r.strategy_power_sum_w,
                "a3_power_sum_w": r.a3_power_sum_w,
                "dissat_total": r.dissat_total,
                "dissat_mean_per_slot": r.dissat_mean_per_slot,
                "dissat_tier3_total": r.dissat_tier3_total,
                "dissat_tier4_total": r.dissat_tier4_total,
                "mean_sbs_raw_load": r.mean_sbs_raw_load,
            }
            for r in result.rows
        ],
        "aggregates": [
            {
                "scenario": a.scenario,
                "density": a.density,
                "approach": a.approach.value,
                "strategy": a.strategy.value,
                "n_seeds": a.n_seeds,
                "gain_mean_pct": a.gain_mean_pct,
                "gain_std_pct": a.gain_std_pct,
                "dissat_total_mean": a.dissat_total_mean,
                "dissat_mean_per_slot": a.dissat_mean_per_slot,
                "dissat_tier3_mean": a.dissat_tier3_mean,
                "dissat_tier4_mean": a.dissat_tier4_mean,
                "mean_sbs_raw_load": a.mean_sbs_raw_load,
            }
            for a in result.aggregates
        ],
    }
    (out_dir / "summary.json").write_text(json.dumps(doc, indent=2) + "\n")


def _write_bundle(out_dir: Path, result: SweepResult, config: ScenarioConfig, grid: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_slots_csv(out_dir / "slots.csv", result)
    _write_curves(out_dir, result)
    _write_summary(out_dir, result, config, grid)


def _scenario_label(config: ScenarioConfig) -> str:
    for label, tiers in SCENARIO_TIER_SETS.items():
        if config.tier_set == tiers:
            return label
    return "custom"


def _load_config(path: str | None) -> ScenarioConfig:
    if path is None:
        return default_case_study()
    return load_scenario(path)


def _parse_seeds(raw: str) -> tuple[int, ...]:
    """Either a count ("10" -> seeds 1..10) or an explicit comma list."""
    if "," in raw:
        return tuple(int(t) for t in raw.split(",") if t.strip() != "")
    return tuple(range(1, int(raw) + 1))


def cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args.scenario)
    approach = _APPROACH_BY_FLAG[args.approach] if args.approach else config.approach
    strategy = Strategy(args.strategy) if args.strategy else config.strategy
    density = args.density
    seed = args.seed

    records = run(config, density, seed, approach, strategy)
    label = _scenario_label(config)
    row = row_from_records(records, label, density, seed, approach, strategy)
    from .simulation import SweepAggregate

    agg = SweepAggregate(
        scenario=label,
        density=density,
        approach=approach,
        strategy=strategy,
        n_seeds=1,
        gain_mean_pct=row.gain_pct,
        gain_std_pct=0.0,
        dissat_total_mean=float(row.dissat_total),
        dissat_mean_per_slot=row.dissat_mean_per_slot,
        dissat_tier3_mean=float(row.dissat_tier3_total),
        dissat_tier4_mean=float(row.dissat_tier4_total),
        mean_sbs_raw_load=row.mean_sbs_raw_load,
    )
    result = SweepResult(rows=(row,), aggregates=(agg,), slots={row.key: records})

    grid = {
        "command": "run",
        "scenarios": [label],
        "densities": [density],
        "seeds": [seed],
        "approaches": [_FLAG_BY_APPROACH[approach]],
        "strategies": [strategy.value],
    }
    _write_bundle(Path(args.out), result, config, grid)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_config(args.scenario)
    scenarios = tuple(args.scenarios.split(",")) if args.scenarios else tuple(SCENARIO_TIER_SETS)
    unknown = [s for s in scenarios if s not in SCENARIO_TIER_SETS]
    if unknown:
        raise ScenarioError(
            f"unknown scenario labels {unknown}; known: {list(SCENARIO_TIER_SETS)}"
        )
    densities = (
        tuple(int(t) for t in args.densities.split(",")) if args.densities else None
    )
    seeds = _parse_seeds(args.seeds) if args.seeds else None
    approaches = (
        tuple(_APPROACH_BY_FLAG[t] for t in args.approaches.split(","))
        if args.approaches
        else None
    )
    strategies = (
        tuple(Strategy(t) for t in args.strategies.split(",")) if args.strategies else None
    )

    result = sweep(
        config,
        scenarios=scenarios,
        densities=densities,
        seeds=seeds,
        approaches=approaches,
        strategies=strategies,
        jobs=args.jobs,
        keep_slots=True,
    )

    grid = {
        "command": "sweep",
        "scenarios": list(scenarios),
        "densities": list(densities if densities is not None else config.user_densities),
        "seeds": list(seeds if seeds is not None else config.seeds),
        "approaches": [
            _FLAG_BY_APPROACH[a]
            for a in (approaches if approaches is not None else (config.approach,))
        ],
        "strategies": [
            s.value for s in (strategies if strategies is not None else (config.strategy,))
        ],
        "jobs": args.jobs,
    }
    _write_bundle(Path(args.out), result, config, grid)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tiersim",
        description="Multi-tier cell-switching simulator",
    )
    parser.add_argument("--version", action="version", version=f"tiersim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one (density, seed) cell")
    p_run.add_argument("--scenario", help="scenario JSON file (default: built-in case study)")
    p_run.add_argument("--density", type=int, required=True, help="user count")
    p_run.add_argument("--seed", type=int, required=True, help="master seed")
    p_run.add_argument("--approach", choices=sorted(_APPROACH_BY_FLAG))
    p_run.add_argument("--strategy", choices=[s.value for s in Strategy])
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run the scenario/density/seed grid")
    p_sweep.add_argument("--scenario", help="scenario JSON file (default: built-in case study)")
    p_sweep.add_argument("--scenarios", help="comma list from {i,ii,iii,iv,v} (default: all)")
    p_sweep.add_argument("--densities", help="comma list of user counts (default: config grid)")
    p_sweep.add_argument(
        "--seeds", help="seed count N (runs seeds 1..N) or explicit comma list"
    )
    p_sweep.add_argument("--approaches", help="comma list from {energy,delay}")
    p_sweep.add_argument("--strategies", help="comma list from {a3,es,greedy}")
    p_sweep.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as e:
        print(f"tiersim: {e}", file=sys.stderr)
        return 2
    except (KeyError, ValueError) as e:
        print(f"tiersim: bad flag value: {e}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError, PermissionError, OSError) as e:
        print(f"tiersim: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
