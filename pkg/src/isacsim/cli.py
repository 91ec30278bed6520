"""Command-line front end: run sweeps from a YAML config and emit CSV
results plus a JSON metadata file.

    isacsim --config run.yaml [--seed N] [--trials N] [--out DIR] SUBCOMMAND

Subcommands: single, rcs-sweep, ts-sweep, tradeoff. Exit codes: 0 on
success, 2 for configuration errors, 1 for runtime failures (partial
output files are removed). ISACSIM_WORKERS overrides the worker count.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, RunConfig, config_from_dict, config_to_dict, load_config
from .engine import (
    SweepResult,
    SweepRow,
    _row_seed,
    default_workers,
    monte_carlo,
    sweep_rcs,
    sweep_ts,
    tradeoff_curve,
)

CSV_COLUMNS = (
    "sweep_param_name",
    "sweep_value",
    "policy",
    "policy_param",
    "p_d",
    "p_fa_window",
    "mean_snr_db",
    "mean_m",
    "n_trials",
    "seed",
)

# Modelling choices not pinned by the source formulation, recorded with
# every run so results are interpretable on their own.
DEVIATION_FLAGS = (
    "concurrent_precoder_renormalized_per_slot",
    "target_phase_uniform_per_trial_coherent_within_window",
    "snr_averaged_in_linear_domain",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def _write_csv(path: Path, rows: list[SweepRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow(
                [
                    r.sweep_name,
                    _fmt(r.sweep_value),
                    r.policy,
                    _fmt(r.policy_param),
                    _fmt(r.p_d),
                    _fmt(r.p_fa_window),
                    _fmt(r.mean_snr_db),
                    _fmt(r.mean_m),
                    r.n_trials,
                    r.seed,
                ]
            )


def _policy_labels(policies) -> list[str]:
    labels = []
    for p in policies:
        base = p.kind
        if labels.count(base) or [q.kind for q in policies].count(base) > 1:
            base = f"{p.kind}_{_fmt(p.param)}" if p.param is not None else p.kind
        labels.append(base)
    # de-duplicate defensively
    seen: dict[str, int] = {}
    out = []
    for lb in labels:
        n = seen.get(lb, 0)
        seen[lb] = n + 1
        out.append(lb if n == 0 else f"{lb}_{n}")
    return out


def _run_single(cfg: RunConfig, workers: int) -> dict[str, list[SweepRow]]:
    renorm = cfg.concurrent_norm == "renormalize"
    rows = []
    for pi, policy in enumerate(cfg.policies):
        seed = _row_seed(cfg.seed, pi, 0)
        mc = monte_carlo(
            cfg.params, cfg.scenario, policy, cfg.n_trials, seed, cfg.detector,
            cfg.warmup_windows, workers, renorm,
        )
        rows.append(
            SweepRow("none", 0.0, policy.kind, policy.param, mc.p_d, mc.p_fa_window,
                     mc.mean_snr_db, mc.mean_m, cfg.n_trials, seed)
        )
    return {"single": rows}


def _sweep_outputs(prefix: str, results: list[SweepResult]) -> dict[str, list[SweepRow]]:
    labels = _policy_labels([r.policy for r in results])
    return {f"{prefix}_{lb}": r.rows for lb, r in zip(labels, results)}


def _run_subcommand(cfg: RunConfig, subcommand: str, workers: int) -> dict[str, list[SweepRow]]:
    renorm = cfg.concurrent_norm == "renormalize"
    common = dict(
        n_trials=cfg.n_trials,
        base_seed=cfg.seed,
        settings=cfg.detector,
        warmup=cfg.warmup_windows,
        workers=workers,
        renormalize=renorm,
    )
    if subcommand == "single":
        return _run_single(cfg, workers)
    if subcommand == "rcs-sweep":
        results = sweep_rcs(
            cfg.params, cfg.scenario, list(cfg.policies), cfg.rcs_grid_dbsm, **common
        )
        return _sweep_outputs("rcs_sweep", results)
    if subcommand == "ts-sweep":
        grid_s = [v * 1e-3 for v in cfg.ts_grid_ms]
        results = sweep_ts(cfg.params, cfg.scenario, list(cfg.policies), grid_s, **common)
        return _sweep_outputs("ts_sweep", results)
    if subcommand == "tradeoff":
        results = tradeoff_curve(
            cfg.params, cfg.scenario, cfg.rho_grid, cfg.beta_grid, **common
        )
        return _sweep_outputs("tradeoff", results)
    raise ValueError(f"unknown subcommand {subcommand!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isacsim",
        description="Monte Carlo sweeps for a monostatic sensing-and-communication link",
    )
    parser.add_argument("--config", default=None, help="YAML config path (defaults built in)")
    parser.add_argument("--seed", type=int, default=None, help="override the base seed")
    parser.add_argument("--trials", type=int, default=None, help="override trials per point")
    parser.add_argument("--out", default=None, help="output directory (default: results)")
    parser.add_argument(
        "subcommand",
        choices=["single", "rcs-sweep", "ts-sweep", "tradeoff"],
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else config_from_dict({})
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.trials is not None:
            if args.trials < 1:
                raise ConfigError("--trials: must be >= 1")
            overrides["n_trials"] = args.trials
        if args.out is not None:
            overrides["out_dir"] = args.out
        if overrides:
            cfg = dataclasses.replace(cfg, **overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out_dir = Path(cfg.out_dir)
    written: list[Path] = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        outputs = _run_subcommand(cfg, args.subcommand, default_workers())
        for name, rows in outputs.items():
            path = out_dir / f"{name}.csv"
            _write_csv(path, rows)
            written.append(path)
        meta = {
            "tool": "isacsim",
            "version": __version__,
            "subcommand": args.subcommand,
            "config": config_to_dict(cfg),
            "deviation_flags": list(DEVIATION_FLAGS),
            "workers": default_workers(),
            "files": [p.name for p in written],
        }
        meta_path = out_dir / "run_metadata.json"
        with open(meta_path, "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(meta_path)
    except Exception as exc:  # noqa: BLE001 - single CLI failure boundary
        for path in written:
            try:
                path.unlink()
            except OSError:
                pass
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
