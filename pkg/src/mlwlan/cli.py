"""Command-line interface.

Subcommands:
    run              one simulation; writes flows.csv, congestion.csv, result.json
    experiment-a     paired central-policy comparison batch
    experiment-b     coexistence sweep over the MLO-neighbor fraction
    validate-config  parse and validate a config file
    print-defaults   dump the default configuration
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .config import (RunConfig, config_hash, dump_config_text, load_config)
from .engine import congestion_csv, flows_csv
from .errors import ConfigError, InvalidScenarioError, ScenarioError
from .experiments import (run_experiment_a, run_experiment_b, run_single,
                          write_summary_a, write_summary_b)


def _load(args) -> RunConfig:
    if args.config:
        return load_config(args.config)
    return RunConfig()


def _add_common(p: argparse.ArgumentParser, batch: bool = False) -> None:
    p.add_argument("--config", help="config file (flat dotted keys)")
    p.add_argument("--seed", type=int, default=None,
                   help="base seed (default: experiment.base_seed)")
    p.add_argument("--out-dir", default=".", help="output directory")
    if batch:
        p.add_argument("--ns", type=int, default=None,
                       help="number of scenarios")
        p.add_argument("--workers", type=int, default=1,
                       help="parallel worker processes")


def cmd_run(args) -> int:
    cfg = _load(args)
    seed = cfg.base_seed if args.seed is None else args.seed
    scen, schedule, result = run_single(cfg, seed)
    os.makedirs(args.out_dir, exist_ok=True)
    note = f"config_hash={config_hash(cfg)} seed={seed} version={__version__}"
    flows_csv(result, os.path.join(args.out_dir, "flows.csv"), note)
    congestion_csv(result, os.path.join(args.out_dir, "congestion.csv"), note)
    doc = result.to_dict()
    doc["scenario"] = scen.to_dict()
    with open(os.path.join(args.out_dir, "result.json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for bss_id in sorted(result.bss_satisfaction):
        print(f"BSS {bss_id}: s_bar = {result.bss_satisfaction[bss_id]:.4f}")
    return 0


def cmd_experiment_a(args) -> int:
    cfg = _load(args)
    seed = cfg.base_seed if args.seed is None else args.seed
    summaries = run_experiment_a(cfg, ns=args.ns, base_seed=seed,
                                 workers=args.workers)
    write_summary_a(summaries, args.out_dir, cfg, seed)
    for name, summ in summaries.items():
        print(f"{name}: mean={summ.mean:.4f} p5={summ.percentiles[5]:.4f} "
              f"median={summ.median:.4f} "
              f"frac>={summ.threshold:g}: {summ.fraction_at_threshold:.2f}")
    return 0


def cmd_experiment_b(args) -> int:
    cfg = _load(args)
    seed = cfg.base_seed if args.seed is None else args.seed
    fractions = None
    if args.fractions:
        fractions = [float(x) for x in args.fractions.split(",")]
    summaries = run_experiment_b(cfg, fractions=fractions, ns=args.ns,
                                 base_seed=seed, workers=args.workers)
    write_summary_b(summaries, args.out_dir, cfg, seed)
    for (name, frac), summ in summaries.items():
        print(f"{name} @ fraction {frac:g}: mean={summ.mean:.4f} "
              f"median={summ.median:.4f}")
    return 0


def cmd_validate_config(args) -> int:
    if not args.config:
        print("validate-config requires --config", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1
    print(f"ok: config_hash={config_hash(cfg)}")
    return 0


def cmd_print_defaults(_args) -> int:
    sys.stdout.write(dump_config_text(RunConfig()))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mlwlan",
        description="Flow-level multi-link WLAN simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one simulation")
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("experiment-a", help="central-policy comparison batch")
    _add_common(p, batch=True)
    p.set_defaults(func=cmd_experiment_a)

    p = sub.add_parser("experiment-b", help="MLO-fraction coexistence sweep")
    _add_common(p, batch=True)
    p.add_argument("--fractions", help="comma-separated fractions in [0,1]")
    p.set_defaults(func=cmd_experiment_b)

    p = sub.add_parser("validate-config", help="check a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate_config)

    p = sub.add_parser("print-defaults", help="dump default configuration")
    p.set_defaults(func=cmd_print_defaults)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ScenarioError, InvalidScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
