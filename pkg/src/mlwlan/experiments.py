"""Batch experiment orchestration.

Both experiments use a paired design: for each scenario index, geometry,
traffic and neighbor-policy draws come from sub-seeds of (base_seed, index)
that do not depend on the swept variable, so every central-policy variant
(and every MLO-fraction point) sees the identical deployment and flow
schedule.  This sharply reduces comparison variance at small batch sizes.

* The satisfaction experiment runs the three multi-link central policies
  over N-BSS deployments where only the central BSS carries a long video
  flow.
* The coexistence experiment additionally sweeps the fraction of
  multi-link neighbor BSSs and includes a legacy single-link central mode.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Optional

from . import __version__
from .config import RunConfig, config_hash
from .engine import SimResult, run
from .metrics import BatchSummary, summarize
from .scenario import Policy, Scenario, generate_scenario, assign_policies
from .traffic import FlowSchedule, build_schedule

CENTRAL_POLICIES_A = (Policy.SLCI, Policy.MCAA, Policy.MCAB)
CENTRAL_POLICIES_B = (Policy.SLCI, Policy.MCAA, Policy.MCAB, Policy.LEGACY)


def scenario_seed(base_seed: int, index: int) -> int:
    # One integer sub-seed per scenario index; module-level streams split
    # it further (geometry / policy / traffic).
    return base_seed * 1_000_003 + index


def build_instance(cfg: RunConfig, base_seed: int,
                   index: int) -> tuple[Scenario, FlowSchedule]:
    seed = scenario_seed(base_seed, index)
    scen = generate_scenario(cfg, seed)
    schedule = build_schedule(scen, cfg.horizon_s, seed,
                              t_on_s=cfg.t_on_s, t_off_s=cfg.t_off_s,
                              start_on=cfg.data_start_on)
    return scen, schedule


def run_single(cfg: RunConfig, seed: int,
               record_allocations: bool = False) -> tuple[Scenario, FlowSchedule, SimResult]:
    """One simulation with the configured central policy and MLO fraction."""
    scen = generate_scenario(cfg, seed)
    schedule = build_schedule(scen, cfg.horizon_s, seed,
                              t_on_s=cfg.t_on_s, t_off_s=cfg.t_off_s,
                              start_on=cfg.data_start_on)
    scen = assign_policies(scen, Policy.from_name(cfg.central_policy),
                           cfg.mlo_fraction, seed)
    result = run(scen, schedule, cfg, seed=seed,
                 record_allocations=record_allocations)
    return scen, schedule, result


def _satisfaction_task(args) -> tuple[int, dict[str, float]]:
    cfg, base_seed, index = args
    scen, schedule = build_instance(cfg, base_seed, index)
    seed = scenario_seed(base_seed, index)
    out = {}
    for central in CENTRAL_POLICIES_A:
        assigned = assign_policies(scen, central, 1.0, seed)
        result = run(assigned, schedule, cfg, seed=seed)
        out[central.value] = result.bss_satisfaction[0]
    return index, out


def _coexistence_task(args) -> tuple[int, dict[tuple[str, float], float]]:
    cfg, base_seed, index, fractions = args
    scen, schedule = build_instance(cfg, base_seed, index)
    seed = scenario_seed(base_seed, index)
    out = {}
    for fraction in fractions:
        for central in CENTRAL_POLICIES_B:
            assigned = assign_policies(scen, central, fraction, seed)
            result = run(assigned, schedule, cfg, seed=seed)
            out[(central.value, fraction)] = result.bss_satisfaction[0]
    return index, out


def _map_tasks(task, args_list, workers: int):
    if workers <= 1:
        return [task(a) for a in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, args_list, chunksize=4))


def run_experiment_a(cfg: RunConfig, ns: Optional[int] = None,
                     base_seed: Optional[int] = None,
                     workers: int = 1) -> dict[str, BatchSummary]:
    """Central-policy comparison on paired scenarios; returns one summary
    of the central BSS's average satisfaction per policy."""
    ns = ns or cfg.ns_satisfaction
    base_seed = cfg.base_seed if base_seed is None else base_seed
    cfg = replace(cfg, record_congestion=False)
    results = _map_tasks(_satisfaction_task,
                         [(cfg, base_seed, i) for i in range(ns)], workers)
    results.sort(key=lambda r: r[0])
    per_policy: dict[str, list[float]] = {p.value: [] for p in CENTRAL_POLICIES_A}
    for _, sats in results:
        for name, s in sats.items():
            per_policy[name].append(s)
    return {name: summarize(name, vals, cfg.satisfaction_threshold)
            for name, vals in per_policy.items()}


def run_experiment_b(cfg: RunConfig, fractions: Optional[Iterable[float]] = None,
                     ns: Optional[int] = None, base_seed: Optional[int] = None,
                     workers: int = 1) -> dict[tuple[str, float], BatchSummary]:
    """Coexistence sweep over the MLO-neighbor fraction, for all four
    central modes; keyed by (mode, fraction)."""
    ns = ns or cfg.ns_coexistence
    base_seed = cfg.base_seed if base_seed is None else base_seed
    fractions = tuple(cfg.coex_fractions if fractions is None else fractions)
    cfg = replace(cfg, record_congestion=False)
    results = _map_tasks(_coexistence_task,
                         [(cfg, base_seed, i, fractions) for i in range(ns)],
                         workers)
    results.sort(key=lambda r: r[0])
    per_key: dict[tuple[str, float], list[float]] = {}
    for _, sats in results:
        for key, s in sats.items():
            per_key.setdefault(key, []).append(s)
    return {key: summarize(f"{key[0]}@{key[1]:g}", vals,
                           cfg.satisfaction_threshold)
            for key, vals in sorted(per_key.items())}


# -- CSV export -------------------------------------------------------------

def _provenance(cfg: RunConfig, base_seed: int) -> str:
    return (f"config_hash={config_hash(cfg)} seed={base_seed} "
            f"version={__version__}")


def write_summary_a(summaries: dict[str, BatchSummary], out_dir: str,
                    cfg: RunConfig, base_seed: int) -> None:
    os.makedirs(out_dir, exist_ok=True)
    note = _provenance(cfg, base_seed)
    with open(os.path.join(out_dir, "summary.csv"), "w", newline="") as fh:
        fh.write(f"# {note}\n")
        w = csv.writer(fh)
        w.writerow(["policy", "scenario_id", "s_bar"])
        for name, summ in summaries.items():
            for i, v in enumerate(summ.values):
                w.writerow([name, i, v])
    with open(os.path.join(out_dir, "cdf.csv"), "w", newline="") as fh:
        fh.write(f"# {note}\n")
        w = csv.writer(fh)
        w.writerow(["policy", "value", "cum_prob"])
        for name, summ in summaries.items():
            for v, p in summ.cdf:
                w.writerow([name, v, p])
    _write_percentiles(os.path.join(out_dir, "percentiles.csv"), note,
                       [(["policy"], [name], summ)
                        for name, summ in summaries.items()])


def write_summary_b(summaries: dict[tuple[str, float], BatchSummary],
                    out_dir: str, cfg: RunConfig, base_seed: int) -> None:
    os.makedirs(out_dir, exist_ok=True)
    note = _provenance(cfg, base_seed)
    with open(os.path.join(out_dir, "summary.csv"), "w", newline="") as fh:
        fh.write(f"# {note}\n")
        w = csv.writer(fh)
        w.writerow(["policy", "fraction", "scenario_id", "s_bar"])
        for (name, frac), summ in summaries.items():
            for i, v in enumerate(summ.values):
                w.writerow([name, frac, i, v])
    with open(os.path.join(out_dir, "cdf.csv"), "w", newline="") as fh:
        fh.write(f"# {note}\n")
        w = csv.writer(fh)
        w.writerow(["policy", "fraction", "value", "cum_prob"])
        for (name, frac), summ in summaries.items():
            for v, p in summ.cdf:
                w.writerow([name, frac, v, p])
    _write_percentiles(os.path.join(out_dir, "percentiles.csv"), note,
                       [(["policy", "fraction"], [name, frac], summ)
                        for (name, frac), summ in summaries.items()])


def _write_percentiles(path: str, note: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {note}\n")
        w = csv.writer(fh)
        first = rows[0]
        w.writerow(first[0] + ["mean", "p5", "p25", "p50", "p95",
                               "frac_at_threshold"])
        for _, key_vals, summ in rows:
            w.writerow(key_vals + [summ.mean, summ.percentiles[5],
                                   summ.percentiles[25], summ.percentiles[50],
                                   summ.percentiles[95],
                                   summ.fraction_at_threshold])
