"""Experiment-matrix execution and result/report emission.

A config names the application, an instance set, algorithms, seeds, and the
wall-clock budget; every (instance, algorithm, seed) cell runs under that
budget and appends one JSON result file (existing files are reused, so an
interrupted matrix resumes). The best-known value per instance is the best
objective any cell reached; the report carries per-cell primal integrals
and per-algorithm means.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .core import Termination
from .gnn.io import load_model
from .metrics import CellResult, MetricReport, primal_integral
from .mip.lns import DestroyPolicy, lb_baseline_run, lns_run
from .mip.model import MipInstance
from .labeling import find_initial_incumbent
from .wno.instance import WnoInstance
from .wno.tabu import TS_MODES, TsMode, ts_run
from .wno.topology import mst_initial

__all__ = [
    "load_config",
    "run_experiment",
    "collect_report",
    "report_csv",
    "report_json",
    "CSV_HEADER",
]

FORMAT_VERSION = 1
CSV_HEADER = "instance,algorithm,seed,primal_integral,iterations,best_value,time_to_best"

MIP_ALGORITHMS = ("lns-random", "lns-gnn-greedy", "lns-gnn-sample", "lb")

DEFAULTS = {
    "max_iterations": None,
    "models": {},
    "k_max": 40,
    "lb_k": 40,
    "repair_node_limit": 20_000,
    "repair_time_limit": 2.0,
    "initial_node_limit": 5_000,
    "parallel": 1,
}


def load_config(path) -> dict:
    with open(path) as fh:
        cfg = json.load(fh)
    return validate_config(cfg, base_dir=Path(path).parent)


def validate_config(cfg: dict, base_dir: Path | None = None) -> dict:
    if cfg.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported config format_version {cfg.get('format_version')!r}")
    app = cfg.get("application")
    if app not in ("wno", "mip"):
        raise ValueError("application must be 'wno' or 'mip'")
    for key in ("instances", "algorithms", "seeds", "t_max", "out_dir"):
        if key not in cfg:
            raise ValueError(f"config is missing {key!r}")
    valid = TS_MODES if app == "wno" else MIP_ALGORITHMS
    for alg in cfg["algorithms"]:
        if alg not in valid:
            raise ValueError(f"unknown algorithm {alg!r} for application {app!r}")
    out = dict(DEFAULTS)
    out.update(cfg)
    if base_dir is not None:
        out["instances"] = [str((base_dir / p)) if not os.path.isabs(p) else p for p in out["instances"]]
        out["out_dir"] = str(base_dir / out["out_dir"]) if not os.path.isabs(out["out_dir"]) else out["out_dir"]
        out["models"] = {
            k: (str(base_dir / p) if not os.path.isabs(p) else p)
            for k, p in out["models"].items()
        }
    return out


def _cell_path(out_dir: Path, instance_name: str, algorithm: str, seed: int) -> Path:
    return out_dir / f"{instance_name}__{algorithm}__s{seed}.json"


def _wno_mode(algorithm: str, models: dict) -> TsMode:
    drop_model = add_model = None
    if algorithm in ("gnn-drop", "gnn-add-drop"):
        drop_model = load_model(models["drop"])
    if algorithm in ("gnn-add", "gnn-add-drop"):
        add_model = load_model(models["add"])
    return TsMode(tag=algorithm, drop_model=drop_model, add_model=add_model)


def run_cell(cfg: dict, instance_path: str, algorithm: str, seed: int) -> dict:
    """Execute one cell; returns the result record (also used by workers)."""
    name = Path(instance_path).stem
    termination = Termination(
        max_seconds=cfg["t_max"], max_iterations=cfg["max_iterations"]
    )
    if cfg["application"] == "wno":
        instance = WnoInstance.from_json(Path(instance_path).read_text())
        initial = mst_initial(instance)
        mode = _wno_mode(algorithm, cfg["models"])
        res = ts_run(instance, initial, mode, termination, seed=seed)
        iterations, best_value, events = res.iterations, res.best_f, res.log.events
        sense = "max"
    else:
        instance = MipInstance.from_json(Path(instance_path).read_text())
        initial, reason = find_initial_incumbent(instance, cfg["initial_node_limit"])
        if initial is None:
            raise RuntimeError(f"no initial incumbent for {name}: {reason}")
        if algorithm == "lb":
            res = lb_baseline_run(
                instance,
                initial,
                k=min(cfg["lb_k"], instance.n_vars),
                termination=termination,
                step_node_limit=cfg["repair_node_limit"],
                step_time_limit=cfg["repair_time_limit"],
            )
        else:
            kind = {"lns-random": "random", "lns-gnn-greedy": "gnn-greedy", "lns-gnn-sample": "gnn-sample"}[algorithm]
            model = None
            if kind.startswith("gnn"):
                model = load_model(cfg["models"]["destroy"])
            policy = DestroyPolicy(kind=kind, k_max=cfg["k_max"], model=model, seed=seed)
            res = lns_run(
                instance,
                initial,
                policy,
                termination,
                repair_node_limit=cfg["repair_node_limit"],
                repair_time_limit=cfg["repair_time_limit"],
            )
        iterations, best_value, events = res.iterations, res.best_value, res.log.events
        sense = "min"
    return {
        "format_version": FORMAT_VERSION,
        "application": cfg["application"],
        "sense": sense,
        "instance": name,
        "algorithm": algorithm,
        "seed": seed,
        "t_max": cfg["t_max"],
        "iterations": iterations,
        "best_value": best_value,
        "init_value": events[0][1],
        "time_to_best": events[-1][0],
        "events": [[t, v] for t, v in events],
    }


def run_experiment(cfg: dict) -> MetricReport:
    """Run every cell (resuming over existing result files) and build the report.

    Cells whose policy model file is missing are skipped and reported. With
    parallel > 1 cells share the machine; wall-clock metrics can distort
    under CPU contention, so keep workers at or below the physical cores.
    """
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    todo = []
    skipped = []
    for instance_path in cfg["instances"]:
        name = Path(instance_path).stem
        for algorithm in cfg["algorithms"]:
            needed = []
            if cfg["application"] == "wno" and algorithm in ("gnn-drop", "gnn-add-drop"):
                needed.append("drop")
            if cfg["application"] == "wno" and algorithm in ("gnn-add", "gnn-add-drop"):
                needed.append("add")
            if cfg["application"] == "mip" and algorithm.startswith("lns-gnn"):
                needed.append("destroy")
            missing = [
                k for k in needed
                if k not in cfg["models"] or not Path(cfg["models"][k]).exists()
            ]
            for seed in cfg["seeds"]:
                cell_file = _cell_path(out_dir, name, algorithm, seed)
                if missing:
                    skipped.append(
                        {
                            "instance": name,
                            "algorithm": algorithm,
                            "seed": seed,
                            "reason": f"missing model file(s): {', '.join(missing)}",
                        }
                    )
                elif not cell_file.exists():
                    todo.append((instance_path, algorithm, seed, cell_file))

    if cfg["parallel"] > 1 and todo:
        with ProcessPoolExecutor(max_workers=cfg["parallel"]) as pool:
            futures = [
                pool.submit(run_cell, cfg, p, alg, seed) for p, alg, seed, _ in todo
            ]
            for (_, _, _, cell_file), fut in zip(todo, futures):
                record = fut.result()
                cell_file.write_text(json.dumps(record))
    else:
        for instance_path, algorithm, seed, cell_file in todo:
            record = run_cell(cfg, instance_path, algorithm, seed)
            cell_file.write_text(json.dumps(record))

    records = []
    for instance_path in cfg["instances"]:
        name = Path(instance_path).stem
        for algorithm in cfg["algorithms"]:
            for seed in cfg["seeds"]:
                cell_file = _cell_path(out_dir, name, algorithm, seed)
                if cell_file.exists():
                    records.append(json.loads(cell_file.read_text()))

    report = collect_report(records, t_max=cfg["t_max"])
    report_path = out_dir / "report.json"
    report_path.write_text(report_json(report, skipped))
    (out_dir / "report.csv").write_text(report_csv(report))
    return report


def collect_report(records: list[dict], t_max: float | None = None) -> MetricReport:
    """Primal integrals against the best value any cell found per instance."""
    if not records:
        raise ValueError("no cell records")
    sense = records[0]["sense"]
    if t_max is None:
        t_max = records[0]["t_max"]
    best_fn = max if sense == "max" else min
    opt: dict[str, float] = {}
    init: dict[str, float] = {}
    for r in records:
        opt[r["instance"]] = (
            best_fn(opt[r["instance"]], r["best_value"])
            if r["instance"] in opt
            else r["best_value"]
        )
        init[r["instance"]] = r["init_value"]

    report = MetricReport(t_max=t_max, sense=sense)
    from .core import IncumbentLog

    for r in records:
        log = IncumbentLog(sense)
        for t, v in r["events"]:
            log.record(t, v)
        pi = primal_integral(log, opt[r["instance"]], init[r["instance"]], t_max)
        report.cells.append(
            CellResult(
                instance=r["instance"],
                algorithm=r["algorithm"],
                seed=r["seed"],
                iterations=r["iterations"],
                best_value=r["best_value"],
                time_to_best=r["time_to_best"],
                events=[(t, v) for t, v in r["events"]],
                primal_integral=pi,
            )
        )
    return report


def report_csv(report: MetricReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for c in sorted(report.cells, key=lambda c: (c.instance, c.algorithm, c.seed)):
        writer.writerow(
            [c.instance, c.algorithm, c.seed, repr(c.primal_integral), c.iterations,
             repr(c.best_value), repr(c.time_to_best)]
        )
    return buf.getvalue()


def report_json(report: MetricReport, skipped: list[dict] | None = None) -> str:
    return json.dumps(
        {
            "format_version": FORMAT_VERSION,
            "t_max": report.t_max,
            "sense": report.sense,
            "aggregates": report.aggregates(),
            "cells": [
                {
                    "instance": c.instance,
                    "algorithm": c.algorithm,
                    "seed": c.seed,
                    "primal_integral": c.primal_integral,
                    "iterations": c.iterations,
                    "best_value": c.best_value,
                    "time_to_best": c.time_to_best,
                }
                for c in report.cells
            ],
            "skipped": skipped or [],
        },
        indent=2,
    )
