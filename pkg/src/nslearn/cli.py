"""Command-line surface.

Subcommands: wno-gen, mip-gen, label-wno, label-mip, split, train,
grad-check, run-ts, run-lns, run-experiment, report. Exit codes: 0 on
success, 2 on invalid arguments, 1 on runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .core import Termination
from .experiment import collect_report, load_config, report_csv, report_json, run_experiment
from .gnn.gradcheck import gradient_check
from .gnn.graphs import BipartiteGraph, FeatureGraph, LabeledSample, dump_jsonl, load_jsonl
from .gnn.io import ModelFormatError, load_model, save_model
from .gnn.losses import LossSpec
from .gnn.model import BipartiteArch, GraphArch
from .gnn.train import TrainConfig, train
from .labeling import (
    MipLabelerConfig,
    dataset_manifest,
    label_mip,
    label_wno,
    split_dataset,
)
from .mip.generators import generate_knapsack_conflicts, generate_set_cover
from .mip.lns import DestroyPolicy, lb_baseline_run, lns_run
from .mip.model import MipInstance
from .labeling import find_initial_incumbent
from .wno.instance import WnoInstance, generate_instance
from .wno.tabu import TS_MODES, TsMode, ts_run
from .wno.topology import mst_initial

__all__ = ["main"]


def _instance_paths(args_instances: list[str]) -> list[Path]:
    paths: list[Path] = []
    for raw in args_instances:
        p = Path(raw)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.json")))
        elif p.exists():
            paths.append(p)
        else:
            raise ValueError(f"instance path {raw!r} does not exist")
    if not paths:
        raise ValueError("no instance files found")
    return paths


def _termination(args) -> Termination:
    return Termination(
        max_seconds=args.time_limit,
        max_iterations=getattr(args, "iterations", None),
    )


# ---------------------------------------------------------------------------
# subcommand implementations


def cmd_wno_gen(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        seed = args.seed + i
        inst = generate_instance(args.n, seed)
        path = out / f"wno_n{args.n}_s{seed}.json"
        path.write_text(inst.to_json())
        print(path)
    return 0


def cmd_mip_gen(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        seed = args.seed + i
        if args.family == "set-cover":
            inst = generate_set_cover(
                args.n_cols, args.n_rows, args.density, (args.cost_min, args.cost_max), seed
            )
        else:
            inst = generate_knapsack_conflicts(
                args.n_items,
                args.n_conflicts,
                (args.value_min, args.value_max),
                (args.weight_min, args.weight_max),
                args.capacity_fraction,
                seed,
            )
        path = out / f"{inst.name}.json"
        path.write_text(inst.to_json())
        print(path)
    return 0


def cmd_label_wno(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    drop_all: list[LabeledSample] = []
    add_all: list[LabeledSample] = []
    for path in _instance_paths(args.instances):
        inst = WnoInstance.from_json(path.read_text())
        drop, add = label_wno(inst, args.iterations, seed=args.seed, source=path.stem)
        drop_all.extend(drop)
        add_all.extend(add)
    dump_jsonl(drop_all, out / "drop.jsonl")
    dump_jsonl(add_all, out / "add.jsonl")
    cfg = {"iterations": args.iterations, "seed": args.seed}
    manifest = {
        "drop": dataset_manifest(drop_all, cfg),
        "add": dataset_manifest(add_all, cfg),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    print(
        f"drop: {len(drop_all)} samples, positive rate {manifest['drop']['positive_rate']:.3f}"
    )
    print(f"add: {len(add_all)} samples, positive rate {manifest['add']['positive_rate']:.3f}")
    return 0


def cmd_label_mip(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = MipLabelerConfig(
        time_limit=args.lb_time_limit,
        node_limit=args.lb_node_limit,
        initial_node_limit=args.initial_node_limit,
    )
    samples: list[LabeledSample] = []
    skipped = []
    for path in _instance_paths(args.instances):
        inst = MipInstance.from_json(path.read_text())
        got, reason = label_mip(inst, cfg, n_rounds=args.rounds, seed=args.seed, source=path.stem)
        if reason is not None:
            skipped.append({"instance": path.stem, "reason": reason})
            continue
        samples.extend(got)
    dump_jsonl(samples, out / "destroy.jsonl")
    manifest = dataset_manifest(
        samples,
        {
            "rounds": args.rounds,
            "seed": args.seed,
            "lb_time_limit": args.lb_time_limit,
            "lb_node_limit": args.lb_node_limit,
        },
    )
    manifest["skipped_instances"] = skipped
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    print(f"destroy: {len(samples)} samples, positive rate {manifest['positive_rate']:.3f}")
    if skipped:
        print(f"skipped {len(skipped)} instance(s)")
    return 0


def cmd_split(args) -> int:
    samples = load_jsonl(args.data)
    train_s, val_s, test_s = split_dataset(samples, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dump_jsonl(train_s, out / "train.jsonl")
    dump_jsonl(val_s, out / "val.jsonl")
    dump_jsonl(test_s, out / "test.jsonl")
    print(f"train {len(train_s)} / val {len(val_s)} / test {len(test_s)}")
    return 0


def cmd_train(args) -> int:
    data = Path(args.data)
    if data.is_dir():
        train_samples = load_jsonl(data / "train.jsonl")
        val_path = data / "val.jsonl"
        val_samples = load_jsonl(val_path) if val_path.exists() else []
    else:
        train_samples = load_jsonl(data)
        val_samples = []
    loss = LossSpec(
        kind=args.loss, lam=getattr(args, "lambda"), alpha=args.alpha, gamma=args.gamma
    )
    result = train(
        train_samples,
        val_samples,
        loss,
        seed=args.seed,
        config=TrainConfig(epochs=args.epochs, hidden=args.hidden, layers=args.layers),
    )
    result.model.meta["task"] = args.task
    save_model(result.model, args.out)
    print(
        f"trained {args.task}: {len(train_samples)} samples, "
        f"best epoch {result.best_epoch}, "
        f"train loss {result.train_losses[result.best_epoch]:.5f}, "
        f"val loss {result.val_losses[result.best_epoch]:.5f}"
    )
    return 0


def _synthetic_sample(model, rng: np.random.Generator) -> LabeledSample:
    """Random state matching the model's input dimensions, for grad-check."""
    arch = model.arch
    if isinstance(arch, GraphArch):
        n, m = 6, 8
        edges = [(i, (i + 1) % n) for i in range(n)] + [(0, 2), (1, 4)]
        state = FeatureGraph(
            node_features=rng.normal(size=(n, arch.node_dim)),
            edges=np.array(edges[:m]),
            edge_features=rng.normal(size=(m, arch.edge_dim)),
        )
        label = rng.integers(0, 2, size=m)
    else:
        nv, nc = 6, 4
        edges = [(v, c) for v in range(nv) for c in range(nc) if (v + c) % 2 == 0]
        state = BipartiteGraph(
            var_features=rng.normal(size=(nv, arch.var_dim)),
            cons_features=rng.normal(size=(nc, arch.cons_dim)),
            edges=np.array(edges),
            edge_features=rng.normal(size=(len(edges), arch.edge_dim)),
        )
        label = rng.integers(0, 2, size=nv)
    return LabeledSample(state=state, label=label)


def cmd_grad_check(args) -> int:
    model = load_model(args.model)
    rng = np.random.default_rng(args.seed)
    sample = _synthetic_sample(model, rng)
    loss = LossSpec.from_dict(model.meta.get("loss", {}))
    err = gradient_check(model, sample, loss, n_coords=args.coords, seed=args.seed)
    print(f"max relative gradient error: {err:.3e}")
    return 0


def cmd_run_ts(args) -> int:
    inst = WnoInstance.from_json(Path(args.instance).read_text())
    drop_model = load_model(args.drop_model) if args.drop_model else None
    add_model = load_model(args.add_model) if args.add_model else None
    mode = TsMode(tag=args.mode, drop_model=drop_model, add_model=add_model)
    res = ts_run(inst, mst_initial(inst), mode, _termination(args), seed=args.seed)
    payload = res.to_json()
    if args.out:
        Path(args.out).write_text(payload)
    print(f"best_f {res.best_f:.6f} after {res.iterations} iterations")
    return 0


def cmd_run_lns(args) -> int:
    inst = MipInstance.from_json(Path(args.instance).read_text())
    initial, reason = find_initial_incumbent(inst, args.initial_node_limit)
    if initial is None:
        raise ValueError(f"no initial incumbent: {reason}")
    if args.policy == "lb":
        res = lb_baseline_run(
            inst,
            initial,
            k=min(args.lb_k, inst.n_vars),
            termination=_termination(args),
            step_node_limit=args.repair_node_limit,
            step_time_limit=args.repair_time_limit,
        )
    else:
        model = load_model(args.model) if args.model else None
        policy = DestroyPolicy(kind=args.policy, k_max=args.k_max, model=model, seed=args.seed)
        res = lns_run(
            inst,
            initial,
            policy,
            _termination(args),
            repair_node_limit=args.repair_node_limit,
            repair_time_limit=args.repair_time_limit,
        )
    if args.out:
        Path(args.out).write_text(res.to_json())
    print(f"best_value {res.best_value:.6f} after {res.iterations} iterations")
    return 0


def cmd_run_experiment(args) -> int:
    cfg = load_config(args.config)
    report = run_experiment(cfg)
    for alg, agg in report.aggregates().items():
        print(
            f"{alg}: mean primal integral {agg['mean_primal_integral']:.3f}, "
            f"mean iterations {agg['mean_iterations']:.1f}"
        )
    print(f"report written to {cfg['out_dir']}")
    return 0


def cmd_report(args) -> int:
    in_dir = Path(getattr(args, "in"))
    records = []
    for path in sorted(in_dir.glob("*.json")):
        if path.name in ("report.json",):
            continue
        d = json.loads(path.read_text())
        if "events" in d:
            records.append(d)
    if not records:
        raise ValueError(f"no cell result files in {in_dir}")
    report = collect_report(records)
    payload = report_csv(report) if args.format == "csv" else report_json(report)
    if args.out:
        Path(args.out).write_text(payload)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(payload)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nslearn",
        description="Metaheuristics with learned variable-selection policies",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wno-gen", help="generate network instances")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_wno_gen)

    p = sub.add_parser("mip-gen", help="generate binary MIP instances")
    p.add_argument("--family", choices=("set-cover", "knapsack-conflicts"), required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--n-cols", type=int, default=150)
    p.add_argument("--n-rows", type=int, default=120)
    p.add_argument("--density", type=float, default=0.05)
    p.add_argument("--cost-min", type=int, default=1)
    p.add_argument("--cost-max", type=int, default=100)
    p.add_argument("--n-items", type=int, default=150)
    p.add_argument("--n-conflicts", type=int, default=200)
    p.add_argument("--value-min", type=int, default=1)
    p.add_argument("--value-max", type=int, default=100)
    p.add_argument("--weight-min", type=int, default=1)
    p.add_argument("--weight-max", type=int, default=50)
    p.add_argument("--capacity-fraction", type=float, default=0.3)
    p.set_defaults(fn=cmd_mip_gen)

    p = sub.add_parser("label-wno", help="build drop/add edge datasets")
    p.add_argument("--instances", nargs="+", required=True)
    p.add_argument("--iterations", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_label_wno)

    p = sub.add_parser("label-mip", help="build destroy datasets via the LB expert")
    p.add_argument("--instances", nargs="+", required=True)
    p.add_argument("--rounds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--lb-time-limit", type=float, default=5.0)
    p.add_argument("--lb-node-limit", type=int, default=50_000)
    p.add_argument("--initial-node-limit", type=int, default=5_000)
    p.set_defaults(fn=cmd_label_mip)

    p = sub.add_parser("split", help="70/10/20 instance-level dataset split")
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_split)

    p = sub.add_parser("train", help="train a variable-selection classifier")
    p.add_argument("--task", choices=("drop", "add", "destroy"), required=True)
    p.add_argument("--data", required=True, help="split directory or a train jsonl file")
    p.add_argument("--loss", choices=("wce", "focal"), default="wce")
    p.add_argument("--lambda", type=float, default=0.7, dest="lambda")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("grad-check", help="finite-difference check of a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--coords", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_grad_check)

    p = sub.add_parser("run-ts", help="run topology tabu search on one instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--mode", choices=TS_MODES, default="none")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--drop-model", default=None)
    p.add_argument("--add-model", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_run_ts)

    p = sub.add_parser("run-lns", help="run LNS or the LB baseline on one instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--policy", choices=("random", "gnn-greedy", "gnn-sample", "lb"), default="random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--k-max", type=int, default=40)
    p.add_argument("--lb-k", type=int, default=40)
    p.add_argument("--repair-node-limit", type=int, default=20_000)
    p.add_argument("--repair-time-limit", type=float, default=2.0)
    p.add_argument("--initial-node-limit", type=int, default=5_000)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_run_lns)

    p = sub.add_parser("run-experiment", help="run a full experiment matrix")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_run_experiment)

    p = sub.add_parser("report", help="emit CSV/JSON report from cell result files")
    p.add_argument("--in", required=True, dest="in")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, FileNotFoundError, ModelFormatError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
