"""Expert labeling of training data, and the instance-level dataset split.

Drop/add edge labels come from exhaustively evaluating every edge-swap move
against the fast topology score during a plain tabu-search trajectory; a
droppable edge is improving when its best reconnection beats the current
score, an addable edge when its own reconnection does. MIP destroy labels
come from the local-branching expert: the variables whose values changed in
the radius-bounded step are the improving ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SelectionMask
from .gnn.graphs import LabeledSample
from .gnn.train import positive_rate
from .mip.lns import repair
from .mip.model import MipInstance, check_feasible, to_bipartite_graph
from .mip.solver import lb_step, solve
from .wno.features import add_features, drop_features
from .wno.instance import WnoInstance
from .wno.objective import approx_objective_value, full_objective
from .wno.tabu import TabuLists, is_tabu, tabu_lengths, update_tabu
from .wno.topology import Topology, cut_candidates, mst_initial

__all__ = [
    "label_wno",
    "MipLabelerConfig",
    "find_initial_incumbent",
    "label_mip",
    "split_dataset",
    "dataset_manifest",
]


def label_wno(
    instance: WnoInstance,
    n_iterations: int,
    seed: int,
    source: str | None = None,
) -> tuple[list[LabeledSample], list[LabeledSample]]:
    """Run the enumeration tabu search from the MST and label every state.

    Emits one droppable-graph sample per iteration and one addable-graph
    sample per (iteration, dropped edge), then makes the normal tabu move.
    """
    if n_iterations < 1:
        raise ValueError("n_iterations must be >= 1")
    source = source or f"wno_n{instance.n}_s{instance.seed}"
    n = instance.n
    rng = np.random.default_rng(seed)
    lists = TabuLists(*tabu_lengths(n))

    t = mst_initial(instance)
    _, config = full_objective(instance, t)
    fbar_best = approx_objective_value(instance, t)

    drop_samples: list[LabeledSample] = []
    add_samples: list[LabeledSample] = []

    for it in range(n_iterations):
        fbar_t = approx_objective_value(instance, t)
        drop_labels = []
        chosen = None
        chosen_fbar = -float("inf")

        for e in t.edges:
            remaining = [x for x in t.edges if x != e]
            adds = cut_candidates(t, e)
            add_labels = []
            e_best = -float("inf")
            for a in adds:
                fbar_n = approx_objective_value(instance, Topology(remaining + [a], n=n))
                add_labels.append(1 if fbar_n > fbar_t else 0)
                if fbar_n > e_best:
                    e_best = fbar_n
                move = (e, a)
                if is_tabu(move, lists) and not fbar_n > fbar_best:
                    continue
                if (
                    chosen is None
                    or fbar_n > chosen_fbar
                    or (fbar_n == chosen_fbar and move < chosen)
                ):
                    chosen, chosen_fbar = move, fbar_n
            drop_labels.append(1 if e_best > fbar_t else 0)
            add_samples.append(
                LabeledSample(
                    state=add_features(instance, t, e, config),
                    label=np.array(add_labels),
                    source=source,
                    meta={"iteration": it, "dropped": list(e)},
                )
            )
        drop_samples.append(
            LabeledSample(
                state=drop_features(instance, t, config),
                label=np.array(drop_labels),
                source=source,
                meta={"iteration": it},
            )
        )

        if chosen is None:
            # every move tabu without aspiration: forced random non-tabu-free move
            pool = [(e, a) for e in t.edges for a in cut_candidates(t, e)]
            if not pool:
                break
            non_tabu = [m for m in pool if not is_tabu(m, lists)]
            chosen = (non_tabu or pool)[int(rng.integers(len(non_tabu or pool)))]
            chosen_fbar = approx_objective_value(
                instance,
                Topology([x for x in t.edges if x != chosen[0]] + [chosen[1]], n=n),
            )
        if chosen_fbar > fbar_best:
            fbar_best = chosen_fbar
        e, a = chosen
        t = Topology([x for x in t.edges if x != e] + [a], n=n)
        update_tabu(lists, chosen)
        _, config = full_objective(instance, t)

    return drop_samples, add_samples


@dataclass(frozen=True)
class MipLabelerConfig:
    """Desk-scaled stand-in for the original 600-second expert budget."""

    lb_radius_fraction: float = 0.25
    time_limit: float | None = 5.0
    node_limit: int | None = 50_000
    initial_node_limit: int = 5_000


def find_initial_incumbent(
    instance: MipInstance, node_limit: int = 5_000
) -> tuple[tuple[int, ...] | None, str | None]:
    """First feasible point from a bounded tree search, else the all-ones
    fallback for covering structure; (None, reason) when neither exists."""
    res = solve(instance, node_limit=node_limit, first_feasible=True)
    if res.best is not None:
        return res.best, None
    allones = tuple([1] * instance.n_vars)
    ok, _ = check_feasible(instance, allones)
    if ok:
        return allones, None
    return None, f"no feasible point within {node_limit} nodes and all-ones infeasible"


def label_mip(
    instance: MipInstance,
    config: MipLabelerConfig | None = None,
    n_rounds: int = 5,
    seed: int = 0,
    source: str | None = None,
) -> tuple[list[LabeledSample], str | None]:
    """Local-branching expert labels; (samples, skip_reason).

    The expert itself is deterministic; `seed` is recorded in sample
    metadata only. Rounds stop early once a step returns the incumbent
    unchanged (further rounds would duplicate the all-zero sample).
    """
    config = config or MipLabelerConfig()
    source = source or (instance.name or "mip")
    x_bar, reason = find_initial_incumbent(instance, config.initial_node_limit)
    if x_bar is None:
        return [], reason

    n = instance.n_vars
    k = math.ceil(config.lb_radius_fraction * n)
    samples: list[LabeledSample] = []
    for rnd in range(n_rounds):
        ok, row = check_feasible(instance, x_bar)
        if not ok:
            raise AssertionError(f"labeling incumbent violates constraint {row}")
        res = lb_step(
            instance, x_bar, k, node_limit=config.node_limit, time_limit=config.time_limit
        )
        x_star = res.best
        labels = np.array([1 if x_star[j] != x_bar[j] else 0 for j in range(n)])
        samples.append(
            LabeledSample(
                state=to_bipartite_graph(instance, x_bar),
                label=labels,
                source=source,
                meta={"round": rnd, "seed": seed, "k": k},
            )
        )
        if labels.sum() == 0:
            break
        x_bar = repair(
            instance,
            x_bar,
            SelectionMask(tuple(int(b) for b in labels)),
            node_limit=config.node_limit,
            time_limit=config.time_limit,
        )
    return samples, None


def split_dataset(
    dataset: list[LabeledSample], seed: int
) -> tuple[list[LabeledSample], list[LabeledSample], list[LabeledSample]]:
    """70/10/20 split by source instance (rounded, remainder to train);
    samples from one instance never straddle splits."""
    if not dataset:
        raise ValueError("dataset is empty")
    sources = sorted({s.source for s in dataset})
    if len(sources) < 3:
        raise ValueError(f"need >= 3 source instances, got {len(sources)}")
    rng = np.random.default_rng(seed)
    shuffled = [sources[i] for i in rng.permutation(len(sources))]
    m = len(sources)
    n_val = round(0.1 * m)
    n_test = round(0.2 * m)
    n_train = m - n_val - n_test
    train_src = set(shuffled[:n_train])
    val_src = set(shuffled[n_train : n_train + n_val])
    test_src = set(shuffled[n_train + n_val :])
    train = [s for s in dataset if s.source in train_src]
    val = [s for s in dataset if s.source in val_src]
    test = [s for s in dataset if s.source in test_src]
    return train, val, test


def dataset_manifest(samples: list[LabeledSample], generator_config: dict) -> dict:
    sources = sorted({s.source for s in samples})
    return {
        "format_version": 1,
        "generator_config": generator_config,
        "samples": len(samples),
        "source_instances": sources,
        "positive_rate": positive_rate(samples),
    }
