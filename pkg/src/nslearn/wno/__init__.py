from .instance import WnoInstance, generate_instance
from .topology import (
    Topology,
    cut_candidates,
    descendant_counts,
    edge_swap_neighbors,
    mst_initial,
    normalize_edge,
)
from .objective import (
    NetworkConfig,
    ThroughputReport,
    approx_objective,
    approx_objective_value,
    congestion,
    direct_throughput,
    full_objective,
    throughput_report,
)
from .features import add_features, drop_features
from .tabu import (
    TS_MODES,
    TabuLists,
    TsMode,
    TsRunResult,
    is_tabu,
    tabu_lengths,
    ts_run,
    update_tabu,
)

__all__ = [
    "TS_MODES",
    "NetworkConfig",
    "TabuLists",
    "ThroughputReport",
    "Topology",
    "TsMode",
    "TsRunResult",
    "WnoInstance",
    "add_features",
    "approx_objective",
    "approx_objective_value",
    "congestion",
    "cut_candidates",
    "descendant_counts",
    "direct_throughput",
    "drop_features",
    "edge_swap_neighbors",
    "full_objective",
    "generate_instance",
    "is_tabu",
    "mst_initial",
    "normalize_edge",
    "tabu_lengths",
    "throughput_report",
    "ts_run",
    "update_tabu",
]
