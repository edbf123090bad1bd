"""Metaheuristics with learned variable-selection policies.

Topology tabu search for spanning-tree network design and large
neighborhood search for binary MIPs, both steerable by small
message-passing classifiers trained on expert labels, benchmarked with
the primal-integral metric.
"""

from .core import (
    IncumbentLog,
    OperatorParams,
    SearchState,
    SelectionMask,
    Termination,
    decide_greedy,
    decide_sample,
    fallback_topk,
    run_ns,
)
from .metrics import MetricReport, primal_gap, primal_integral

__version__ = "0.1.0"

__all__ = [
    "IncumbentLog",
    "MetricReport",
    "OperatorParams",
    "SearchState",
    "SelectionMask",
    "Termination",
    "decide_greedy",
    "decide_sample",
    "fallback_topk",
    "primal_gap",
    "primal_integral",
    "run_ns",
    "__version__",
]
