from .model import (
    Constraint,
    MipInstance,
    add_local_branching_constraint,
    check_feasible,
    hamming_distance,
    objective_value,
    to_bipartite_graph,
)
from .generators import generate_knapsack_conflicts, generate_set_cover
from .solver import SolveResult, lb_step, solve
from .lns import (
    DEFAULT_K_MAX,
    DestroyPolicy,
    LnsRunResult,
    destroy,
    lb_baseline_run,
    lns_run,
    repair,
)

__all__ = [
    "Constraint",
    "DEFAULT_K_MAX",
    "DestroyPolicy",
    "LnsRunResult",
    "MipInstance",
    "SolveResult",
    "add_local_branching_constraint",
    "check_feasible",
    "destroy",
    "generate_knapsack_conflicts",
    "generate_set_cover",
    "hamming_distance",
    "lb_baseline_run",
    "lb_step",
    "lns_run",
    "objective_value",
    "repair",
    "solve",
    "to_bipartite_graph",
]
