"""Shortest-path attack/defense toolkit.

A weighted-graph library with minimum-cost path-cut attacks, weight
perturbation defenses (greedy increments, a zero-sum feasible-point
procedure, LP refinement), synthetic/real graph sources, and a seeded
experiment harness.
"""

__version__ = "0.1.0"

from pathdefense.attacks import (
    AttackResult,
    attack,
    competitors,
    greedy_cost_attack,
    is_unique_shortest,
    optimal_attack,
    pathattack_lp,
    repair_connectivity,
)
from pathdefense.costs import CostBreakdown, PairOutcome, attack_probability, c_err, compute_cost, lower_bound_cost
from pathdefense.defense import DefenseConfig, DefenseTrace, bigweight, get_edge_increments, pathdefense
from pathdefense.dists import (
    BudgetDist,
    PairDist,
    TargetPathDist,
    ThreatModel,
    budget_tail,
    build_experiment_pair_dist,
    observed_graph_prob,
    pair_prob,
)
from pathdefense.graphs import (
    CostVector,
    EdgeCut,
    GraphView,
    InvalidPathError,
    Path,
    UnreachableError,
    WeightedGraph,
    WeightVector,
    apply_cut,
    connected_components,
    is_connected,
    k_shortest_paths,
    path_length,
    second_shortest_excluding,
    shortest_path,
)
from pathdefense.locallp import FixedScenario, build_local_lp, fix_scenario, local_optimize, measure_epsilons
from pathdefense.zerosum import (
    KnapsackInstance,
    ReductionArtifacts,
    feasible_point_multi,
    feasible_point_single,
    knapsack_construct,
    knapsack_dp_oracle,
    knapsack_reduce,
    min_attack_probability,
)

__all__ = [name for name in dir() if not name.startswith("_")]
