"""Zero-sum defense: drive the attack probability to its floor.

The feasible-point procedure lengthens the target path until the best
attack costs more than any budget the attacker could hold (or until no
competitor is left to cut). Since each loop iteration turns the current
runner-up path into an exact tie that the attacker must also cut, the
competitor family only grows, so the loop terminates.

The module also carries the executable Knapsack reduction: a chain of
triangles whose defense decisions are exactly item selections, used to
exercise the hardness construction end to end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from pathdefense import attacks as attack_mod
from pathdefense.dists import (
    BudgetDist,
    PairDist,
    TargetPathDist,
    ThreatModel,
    budget_tail,
)
from pathdefense.graphs import (
    CostVector,
    Path,
    WeightedGraph,
    WeightVector,
    apply_cut,
    second_shortest_excluding,
)

TAIL_STOP = 1e-12


def _attack_once(g, w_values, c, p_star, method, seed, pool):
    return attack_mod.attack(
        g, WeightVector(w_values), c, p_star, method=method, seed=seed, pool=pool
    )


def feasible_point_single(
    g,
    w: WeightVector,
    c: CostVector,
    p_star: Path,
    b_dist: BudgetDist,
    method: str = attack_mod.OPTIMAL,
    seed: int = 0,
    max_iters: int = 100000,
    start: WeightVector | None = None,
) -> WeightVector:
    """Lengthen the target until the attack outprices every budget.

    Loop: attack under the current published weights; find the second
    shortest terminal-to-terminal path in the post-attack graph; increment
    the first target edge not on that path by the length gap. Stops when
    the attack cost exceeds the largest possible budget (for unbounded
    budgets: when the budget tail drops below 1e-12) or when the target is
    the only surviving path.
    """
    wv = (start.values if start is not None else w.values).copy()
    cap = b_dist.max_support
    pool: list = []
    for _ in range(max_iters):
        res = _attack_once(g, wv, c, p_star, method, seed, pool)
        cost = res.solution_cost
        if math.isinf(cap):
            if budget_tail(b_dist, cost) < TAIL_STOP:
                break
        elif cost > cap:
            break
        post = apply_cut(g, res.cut)
        wvec = WeightVector(wv)
        second = second_shortest_excluding(post, wvec, p_star.source, p_star.dest, p_star)
        if second is None:
            break
        p, p_len = second
        eligible = [e for e in p_star.edges if e not in p.edge_set()]
        if not eligible:
            raise RuntimeError("no target edge lies outside the runner-up path")
        delta = p_len - sum_path(wv, p_star)
        wv[eligible[0]] += delta
    else:
        raise RuntimeError(f"feasible-point procedure did not stop within {max_iters} iterations")
    out = WeightVector(wv)
    return out


def sum_path(w_values, p: Path) -> float:
    total = 0.0
    for e in p.edges:
        total += w_values[e]
    return total


def _achieved_probability(g, wv, c, targets: TargetPathDist, b_dist, method, seed) -> float:
    """Attack probability at the given weights. An empty cut means the
    adversary has nothing to remove, which is counted as no attack."""
    total = 0.0
    for idx, (p_star, prob) in enumerate(targets.entries):
        res = _attack_once(g, wv, c, p_star, method, _seed_for(seed, idx), None)
        if res.no_attack or not res.cut.edges:
            continue
        total += prob * budget_tail(b_dist, res.solution_cost)
    return total


def _seed_for(seed: int, idx: int) -> int:
    return (seed * 1000003 + idx) % (2**63)


def feasible_point_multi(
    g,
    w: WeightVector,
    c: CostVector,
    targets: TargetPathDist,
    b_dist: BudgetDist,
    method: str = attack_mod.OPTIMAL,
    seed: int = 0,
) -> WeightVector:
    """Per-target feasible points, then one accumulating pass in order of
    increasing single-target attack probability."""
    if not targets.entries:
        raise ValueError("targets must be nonempty")
    scored = []
    for idx, (p_star, prob) in enumerate(targets.entries):
        single = feasible_point_single(g, w, c, p_star, b_dist, method=method, seed=_seed_for(seed, idx))
        res = _attack_once(g, single.values, c, p_star, method, _seed_for(seed, idx), None)
        achieved = 0.0
        if not res.no_attack and res.cut.edges:
            achieved = prob * budget_tail(b_dist, res.solution_cost)
        scored.append((achieved, idx, p_star))
    scored.sort(key=lambda item: (item[0], item[1]))
    current = w
    for _, idx, p_star in scored:
        current = feasible_point_single(
            g, w, c, p_star, b_dist, method=method, seed=_seed_for(seed, idx), start=current
        )
    return current


def min_attack_probability(
    g,
    w: WeightVector,
    c: CostVector,
    targets: TargetPathDist,
    b_dist: BudgetDist,
    method: str = attack_mod.OPTIMAL,
    seed: int = 0,
) -> float:
    """Attack probability achieved by the feasible-point defense.

    This is a constructive upper bound on the true minimum, which is not
    efficiently computable in general.
    """
    final = feasible_point_multi(g, w, c, targets, b_dist, method=method, seed=seed)
    return _achieved_probability(g, final.values, c, targets, b_dist, method, seed)


# Knapsack reduction ----------------------------------------------------------


@dataclass(frozen=True)
class KnapsackInstance:
    """Decision question: is there a subset with value >= value_threshold
    and weight <= weight_threshold?"""

    values: tuple[int, ...]
    weights: tuple[int, ...]
    value_threshold: int
    weight_threshold: int

    def __post_init__(self):
        if len(self.values) != len(self.weights) or not self.values:
            raise ValueError("need equal-length, nonempty value/weight lists")
        if any(v <= 0 for v in self.values) or any(h <= 0 for h in self.weights):
            raise ValueError("item values and weights must be positive integers")
        if self.value_threshold <= 0 or self.weight_threshold <= 0:
            raise ValueError("thresholds must be positive")

    @property
    def n(self) -> int:
        return len(self.values)


def read_knapsack_file(path) -> KnapsackInstance:
    """Plain-text instance: first line n, then n lines "value weight",
    last line "value_threshold weight_threshold"."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = [line.strip() for line in fh if line.strip()]
    if not raw:
        raise ValueError("empty knapsack file")
    try:
        n = int(raw[0])
    except ValueError as exc:
        raise ValueError(f"bad item count line: {raw[0]!r}") from exc
    if len(raw) != n + 2:
        raise ValueError(f"expected {n + 2} lines, found {len(raw)}")
    values, weights = [], []
    for line in raw[1 : n + 1]:
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"bad item line: {line!r}")
        values.append(int(parts[0]))
        weights.append(int(parts[1]))
    parts = raw[n + 1].split()
    if len(parts) != 2:
        raise ValueError(f"bad threshold line: {raw[n + 1]!r}")
    return KnapsackInstance(tuple(values), tuple(weights), int(parts[0]), int(parts[1]))


@dataclass(frozen=True)
class ReductionArtifacts:
    """Triangle-chain defense instance built from a knapsack instance.

    Node i on the bottom chain is u_i; the detour node of triangle i is
    ``n + i``. Edge indices per triangle i (1-based): 3(i-1) is the left
    detour edge {u_{i-1}, d_i}, 3(i-1)+1 the chain edge {u_{i-1}, u_i},
    3(i-1)+2 the right detour edge {d_i, u_i}.
    """

    graph: WeightedGraph
    weights: WeightVector
    costs: CostVector
    budget_dist: BudgetDist
    target_dist: TargetPathDist
    pair_dist: PairDist
    f_plus: float
    f_minus: float

    @property
    def target(self) -> Path:
        return self.target_dist.entries[0][0]

    def chain_edge(self, i: int) -> int:
        return 3 * (i - 1) + 1

    def detour_edges(self, i: int) -> tuple[int, int]:
        return 3 * (i - 1), 3 * (i - 1) + 2

    def threat_model(self, lam: float = 0.0) -> ThreatModel:
        return ThreatModel(
            pair_dist=self.pair_dist,
            target_dist=self.target_dist,
            budget_dist=self.budget_dist,
            lam=lam,
            f_plus=self.f_plus,
            f_minus=self.f_minus,
        )


def knapsack_construct(k: KnapsackInstance) -> ReductionArtifacts:
    """One triangle per item: the chain edge has weight 1 and cost 1, both
    detour edges cost the item's value, and the far detour edge weighs the
    item's weight. The budget is one below the value threshold, the target
    is the full bottom chain, and all traffic runs end to end."""
    n = k.n
    edges = []
    weights = []
    costs = []
    for i in range(1, n + 1):
        u_prev, u_cur, detour = i - 1, i, n + i
        edges.append((u_prev, detour))
        weights.append(1.0)
        costs.append(float(k.values[i - 1]))
        edges.append((u_prev, u_cur))
        weights.append(1.0)
        costs.append(1.0)
        edges.append((detour, u_cur))
        weights.append(float(k.weights[i - 1]))
        costs.append(float(k.values[i - 1]))
    g = WeightedGraph(2 * n + 1, edges, directed=False)
    w = WeightVector(np.array(weights))
    c = CostVector(np.array(costs))
    target = Path.from_nodes(g, tuple(range(n + 1)))
    return ReductionArtifacts(
        graph=g,
        weights=w,
        costs=c,
        budget_dist=BudgetDist.point_mass(k.value_threshold - 1),
        target_dist=TargetPathDist.from_paths([target], [1.0]),
        pair_dist=PairDist.from_map({(0, n): 1.0}),
        f_plus=1.0,
        f_minus=float(sum(k.weights)),
    )


def knapsack_reduce(k: KnapsackInstance, exact_defense: bool = True, method: str = attack_mod.OPTIMAL) -> bool:
    """Answer the knapsack question through the defense instance.

    Exact mode enumerates triangle subsets, lengthens each selected chain
    edge by its item weight (the optimal perturbation shape), keeps only
    selections whose detour costs total at least the value threshold (those
    zero out the attack probability against the constructed budget), and
    compares the cheapest such selection's weight against the weight
    threshold. Heuristic mode runs the feasible-point defense instead and
    reads the perturbed chain edges back off as chosen items.
    """
    art = knapsack_construct(k)
    n = k.n
    if exact_defense:
        best = None
        for size in range(n + 1):
            for combo in combinations(range(n), size):
                if sum(k.values[i] for i in combo) < k.value_threshold:
                    continue
                eta = sum(k.weights[i] for i in combo)
                if best is None or eta < best:
                    best = eta
        return best is not None and best <= k.weight_threshold
    defended = feasible_point_single(
        art.graph, art.weights, art.costs, art.target, art.budget_dist, method=method
    )
    achieved = _achieved_probability(
        art.graph, defended.values, art.costs, art.target_dist, art.budget_dist, method, 0
    )
    if achieved > 0.0:
        return False
    eta_total = 0
    for i in range(1, n + 1):
        e = art.chain_edge(i)
        if defended[e] > art.weights[e]:
            eta_total += k.weights[i - 1]
    return eta_total <= k.weight_threshold


def knapsack_dp_oracle(k: KnapsackInstance) -> bool:
    """Classic weight-indexed dynamic program; the independent answer the
    reduction is tested against."""
    cap = k.weight_threshold
    best = [0] * (cap + 1)
    for v, h in zip(k.values, k.weights):
        for budget in range(cap, h - 1, -1):
            cand = best[budget - h] + v
            if cand > best[budget]:
                best[budget] = cand
    return best[cap] >= k.value_threshold
