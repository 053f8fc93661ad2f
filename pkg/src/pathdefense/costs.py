"""Defender loss: expected user distance, published-length error, and the
cost of attacker success.

For each target the attacker's best response is computed on the published
weights; the budget survival function turns its cost into an attack
probability. User routes are the deterministic shortest paths under the
published weights, in the attacked graph (weighted by the attack
probability) and in the untouched graph (weighted by the complement).
Distances traveled use the true weights; the error term compares true
versus published length of the same route. Pairs with zero probability are
skipped, which is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from pathdefense import attacks as attack_mod
from pathdefense.dists import BudgetDist, ThreatModel, budget_tail, support_pairs
from pathdefense.graphs import (
    CostVector,
    Graph,
    Path,
    UnreachableError,
    WeightVector,
    apply_cut,
    dist_to,
    _lex_path,
)

INF = float("inf")


@dataclass(frozen=True)
class CostBreakdown:
    """Loss components plus the attack probabilities they were built from."""

    l_d: float
    l_e: float
    l_s: float
    total: float
    z: dict[int, float]
    z_empty: float


@dataclass(frozen=True)
class PairOutcome:
    """True/observed length of one user route and the canonical split of
    their difference into nonnegative parts (one of which is zero)."""

    true_length: float
    observed_length: float
    d_pos: float = field(init=False)
    d_neg: float = field(init=False)

    def __post_init__(self):
        diff = self.observed_length - self.true_length
        object.__setattr__(self, "d_pos", max(diff, 0.0))
        object.__setattr__(self, "d_neg", max(-diff, 0.0))


def c_err(l_true: float, l_obs: float, f_plus: float, f_minus: float) -> float:
    """Asymmetric linear penalty on the published-length error."""
    if f_plus <= 0 or f_minus <= 0:
        raise ValueError("marginal error costs must be positive")
    if l_obs >= l_true:
        return f_plus * (l_obs - l_true)
    return f_minus * (l_true - l_obs)


def attack_probability(target_prob: float, attack_cost: float | None, b_dist: BudgetDist) -> float:
    """Pr[target drawn] * Pr[budget covers the attack]; no viable attack
    gives 0."""
    if attack_cost is None or math.isinf(attack_cost):
        return 0.0
    if attack_cost < 0:
        raise ValueError("attack cost must be nonnegative")
    return target_prob * budget_tail(b_dist, attack_cost)


def _route_lengths(g: Graph, w_true, w_pub, pairs_by_dest) -> dict[tuple[int, int], tuple[float, float]]:
    """For every (u, v) pair: (true length, published length) of the
    deterministic published-weight shortest route."""
    out: dict[tuple[int, int], tuple[float, float]] = {}
    for v, sources in pairs_by_dest.items():
        dist = dist_to(g, w_pub, v)
        for u in sources:
            if not dist[u] < INF:
                raise UnreachableError(
                    f"pair ({u}, {v}) has positive probability but is disconnected"
                )
            nodes = _lex_path(g, w_pub, u, v, dist)
            true_len = 0.0
            obs_len = 0.0
            for a, b in zip(nodes, nodes[1:]):
                e = g.edge_index(a, b)
                true_len += w_true[e]
                obs_len += w_pub[e]
            out[(u, v)] = (true_len, obs_len)
    return out


def compute_cost(
    g: Graph,
    w: WeightVector,
    w_pub: WeightVector,
    c: CostVector,
    tm: ThreatModel,
    method: str = attack_mod.OPTIMAL,
    seed: int = 0,
    pools: dict[int, list] | None = None,
    attacks: dict[int, attack_mod.AttackResult] | None = None,
) -> CostBreakdown:
    """Exact expected defender loss under the threat model.

    ``attacks`` may carry precomputed per-target attack results (keyed by
    target index) so a caller that already ran them, e.g. the defense loop,
    charges exactly the attacks it evaluated.
    """
    pairs = list(support_pairs(tm.pair_dist, g))
    pairs_by_dest: dict[int, list[int]] = {}
    for u, v, _ in pairs:
        pairs_by_dest.setdefault(v, []).append(u)

    base_routes = _route_lengths(g, w.values, w_pub.values, pairs_by_dest)

    l_d = 0.0
    l_e = 0.0
    l_s = 0.0
    z: dict[int, float] = {}
    unattacked_weight = 0.0

    for idx, (p_star, p_path) in enumerate(tm.target_dist.entries):
        if attacks is not None and idx in attacks:
            res = attacks[idx]
        else:
            pool = pools.get(idx) if pools is not None else None
            res = attack_mod.attack(
                g, w_pub, c, p_star, method=method, seed=_target_seed(seed, idx), pool=pool
            )
        p_attack = budget_tail(tm.budget_dist, res.solution_cost) if not math.isinf(res.solution_cost) else 0.0
        z[idx] = p_path * p_attack
        if p_attack > 0.0:
            cut_view = apply_cut(g, res.cut)
            cut_routes = _route_lengths(cut_view, w.values, w_pub.values, pairs_by_dest)
            for u, v, q in pairs:
                true_len, obs_len = cut_routes[(u, v)]
                l_d += p_path * p_attack * q * true_len
                l_e += p_path * p_attack * q * c_err(true_len, obs_len, tm.f_plus, tm.f_minus)
        unattacked_weight += p_path * (1.0 - p_attack)
        l_s += tm.lam * p_path * p_attack

    # Residual target mass ("no target drawn") also sees the unattacked
    # graph, so the unattacked weight totals 1 - sum(z).
    unattacked_weight += 1.0 - tm.target_dist.total_mass
    if unattacked_weight > 0.0:
        for u, v, q in pairs:
            true_len, obs_len = base_routes[(u, v)]
            l_d += unattacked_weight * q * true_len
            l_e += unattacked_weight * q * c_err(true_len, obs_len, tm.f_plus, tm.f_minus)

    z_empty = 1.0 - math.fsum(z.values())
    total = l_d + l_e + l_s
    return CostBreakdown(l_d=l_d, l_e=l_e, l_s=l_s, total=total, z=z, z_empty=z_empty)


def _target_seed(seed: int, idx: int) -> int:
    return (seed * 1000003 + idx) % (2**63)


def lower_bound_cost(g: Graph, w: WeightVector, tm: ThreatModel) -> float:
    """Cost with no attack and no perturbation: expected true shortest
    distance over the pair distribution. Normalization denominator for all
    reported costs."""
    pairs = list(support_pairs(tm.pair_dist, g))
    dests: dict[int, list[int]] = {}
    for u, v, _ in pairs:
        dests.setdefault(v, []).append(u)
    dist_by_dest = {v: dist_to(g, w, v) for v in dests}
    total = 0.0
    for u, v, q in pairs:
        d = float(dist_by_dest[v][u])
        if not d < INF:
            raise UnreachableError(f"pair ({u}, {v}) has positive probability but is disconnected")
        total += q * d
    return total
