"""Greedy weight-increment defense and a crude inflate-everything baseline.

Each round proposes candidate increments (per target: lengthen a target
edge just enough to tie the post-attack runner-up), scores every candidate
by the total attack probability it would leave, keeps the best one, and
re-evaluates the full defender cost. Scoring ties prefer the candidate that
leaves the targets longest on average. The loop stops on any of: cost below
the cost threshold, attack probability below its threshold, no candidates,
or the iteration cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from pathdefense import attacks as attack_mod
from pathdefense import costs as costs_mod
from pathdefense.dists import TargetPathDist, ThreatModel, budget_tail
from pathdefense.graphs import (
    CostVector,
    Graph,
    Path,
    WeightVector,
    apply_cut,
    second_shortest_excluding,
)


@dataclass(frozen=True)
class DefenseConfig:
    eps_cost: float = 0.0
    eps_attack: float = 1e-6
    max_iters: int = 500
    attack_method: str = attack_mod.LP
    seed: int = 0
    # Ablation switch: increment runner-up edges off the target instead of
    # target edges off the runner-up.
    strict_pseudocode: bool = False

    def __post_init__(self):
        if not 0.0 <= self.eps_attack <= 1.0:
            raise ValueError("eps_attack must be a probability")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.attack_method not in attack_mod.METHODS:
            raise ValueError(f"unknown attack method {self.attack_method!r}")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    edge: int
    delta: float
    z_min: float
    l_d: float
    l_e: float
    l_s: float
    total: float


@dataclass
class DefenseTrace:
    records: list[IterationRecord] = field(default_factory=list)
    final_weights: WeightVector | None = None


def get_edge_increments(
    g: Graph,
    w_pub: WeightVector,
    c: CostVector,
    targets: TargetPathDist,
    method: str = attack_mod.LP,
    seed: int = 0,
    pools: dict[int, list] | None = None,
    strict_pseudocode: bool = False,
) -> list[tuple[int, float]]:
    """Candidate (edge, increment) pairs, deterministically ordered.

    Per target: attack, then find the second shortest path between the
    target's terminals in the post-attack graph; the increment is the
    length gap, applied to any target edge off that path (so the runner-up
    becomes a tie the attacker must also cut). Targets that are the only
    surviving path contribute nothing.
    """
    ranked: list[tuple[int, int, float]] = []
    seen: set[tuple[int, float]] = set()
    for idx, (p_star, _) in enumerate(targets.entries):
        pool = pools.get(idx) if pools is not None else None
        res = attack_mod.attack(
            g, w_pub, c, p_star, method=method, seed=_seed_for(seed, idx), pool=pool
        )
        post = apply_cut(g, res.cut)
        second = second_shortest_excluding(post, w_pub, p_star.source, p_star.dest, p_star)
        if second is None:
            continue
        p, p_len = second
        delta = p_len - _path_sum(w_pub, p_star)
        if strict_pseudocode:
            eligible = [e for e in p.edges if e not in p_star.edge_set()]
        else:
            eligible = [e for e in p_star.edges if e not in p.edge_set()]
        for e in eligible:
            key = (e, delta)
            if key not in seen:
                seen.add(key)
                ranked.append((e, idx, delta))
    ranked.sort(key=lambda item: (item[0], item[1]))
    return [(e, delta) for e, _, delta in ranked]


def _path_sum(w: WeightVector, p: Path) -> float:
    total = 0.0
    for e in p.edges:
        total += w[e]
    return total


def _seed_for(seed: int, idx: int) -> int:
    return (seed * 1000003 + idx) % (2**63)


def pathdefense(
    g: Graph,
    w: WeightVector,
    c: CostVector,
    tm: ThreatModel,
    cfg: DefenseConfig | None = None,
) -> tuple[WeightVector, DefenseTrace]:
    """Iterative candidate-increment defense (see module docstring)."""
    cfg = cfg or DefenseConfig()
    wv = w.copy_values()
    trace = DefenseTrace()
    targets = tm.target_dist
    pools: dict[int, list] = {idx: [] for idx in range(len(targets.entries))}
    for iteration in range(1, cfg.max_iters + 1):
        increments = get_edge_increments(
            g,
            WeightVector(wv),
            c,
            targets,
            method=cfg.attack_method,
            seed=cfg.seed,
            pools=pools,
            strict_pseudocode=cfg.strict_pseudocode,
        )
        if not increments:
            break
        best = None  # (z, -expected_len, order) with the kept attack results
        for order, (e, delta) in enumerate(increments):
            old = wv[e]
            wv[e] = old + delta
            cand_w = WeightVector(wv)
            z_total = 0.0
            expected_len = 0.0
            attacks: dict[int, attack_mod.AttackResult] = {}
            for idx, (p_star, prob) in enumerate(targets.entries):
                res = attack_mod.attack(
                    g, cand_w, c, p_star,
                    method=cfg.attack_method,
                    seed=_seed_for(cfg.seed, idx),
                    pool=pools[idx],
                )
                attacks[idx] = res
                z_total += prob * budget_tail(tm.budget_dist, res.solution_cost)
                expected_len += prob * _path_sum(cand_w, p_star)
            wv[e] = old
            if best is None or z_total < best[0] or (z_total == best[0] and expected_len > best[1]):
                best = (z_total, expected_len, e, delta, attacks)
        z_min, _, e_min, delta_min, kept_attacks = best
        wv[e_min] = wv[e_min] + delta_min
        breakdown = costs_mod.compute_cost(
            g, w, WeightVector(wv), c, tm,
            method=cfg.attack_method, seed=cfg.seed, attacks=kept_attacks,
        )
        trace.records.append(
            IterationRecord(
                iteration=iteration,
                edge=e_min,
                delta=delta_min,
                z_min=z_min,
                l_d=breakdown.l_d,
                l_e=breakdown.l_e,
                l_s=breakdown.l_s,
                total=breakdown.total,
            )
        )
        if breakdown.total < cfg.eps_cost or z_min < cfg.eps_attack:
            break
    final = WeightVector(wv)
    trace.final_weights = final
    return final, trace


def bigweight(g: Graph, w: WeightVector, targets: TargetPathDist) -> WeightVector:
    """Inflate every target edge to (total graph weight) / (target length in
    edges), taking the max over targets sharing an edge, and never dropping
    below the true weight."""
    if not targets.entries:
        raise ValueError("targets must be nonempty")
    total = math.fsum(w.values.tolist())
    wv = w.copy_values()
    for p_star, _ in targets.entries:
        inflated = total / len(p_star.edges)
        for e in p_star.edges:
            if inflated > wv[e]:
                wv[e] = inflated
    return WeightVector(wv)
