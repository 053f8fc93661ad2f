"""Linear refinement around a defended weight vector.

With the per-target attacks and all user routes frozen at an anchor point,
the error part of the defender cost is linear in the published weights.
The LP keeps every frozen route optimal (no path may undercut it), keeps
every frozen attack sufficient (all rival paths stay a margin above the
target after its cut) and necessary (paths that were competitive at the
anchor stay no longer than the target), and minimizes the expected
over/under-statement penalty. Route-optimality and sufficiency constraints
range over exponentially many paths, so they are generated lazily from
shortest-path probes.

The distance and success components are constants once routes and cuts are
frozen, so they are left out of the objective. The refined weights are
accepted only if they beat the anchor, both on the LP objective and on a
live re-evaluation of the full cost; otherwise the anchor is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from pathdefense import attacks as attack_mod
from pathdefense import costs as costs_mod
from pathdefense.dists import ThreatModel, budget_tail, support_pairs
from pathdefense.graphs import (
    CostVector,
    EdgeCut,
    Graph,
    Path,
    WeightVector,
    apply_cut,
    dist_to,
    second_shortest_excluding,
    _lex_path,
)
from pathdefense.lp import LpModel, LpStatus, lp_solve

SEP_TOL = 1e-9
EPSILON_FLOOR = 1e-6
MAX_GENERATED = 10000


class LocalLpError(Exception):
    """The anchor was not actually a feasible point."""


SlotKey = int | None  # target index, or None for the no-attack slot


@dataclass
class FixedScenario:
    """Attacks, their probabilities, and user routes frozen at an anchor."""

    cuts: dict[int, EdgeCut]
    z: dict[int, float]
    z_empty: float
    slots: list[SlotKey]
    pairs: list[tuple[int, int, float]]
    fixed_paths: dict[tuple[int, int, SlotKey], tuple[int, ...]]
    epsilons: dict[int, float]
    anchor_competitors: dict[int, list[Path]]
    big_m: float
    costs: CostVector
    attack_method: str
    seed: int = 0

    def cut_of(self, slot: SlotKey) -> EdgeCut:
        if slot is None:
            return EdgeCut.empty()
        return self.cuts[slot]

    def slot_prob(self, slot: SlotKey) -> float:
        return self.z_empty if slot is None else self.z[slot]


def fix_scenario(
    g: Graph,
    w_anchor: WeightVector,
    c: CostVector,
    tm: ThreatModel,
    method: str = attack_mod.OPTIMAL,
    seed: int = 0,
    competitor_limit: int = 2000,
) -> FixedScenario:
    """Freeze attacks and user routes at the anchor weights."""
    cuts: dict[int, EdgeCut] = {}
    z: dict[int, float] = {}
    for idx, (p_star, prob) in enumerate(tm.target_dist.entries):
        res = attack_mod.attack(
            g, w_anchor, c, p_star, method=method, seed=costs_mod._target_seed(seed, idx)
        )
        cuts[idx] = res.cut
        z[idx] = prob * budget_tail(tm.budget_dist, res.solution_cost)
    z_empty = 1.0 - math.fsum(z.values())
    slots: list[SlotKey] = []
    if z_empty > 0.0:
        slots.append(None)
    slots.extend(idx for idx in sorted(z) if z[idx] > 0.0)

    pairs = list(support_pairs(tm.pair_dist, g))
    pairs_by_dest: dict[int, list[int]] = {}
    for u, v, _ in pairs:
        pairs_by_dest.setdefault(v, []).append(u)
    fixed_paths: dict[tuple[int, int, SlotKey], tuple[int, ...]] = {}
    for slot in slots:
        view = apply_cut(g, cuts[slot]) if slot is not None else g
        for v, sources in pairs_by_dest.items():
            dist = dist_to(view, w_anchor, v)
            for u in sources:
                if not dist[u] < math.inf:
                    raise LocalLpError(f"pair ({u}, {v}) disconnected in slot {slot}")
                nodes = _lex_path(view, w_anchor, u, v, dist)
                fixed_paths[(u, v, slot)] = tuple(nodes)

    anchor_competitors = {
        idx: attack_mod.competitors(g, w_anchor, p_star, limit=competitor_limit)
        for idx, (p_star, _) in enumerate(tm.target_dist.entries)
    }
    scenario = FixedScenario(
        cuts=cuts,
        z=z,
        z_empty=z_empty,
        slots=slots,
        pairs=pairs,
        fixed_paths=fixed_paths,
        epsilons={},
        anchor_competitors=anchor_competitors,
        big_m=attack_mod.big_m(g, w_anchor),
        costs=c,
        attack_method=method,
        seed=seed,
    )
    scenario.epsilons.update(measure_epsilons(g, w_anchor, scenario, tm))
    return scenario


def measure_epsilons(g: Graph, w_anchor: WeightVector, scenario: FixedScenario, tm: ThreatModel) -> dict[int, float]:
    """Per-target margin: post-attack runner-up length minus target length
    at the anchor, floored at 1e-6."""
    out: dict[int, float] = {}
    for idx, (p_star, _) in enumerate(tm.target_dist.entries):
        post = apply_cut(g, scenario.cuts[idx])
        target_len = _nodes_len(p_star.nodes, g, w_anchor.values)
        second = second_shortest_excluding(post, w_anchor, p_star.source, p_star.dest, p_star)
        if second is None:
            out[idx] = EPSILON_FLOOR
            continue
        gap = second[1] - target_len
        if gap < 0:
            raise LocalLpError(f"target {idx} is not uniquely shortest after its fixed cut")
        out[idx] = max(gap, EPSILON_FLOOR)
    return out


def _nodes_len(nodes, g: Graph, w_values) -> float:
    total = 0.0
    for a, b in zip(nodes, nodes[1:]):
        total += w_values[g.edge_index(a, b)]
    return total


def _path_edges(nodes, g: Graph) -> list[int]:
    return [g.edge_index(a, b) for a, b in zip(nodes, nodes[1:])]


@dataclass
class _Workspace:
    model: LpModel
    obs_var: dict[tuple[int, int, SlotKey], int]
    n_edges: int
    seen_routes: set = field(default_factory=set)
    seen_sufficiency: set = field(default_factory=set)


def _build_workspace(g: Graph, w_true: WeightVector, scenario: FixedScenario, tm: ThreatModel) -> _Workspace:
    model = LpModel()
    m = g.edge_count
    for e in range(m):
        model.add_var(obj=0.0, lower=0.0, upper=math.inf, name=f"w_{e}")
    obs_var: dict[tuple[int, int, SlotKey], int] = {}
    for slot in scenario.slots:
        zs = scenario.slot_prob(slot)
        for u, v, q in scenario.pairs:
            nodes = scenario.fixed_paths[(u, v, slot)]
            edges = _path_edges(nodes, g)
            true_len = _nodes_len(nodes, g, w_true.values)
            obs = model.add_var(0.0, 0.0, math.inf, name=f"obs_{u}_{v}_{slot}")
            dpos = model.add_var(q * zs * tm.f_plus, 0.0, math.inf, name=f"dpos_{u}_{v}_{slot}")
            dneg = model.add_var(q * zs * tm.f_minus, 0.0, math.inf, name=f"dneg_{u}_{v}_{slot}")
            obs_var[(u, v, slot)] = obs
            terms = {obs: 1.0}
            for e in edges:
                terms[e] = terms.get(e, 0.0) - 1.0
            model.add_constraint(terms, "=", 0.0)
            model.add_constraint({dpos: 1.0, dneg: -1.0, obs: -1.0}, "=", -true_len)
    # Necessity: anchor competitors stay no longer than their target.
    for idx, (p_star, _) in enumerate(tm.target_dist.entries):
        star_edges = set(p_star.edges)
        for q_path in scenario.anchor_competitors[idx]:
            terms: dict[int, float] = {}
            for e in p_star.edges:
                terms[e] = terms.get(e, 0.0) + 1.0
            for e in q_path.edges:
                terms[e] = terms.get(e, 0.0) - 1.0
            terms = {e: coef for e, coef in terms.items() if coef != 0.0}
            if terms:
                model.add_constraint(terms, ">=", 0.0)
    return _Workspace(model=model, obs_var=obs_var, n_edges=m)


def build_local_lp(g: Graph, w_true: WeightVector, w_anchor: WeightVector, scenario: FixedScenario, tm: ThreatModel) -> LpModel:
    """The refinement LP (lazy families start empty; see local_optimize)."""
    return _build_workspace(g, w_true, scenario, tm).model


def _add_route_constraint(ws: _Workspace, g: Graph, scenario: FixedScenario, pair_slot, nodes) -> bool:
    key = (pair_slot, nodes)
    if key in ws.seen_routes:
        return False
    ws.seen_routes.add(key)
    u, v, slot = pair_slot
    cut = scenario.cut_of(slot)
    edges = _path_edges(nodes, g)
    overlap = sum(1 for e in edges if e in cut.edges)
    terms: dict[int, float] = {ws.obs_var[pair_slot]: 1.0}
    for e in edges:
        terms[e] = terms.get(e, 0.0) - 1.0
    ws.model.add_constraint(terms, "<=", scenario.big_m * overlap)
    return True


def _add_sufficiency_constraint(ws: _Workspace, g: Graph, scenario: FixedScenario, idx, p_star: Path, nodes) -> bool:
    key = (idx, nodes)
    if key in ws.seen_sufficiency:
        return False
    ws.seen_sufficiency.add(key)
    cut = scenario.cuts[idx]
    edges = _path_edges(nodes, g)
    overlap = sum(1 for e in edges if e in cut.edges)
    terms: dict[int, float] = {}
    for e in p_star.edges:
        terms[e] = terms.get(e, 0.0) + 1.0
    for e in edges:
        terms[e] = terms.get(e, 0.0) - 1.0
    terms = {e: coef for e, coef in terms.items() if coef != 0.0}
    ws.model.add_constraint(terms, "<=", scenario.big_m * overlap - scenario.epsilons[idx])
    return True


def _separate(ws: _Workspace, g: Graph, scenario: FixedScenario, tm: ThreatModel, w_cand: np.ndarray) -> int:
    added = 0
    wvec = WeightVector(np.maximum(w_cand, 0.0))
    pairs_by_dest: dict[int, list[int]] = {}
    for u, v, _ in scenario.pairs:
        pairs_by_dest.setdefault(v, []).append(u)
    for slot in scenario.slots:
        view = apply_cut(g, scenario.cut_of(slot))
        for v, sources in pairs_by_dest.items():
            dist = dist_to(view, wvec, v)
            for u in sources:
                fixed_len = _nodes_len(scenario.fixed_paths[(u, v, slot)], g, wvec.values)
                if dist[u] < fixed_len - SEP_TOL:
                    nodes = _lex_path(view, wvec, u, v, dist)
                    if nodes and _add_route_constraint(ws, g, scenario, (u, v, slot), tuple(nodes)):
                        added += 1
    for idx, (p_star, _) in enumerate(tm.target_dist.entries):
        cut = scenario.cuts[idx]
        w_eff = wvec.values.copy()
        for e in cut.edges:
            w_eff[e] += scenario.big_m
        second = second_shortest_excluding(
            g, WeightVector(w_eff), p_star.source, p_star.dest, p_star
        )
        if second is None:
            continue
        rival, rival_eff_len = second
        target_len = _nodes_len(p_star.nodes, g, wvec.values)
        if rival_eff_len < target_len + scenario.epsilons[idx] - SEP_TOL:
            if _add_sufficiency_constraint(ws, g, scenario, idx, p_star, rival.nodes):
                added += 1
    return added


def anchor_error_cost(g: Graph, w_true: WeightVector, w_anchor: WeightVector, scenario: FixedScenario, tm: ThreatModel) -> float:
    """The frozen-scenario error cost of the anchor itself (the LP's
    feasible incumbent)."""
    total = 0.0
    for slot in scenario.slots:
        zs = scenario.slot_prob(slot)
        for u, v, q in scenario.pairs:
            nodes = scenario.fixed_paths[(u, v, slot)]
            t_len = _nodes_len(nodes, g, w_true.values)
            o_len = _nodes_len(nodes, g, w_anchor.values)
            total += q * zs * costs_mod.c_err(t_len, o_len, tm.f_plus, tm.f_minus)
    return total


def local_optimize(
    g: Graph,
    w_true: WeightVector,
    w_anchor: WeightVector,
    scenario: FixedScenario,
    tm: ThreatModel,
    max_rounds: int = 200,
) -> WeightVector:
    """Constraint generation around the anchor.

    Returns the anchor unchanged whenever the LP cannot strictly improve
    the frozen error cost, the generation cap trips, or the refined point
    fails the live full-cost comparison.
    """
    ws = _build_workspace(g, w_true, scenario, tm)
    anchor_obj = anchor_error_cost(g, w_true, w_anchor, scenario, tm)
    sol = None
    for _ in range(max_rounds):
        sol = lp_solve(ws.model)
        if sol.status is not LpStatus.OPTIMAL:
            raise LocalLpError(f"refinement LP came back {sol.status.value}; anchor not feasible?")
        w_cand = sol.values[: ws.n_edges]
        if len(ws.seen_routes) + len(ws.seen_sufficiency) > MAX_GENERATED:
            return w_anchor
        if _separate(ws, g, scenario, tm, w_cand) == 0:
            break
    else:
        return w_anchor
    if sol.objective_value >= anchor_obj - 1e-9:
        return w_anchor
    w_out = WeightVector(np.maximum(sol.values[: ws.n_edges], 0.0))
    # Live guarantee: never hand back something costlier than the anchor.
    live_out = costs_mod.compute_cost(
        g, w_true, w_out, scenario.costs, tm, method=scenario.attack_method, seed=scenario.seed
    )
    live_anchor = costs_mod.compute_cost(
        g, w_true, w_anchor, scenario.costs, tm, method=scenario.attack_method, seed=scenario.seed
    )
    if live_out.total > live_anchor.total:
        return w_anchor
    return w_out


def verify_refinement(
    g: Graph,
    w_true: WeightVector,
    w_out: WeightVector,
    scenario: FixedScenario,
    tm: ThreatModel,
    tol: float = 1e-9,
) -> list[str]:
    """Direct shortest-path recheck of the three frozen-scenario families
    at ``w_out``; returns human-readable violations (empty = all pass)."""
    problems: list[str] = []
    pairs_by_dest: dict[int, list[int]] = {}
    for u, v, _ in scenario.pairs:
        pairs_by_dest.setdefault(v, []).append(u)
    for slot in scenario.slots:
        view = apply_cut(g, scenario.cut_of(slot))
        for v, sources in pairs_by_dest.items():
            dist = dist_to(view, w_out, v)
            for u in sources:
                fixed_len = _nodes_len(scenario.fixed_paths[(u, v, slot)], g, w_out.values)
                if fixed_len > float(dist[u]) + tol:
                    problems.append(
                        f"route ({u}->{v}, slot {slot}): fixed path longer than optimum by {fixed_len - float(dist[u]):.3g}"
                    )
    for idx, (p_star, _) in enumerate(tm.target_dist.entries):
        cut = scenario.cuts[idx]
        w_eff = w_out.values.copy()
        for e in cut.edges:
            w_eff[e] += scenario.big_m
        second = second_shortest_excluding(g, WeightVector(w_eff), p_star.source, p_star.dest, p_star)
        target_len = _nodes_len(p_star.nodes, g, w_out.values)
        if second is not None and second[1] < target_len + scenario.epsilons[idx] - tol:
            problems.append(
                f"sufficiency (target {idx}): margin {second[1] - target_len:.3g} < {scenario.epsilons[idx]:.3g}"
            )
        for q_path in scenario.anchor_competitors[idx]:
            q_len = _nodes_len(q_path.nodes, g, w_out.values)
            if q_len > target_len + tol:
                problems.append(
                    f"necessity (target {idx}): anchor competitor now longer by {q_len - target_len:.3g}"
                )
    return problems
