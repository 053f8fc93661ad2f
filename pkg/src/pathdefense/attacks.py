"""Minimum-cost path-cut attacks.

The attacker removes edges so that a target path becomes the *unique*
shortest path between its terminals under the published weights. Any path
no longer than the target ("competitor", ties included) must lose an edge.
Three solvers share one covering formulation over the competitor family:

* ``greedy_cost_attack`` repeatedly cuts the cheapest off-target edge of the
  currently shortest competitor.
* ``pathattack_lp`` solves the covering LP relaxation under constraint
  generation and rounds randomly, keeping the cheapest feasible rounding.
* ``optimal_attack`` solves the covering problem exactly with the binary
  solver inside the same constraint-generation loop.

Competitor discovery never enumerates paths: a removed edge is priced at a
big-M surcharge W (strictly above any simple-path length), so a single
shortest-path probe under the surcharged weights finds a surviving
competitor or proves there is none.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import math

import numpy as np

from pathdefense.dists import BudgetDist
from pathdefense.graphs import (
    CostVector,
    EdgeCut,
    Graph,
    Path,
    WeightVector,
    apply_cut,
    connected_components,
    dist_to,
    iter_shortest_paths,
    path_length,
    _lex_path,
)

INF = float("inf")

GREEDY = "greedy"
LP = "lp"
OPTIMAL = "optimal"
METHODS = (GREEDY, LP, OPTIMAL)

ROUNDING_ALPHAS = (1.0, 1.5, 2.0, 3.0)
ROUNDING_TRIALS = 20


class AttackError(Exception):
    """Solver failure (LP trouble or node-limit exhaustion)."""


@dataclass(frozen=True)
class AttackResult:
    """Outcome of one attack computation.

    ``feasible`` means the cut makes the target uniquely shortest. When a
    finite budget cap rules the attack out, ``no_attack`` is set, the cut is
    empty, and ``solution_cost`` keeps the cost of the solution that was
    found (inf when no solution exists at all).
    """

    cut: EdgeCut
    cost: float
    feasible: bool
    no_attack: bool = False
    solution_cost: float = field(default=math.nan)

    def __post_init__(self):
        if math.isnan(self.solution_cost):
            object.__setattr__(self, "solution_cost", self.cost if self.feasible else INF)


def _rsum(edges, w_values) -> float:
    """Path length summed the way the reverse-Dijkstra kernel sums it, so
    equality comparisons against kernel distances are exact."""
    total = 0.0
    for e in reversed(edges):
        total = total + w_values[e]
    return total


def big_m(g: Graph, w_pub: WeightVector) -> float:
    """Surcharge strictly above every simple-path length: 1 + sum of the
    published weights of all present edges."""
    mask = g.emask
    total = 1.0
    for e in range(g.edge_count):
        if mask is not None and mask[e]:
            continue
        total += w_pub[e]
    return total


def _validate_target(g: Graph, p_star: Path) -> None:
    for e in p_star.edges:
        mask = g.emask
        if mask is not None and mask[e]:
            raise ValueError("target path uses a removed edge")


def _find_competing(g, w_values, p_star: Path, extra_emask=None, dist=None):
    """Surviving path != p_star with length <= len(p_star), or None.

    Returns (node tuple, length). ``w_values`` may include big-M surcharges
    for cut edges, in which case survivors are exactly the unsurcharged
    paths. Raises if the target itself is unreachable (severed target).
    """
    s, t = p_star.source, p_star.dest
    ell = _rsum(p_star.edges, w_values)
    if dist is None:
        dist = dist_to(g, w_values, t, extra_emask=extra_emask)
    ds = float(dist[s])
    if not ds < INF:
        raise ValueError("target path severed: its terminals are disconnected")
    if ds < ell:
        nodes = _lex_path(g, w_values, s, t, dist, extra_emask=extra_emask)
        return tuple(nodes), ds
    if ds == ell:
        nodes = _lex_path(g, w_values, s, t, dist, skip=list(p_star.nodes), extra_emask=extra_emask)
        if nodes is None:
            return None
        return tuple(nodes), ds
    return None


def competitors(g: Graph, w_pub: WeightVector, p_star: Path, cut: EdgeCut | None = None, limit: int = 10000) -> list[Path]:
    """All surviving s-t paths, other than the target, no longer than it.

    Enumerates lazily in (length, node sequence) order and stops at the
    first path longer than the target.
    """
    cut = cut or EdgeCut.empty()
    if cut.edges & p_star.edge_set():
        raise ValueError("cut must not intersect the target path")
    gv = apply_cut(g, cut)
    _validate_target(gv, p_star)
    ell = path_length(gv, w_pub, p_star)
    out: list[Path] = []
    for nodes, length in iter_shortest_paths(gv, w_pub, p_star.source, p_star.dest):
        if length > ell:
            break
        if nodes == p_star.nodes:
            continue
        out.append(Path.from_nodes(gv, nodes))
        if len(out) >= limit:
            raise AttackError(f"competitor enumeration exceeded {limit} paths")
    return out


def is_unique_shortest(g: Graph, w_pub: WeightVector, p_star: Path, cut: EdgeCut | None = None) -> bool:
    """True iff every other surviving s-t path is strictly longer than the
    target after the cut."""
    cut = cut or EdgeCut.empty()
    if cut.edges & p_star.edge_set():
        raise ValueError("cut must not intersect the target path")
    gv = apply_cut(g, cut)
    _validate_target(gv, p_star)
    return _find_competing(gv, w_pub.values, p_star) is None


def greedy_cost_attack(g: Graph, w_pub: WeightVector, c: CostVector, p_star: Path) -> AttackResult:
    """Cut the cheapest off-target edge of the shortest competitor until the
    target is uniquely shortest. Ties: lowest cost, then lowest edge index."""
    _validate_target(g, p_star)
    w_values = w_pub.values
    target_edges = p_star.edge_set()
    mask = np.zeros(g.edge_count, dtype=np.uint8) if g.emask is None else g.emask.copy()
    removed: list[int] = []
    while True:
        comp = _find_competing(g, w_values, p_star, extra_emask=mask)
        if comp is None:
            break
        nodes, _ = comp
        options = []
        for a, b in zip(nodes, nodes[1:]):
            e = g.base.edge_index(a, b)
            if e is not None and e not in target_edges:
                options.append((c[e], e))
        if not options:
            return AttackResult(EdgeCut.from_edges(removed, c), _cut_cost(removed, c), feasible=False)
        _, e = min(options)
        mask[e] = 1
        removed.append(e)
    cut = EdgeCut.from_edges(removed, c)
    return AttackResult(cut, cut.total_cost, feasible=True)


def _cut_cost(edges, c: CostVector) -> float:
    return EdgeCut.from_edges(edges, c).total_cost


class _CoveringProblem:
    """Shared covering formulation for the LP and exact attacks."""

    def __init__(self, g: Graph, w_pub: WeightVector, c: CostVector, p_star: Path, pool=None):
        _validate_target(g, p_star)
        self.g = g
        self.w_pub = w_pub
        self.c = c
        self.p_star = p_star
        self.target_edges = p_star.edge_set()
        mask = g.emask
        self.variables = [
            e
            for e in range(g.edge_count)
            if e not in self.target_edges and (mask is None or not mask[e])
        ]
        self.var_of = {e: i for i, e in enumerate(self.variables)}
        self.big_m = big_m(g, w_pub)
        self.pool = pool if pool is not None else []
        self._pool_seen = {tuple(q) for q in self.pool}
        self.constraint_sets: list[frozenset[int]] = []
        self._constraint_seen: set[frozenset[int]] = set()
        self.base_len = _rsum(p_star.edges, w_pub.values)
        for q in list(self.pool):
            self._try_add_nodes(tuple(q))

    def _try_add_nodes(self, nodes: tuple[int, ...]) -> bool:
        """Add the covering constraint for a known competitor if it is valid
        under the current weights (exists in g and is no longer than p*)."""
        length = 0.0
        edges = []
        for a, b in zip(nodes, nodes[1:]):
            e = self.g.edge_index(a, b)
            if e is None:
                return False
            edges.append(e)
            length += self.w_pub[e]
        if length > self.base_len:
            return False
        off = frozenset(e for e in edges if e not in self.target_edges)
        if not off or off in self._constraint_seen:
            return False
        self._constraint_seen.add(off)
        self.constraint_sets.append(off)
        return True

    def remember(self, nodes: tuple[int, ...]) -> bool:
        if nodes not in self._pool_seen:
            self._pool_seen.add(nodes)
            self.pool.append(nodes)
        return self._try_add_nodes(nodes)

    def build_model(self):
        from pathdefense.lp import LpModel

        model = LpModel()
        for e in self.variables:
            model.add_var(obj=self.c[e], lower=0.0, upper=1.0, name=f"cut_{e}")
        for off in self.constraint_sets:
            model.add_constraint({self.var_of[e]: 1.0 for e in off}, ">=", 1.0)
        return model

    def violated_competitor(self, cut_edges) -> tuple[tuple[int, ...], float] | None:
        """A surviving competitor under the proposed cut, via one big-M
        shortest-path probe."""
        w_eff = self.w_pub.copy_values()
        for e in cut_edges:
            w_eff[e] += self.big_m
        return _find_competing(self.g, w_eff, self.p_star)


def pathattack_lp(
    g: Graph,
    w_pub: WeightVector,
    c: CostVector,
    p_star: Path,
    seed: int = 0,
    pool=None,
    max_rounds: int = 200,
) -> AttackResult:
    """Covering-LP attack with randomized rounding.

    Constraint generation adds a violated competitor per failed rounding;
    rounding includes edge e with probability min(1, alpha * x_e) over an
    escalating alpha schedule, and the cheapest feasible rounding is kept.
    Deterministic for a fixed seed.
    """
    from pathdefense.lp import LpStatus, lp_solve

    prob = _CoveringProblem(g, w_pub, c, p_star, pool)
    rng = np.random.default_rng(seed)
    cvals = np.array([c[e] for e in prob.variables])
    best_edges: list[int] | None = None
    best_cost = INF
    for _ in range(max_rounds):
        model = prob.build_model()
        sol = lp_solve(model)
        if sol.status is not LpStatus.OPTIMAL:
            raise AttackError(f"covering LP unexpectedly {sol.status.value}")
        frac = sol.values
        added = False
        for alpha in ROUNDING_ALPHAS:
            probs = np.minimum(1.0, alpha * frac)
            for _ in range(ROUNDING_TRIALS):
                draw = rng.random(len(prob.variables))
                sel = draw < probs
                cost = float(cvals[sel].sum())
                if cost >= best_cost:
                    continue
                chosen = [prob.variables[i] for i in np.flatnonzero(sel)]
                comp = prob.violated_competitor(chosen)
                if comp is None:
                    best_edges = chosen
                    best_cost = cost
                else:
                    added = prob.remember(comp[0]) or added
        if not added:
            break
    if best_edges is None:
        # Rounding never produced a feasible cut; fall back to the greedy
        # solver, which always does.
        result = greedy_cost_attack(g, w_pub, c, p_star)
        return result
    cut = EdgeCut.from_edges(best_edges, c)
    return AttackResult(cut, cut.total_cost, feasible=True)


def optimal_attack(
    g: Graph,
    w_pub: WeightVector,
    c: CostVector,
    p_star: Path,
    pool=None,
    node_limit: int | None = None,
    max_rounds: int = 10000,
) -> AttackResult:
    """Exact minimum-cost attack: binary covering program under constraint
    generation. Each integral solution is re-verified; a surviving
    competitor becomes a new constraint until none survive, at which point
    the solution is optimal for the full (implicit) competitor family."""
    from pathdefense.lp import DEFAULT_NODE_LIMIT, LpStatus, mip_solve

    prob = _CoveringProblem(g, w_pub, c, p_star, pool)
    limit = node_limit if node_limit is not None else DEFAULT_NODE_LIMIT
    for _ in range(max_rounds):
        model = prob.build_model()
        sol = mip_solve(model, range(len(prob.variables)), node_limit=limit)
        if sol.status is LpStatus.LIMIT:
            raise AttackError("branch-and-bound node limit exhausted")
        if sol.status is not LpStatus.OPTIMAL:
            raise AttackError(f"covering program unexpectedly {sol.status.value}")
        chosen = [prob.variables[i] for i in range(len(prob.variables)) if sol.values[i] > 0.5]
        comp = prob.violated_competitor(chosen)
        if comp is None:
            cut = EdgeCut.from_edges(chosen, c)
            return AttackResult(cut, cut.total_cost, feasible=True)
        if not prob.remember(comp[0]):  # pragma: no cover - covered competitors cannot survive
            raise AttackError("separation returned a known competitor")
    raise AttackError("constraint generation failed to converge")  # pragma: no cover


def repair_connectivity(g: Graph, cut: EdgeCut, c: CostVector) -> EdgeCut:
    """Restore cut edges (highest removal cost first, then lowest index)
    that join two components until the post-cut graph is connected."""
    edges = set(cut.edges)
    while True:
        view = apply_cut(g, EdgeCut.from_edges(edges, c))
        comps = connected_components(view)
        if len(comps) <= 1:
            break
        comp_of = {}
        for i, comp in enumerate(comps):
            for v in comp:
                comp_of[v] = i
        bridging = [
            e for e in edges if comp_of[g.edges[e][0]] != comp_of[g.edges[e][1]]
        ]
        if not bridging:
            break
        bridging.sort(key=lambda e: (-c[e], e))
        edges.remove(bridging[0])
    return EdgeCut.from_edges(edges, c)


def attack(
    g: Graph,
    w_pub: WeightVector,
    c: CostVector,
    p_star: Path,
    method: str = OPTIMAL,
    budget_dist: BudgetDist | None = None,
    seed: int = 0,
    pool=None,
) -> AttackResult:
    """Dispatch to the chosen solver.

    When a budget distribution with finite support is supplied and the
    computed attack exceeds the largest possible budget, the attack is not
    worth mounting: the result is an explicit no-attack (empty cut).
    """
    if method == GREEDY:
        res = greedy_cost_attack(g, w_pub, c, p_star)
    elif method == LP:
        res = pathattack_lp(g, w_pub, c, p_star, seed=seed, pool=pool)
    elif method == OPTIMAL:
        res = optimal_attack(g, w_pub, c, p_star, pool=pool)
    else:
        raise ValueError(f"unknown attack method {method!r}")
    if budget_dist is not None:
        cap = budget_dist.max_support
        if not math.isinf(cap) and res.solution_cost > cap:
            return AttackResult(
                EdgeCut.empty(), 0.0, feasible=False, no_attack=True, solution_cost=res.solution_cost
            )
    return res
