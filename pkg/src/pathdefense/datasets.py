"""Graph sources: synthetic generators, edge-list files, and target picks.

Generators are deterministic in the seed and regenerate (with derived
sub-seeds) until the graph is connected. Weights are i.i.d. Poisson draws
(zeros kept); removal costs default to 1 everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from pathdefense.dists import TargetPathDist
from pathdefense.graphs import (
    CostVector,
    Graph,
    GraphView,
    Path,
    UnreachableError,
    WeightedGraph,
    WeightVector,
    connected_components,
    is_connected,
    iter_shortest_paths,
    k_shortest_paths,
    shortest_path,
    strongly_connected_components,
)

ER = "ER"
BA = "BA"
WS = "WS"
SBM = "SBM"
FAMILIES = (ER, BA, WS, SBM)

MAX_CONNECT_RETRIES = 100


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    n: int
    params: dict = field(default_factory=dict)
    weight_rate: float = 20.0
    cost_value: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n < 2:
            raise ValueError("need at least two nodes")
        if self.weight_rate < 0 or self.cost_value <= 0:
            raise ValueError("weight rate must be >= 0 and cost > 0")


def er_spec(n: int = 250, p: float = 0.048, seed: int = 0, weight_rate: float = 20.0) -> GeneratorSpec:
    return GeneratorSpec(ER, n, {"p": p}, weight_rate=weight_rate, seed=seed)


def ba_spec(n: int = 250, m: int = 6, seed: int = 0, weight_rate: float = 20.0) -> GeneratorSpec:
    return GeneratorSpec(BA, n, {"m": m}, weight_rate=weight_rate, seed=seed)


def ws_spec(n: int = 250, k: int = 12, rewire: float = 0.05, seed: int = 0, weight_rate: float = 20.0) -> GeneratorSpec:
    return GeneratorSpec(WS, n, {"k": k, "rewire": rewire}, weight_rate=weight_rate, seed=seed)


def sbm_spec(
    sizes: tuple[int, ...] = (200, 50),
    p_in: tuple[float, ...] = (0.06, 0.2),
    p_out: float = 0.005,
    seed: int = 0,
    weight_rate: float = 20.0,
) -> GeneratorSpec:
    return GeneratorSpec(
        SBM, sum(sizes), {"sizes": tuple(sizes), "p_in": tuple(p_in), "p_out": p_out},
        weight_rate=weight_rate, seed=seed,
    )


def _er_edges(rng, n: int, p: float):
    edges = []
    for i in range(n):
        draws = rng.random(n - i - 1)
        for off in np.flatnonzero(draws < p):
            edges.append((i, i + 1 + int(off)))
    return edges


def _ba_edges(rng, n: int, m: int):
    # Preferential attachment from m initially isolated nodes: every new
    # node brings exactly m edges, giving m * (n - m) edges total.
    if m < 1 or m >= n:
        raise ValueError("attachment count must be in [1, n)")
    targets = list(range(m))
    repeated: list[int] = []
    edges = []
    for source in range(m, n):
        for t in targets:
            edges.append((t, source) if t < source else (source, t))
        repeated.extend(targets)
        repeated.extend([source] * m)
        chosen: set[int] = set()
        while len(chosen) < m:
            chosen.add(repeated[int(rng.integers(len(repeated)))])
        targets = sorted(chosen)
    return edges


def _ws_edges(rng, n: int, k: int, rewire: float):
    if k % 2 or k >= n:
        raise ValueError("ring degree must be even and below n")
    half = k // 2
    present: set[tuple[int, int]] = set()
    for j in range(1, half + 1):
        for i in range(n):
            v = (i + j) % n
            present.add((min(i, v), max(i, v)))
    # Rewire pass: same sweep order as construction.
    for j in range(1, half + 1):
        for i in range(n):
            v = (i + j) % n
            key = (min(i, v), max(i, v))
            if key not in present:
                continue
            if rng.random() >= rewire:
                continue
            candidates = [
                u for u in range(n)
                if u != i and (min(i, u), max(i, u)) not in present
            ]
            if not candidates:
                continue
            new = candidates[int(rng.integers(len(candidates)))]
            present.remove(key)
            present.add((min(i, new), max(i, new)))
    return sorted(present)


def _sbm_edges(rng, sizes, p_in, p_out):
    bounds = np.cumsum((0,) + tuple(sizes))
    block_of = np.empty(bounds[-1], dtype=np.int64)
    for b in range(len(sizes)):
        block_of[bounds[b] : bounds[b + 1]] = b
    n = int(bounds[-1])
    edges = []
    for i in range(n):
        draws = rng.random(n - i - 1)
        same = block_of[i + 1 :] == block_of[i]
        thresholds = np.where(same, p_in[block_of[i]], p_out)
        for off in np.flatnonzero(draws < thresholds):
            edges.append((i, i + 1 + int(off)))
    return edges


def sbm_communities(spec: GeneratorSpec) -> list[set[int]]:
    sizes = spec.params["sizes"]
    bounds = np.cumsum((0,) + tuple(sizes))
    return [set(range(int(bounds[b]), int(bounds[b + 1]))) for b in range(len(sizes))]


def generate(spec: GeneratorSpec) -> tuple[WeightedGraph, WeightVector, CostVector]:
    """Sample a connected graph from the named family with Poisson weights
    and constant removal costs."""
    for attempt in range(MAX_CONNECT_RETRIES):
        rng = np.random.default_rng((spec.seed, attempt))
        if spec.family == ER:
            edges = _er_edges(rng, spec.n, spec.params["p"])
        elif spec.family == BA:
            edges = _ba_edges(rng, spec.n, spec.params["m"])
        elif spec.family == WS:
            edges = _ws_edges(rng, spec.n, spec.params["k"], spec.params["rewire"])
        else:
            edges = _sbm_edges(rng, spec.params["sizes"], spec.params["p_in"], spec.params["p_out"])
        g = WeightedGraph(spec.n, edges, directed=False)
        if is_connected(g):
            weights = rng.poisson(spec.weight_rate, g.edge_count).astype(np.float64)
            costs = np.full(g.edge_count, spec.cost_value, dtype=np.float64)
            return g, WeightVector(weights), CostVector(costs)
    raise RuntimeError(f"no connected sample within {MAX_CONNECT_RETRIES} retries: {spec}")


# Edge-list files -------------------------------------------------------------


@dataclass(frozen=True)
class EdgeListFile:
    path: str
    directed: bool = False
    weight_semantics: str = "distance"  # or "similarity"


@dataclass(frozen=True)
class LoadedGraph:
    graph: WeightedGraph
    weights: WeightVector
    costs: CostVector
    node_names: tuple[str, ...]


def load_edge_list(f: EdgeListFile) -> LoadedGraph:
    """Parse "u v weight [cost]" lines; '#' comments; an optional
    ``directed`` pragma on line 1. String node ids map to dense integers in
    file order (the mapping is carried on the result). Similarity weights
    are inverted into distances."""
    directed = f.directed
    raw_rows: list[tuple[int, str, str, float, float | None]] = []
    with open(f.path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    start = 0
    if lines and lines[0].strip().lower() == "directed":
        directed = True
        start = 1
    for lineno, raw in enumerate(lines[start:], start=start + 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (3, 4):
            raise ValueError(f"line {lineno}: expected 'u v weight [cost]', got {raw!r}")
        try:
            weight = float(parts[2])
            cost = float(parts[3]) if len(parts) == 4 else None
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad number in {raw!r}") from exc
        raw_rows.append((lineno, parts[0], parts[1], weight, cost))
    integer_ids = all(u.isdigit() and v.isdigit() for _, u, v, _, _ in raw_rows)
    names: dict[str, int] = {}
    rows: list[tuple[int, int, float, float | None]] = []
    for lineno, u_name, v_name, weight, cost in raw_rows:
        if integer_ids:
            u, v = int(u_name), int(v_name)
            names.setdefault(str(u), u)
            names.setdefault(str(v), v)
        else:
            for name in (u_name, v_name):
                if name not in names:
                    names[name] = len(names)
            u, v = names[u_name], names[v_name]
        if u == v:
            raise ValueError(f"line {lineno}: self-loop on {u_name!r}")
        rows.append((u, v, weight, cost))
    n = (max((max(u, v) for u, v, _, _ in rows), default=-1) + 1) if integer_ids else len(names)
    try:
        g = WeightedGraph(n, [(u, v) for u, v, _, _ in rows], directed=directed)
    except ValueError as exc:
        raise ValueError(str(exc)) from exc
    weights = np.array([w for _, _, w, _ in rows], dtype=np.float64)
    if f.weight_semantics == "similarity":
        if np.any(weights <= 0):
            bad = int(np.argmax(weights <= 0))
            raise ValueError(f"similarity weight must be positive (edge {bad})")
        weights = invert_weights(WeightVector(weights)).values.copy()
    costs = np.array([c if c is not None else 1.0 for _, _, _, c in rows], dtype=np.float64)
    if integer_ids:
        name_list = tuple(str(i) for i in range(n))
    else:
        name_list = tuple(sorted(names, key=names.get))
    return LoadedGraph(g, WeightVector(weights), CostVector(costs), name_list)


def invert_weights(w: WeightVector) -> WeightVector:
    """Turn similarities into distances: max-scaled reciprocal, so order
    flips and every output is >= 1."""
    values = w.values
    if np.any(values <= 0):
        raise ValueError("similarity weights must be strictly positive")
    return WeightVector(values.max() / values)


def largest_component_undirected(g: Graph, w: WeightVector) -> tuple[WeightedGraph, WeightVector]:
    """Restrict to the largest component (weak for directed input) and
    relabel nodes densely."""
    comps = connected_components(g)
    keep = max(comps, key=lambda comp: (len(comp), -min(comp)))
    return _restrict(g, w, keep, directed=g.directed)


def scc_then_undirect(g: Graph, w: WeightVector) -> tuple[WeightedGraph, WeightVector]:
    """Largest strongly connected component, then undirected by averaging
    the two directed weights (a single direction is kept as-is)."""
    if not g.directed:
        return largest_component_undirected(g, w)
    comps = strongly_connected_components(g)
    keep = max(comps, key=lambda comp: (len(comp), -min(comp)))
    relabel = {v: i for i, v in enumerate(sorted(keep))}
    acc: dict[tuple[int, int], list[float]] = {}
    mask = g.emask
    for e, (u, v) in enumerate(g.edges):
        if mask is not None and mask[e]:
            continue
        if u in keep and v in keep:
            a, b = relabel[u], relabel[v]
            acc.setdefault((min(a, b), max(a, b)), []).append(w[e])
    edges = sorted(acc)
    new_g = WeightedGraph(len(keep), edges, directed=False)
    values = np.array([math.fsum(acc[key]) / len(acc[key]) for key in edges])
    return new_g, WeightVector(values)


def _restrict(g: Graph, w: WeightVector, keep: set[int], directed: bool) -> tuple[WeightedGraph, WeightVector]:
    relabel = {v: i for i, v in enumerate(sorted(keep))}
    edges = []
    values = []
    mask = g.emask
    for e, (u, v) in enumerate(g.edges):
        if mask is not None and mask[e]:
            continue
        if u in keep and v in keep:
            edges.append((relabel[u], relabel[v]))
            values.append(w[e])
    return WeightedGraph(len(keep), edges, directed=directed), WeightVector(np.array(values))


# Target selection -------------------------------------------------------------


class InsufficientPathsError(Exception):
    """Not enough simple paths between the requested terminals."""


def select_target_paths(g: Graph, w: WeightVector, s: int, t: int, count: int) -> TargetPathDist:
    """Uniform distribution over the 5th shortest path and every second one
    after it (ranks 5, 7, 9, ...)."""
    if count < 1:
        raise ValueError("count must be positive")
    need = 3 + 2 * count
    ranked = k_shortest_paths(g, w, s, t, need)
    if len(ranked) < need:
        raise InsufficientPathsError(
            f"need {need} simple paths between {s} and {t}, found {len(ranked)}"
        )
    chosen = [ranked[4 + 2 * i][0] for i in range(count)]
    return TargetPathDist.from_paths(chosen)


def select_extra_community_path(g: Graph, w: WeightVector, communities: list[set[int]], seed: int) -> Path:
    """A target whose terminals share a community but whose route leaves it.

    Masks intra-community edges between non-terminal nodes of the home
    community, then walks the masked graph's shortest paths in order until
    one visits an outside node.
    """
    if len(communities) < 2:
        raise ValueError("need at least two communities")
    rng = np.random.default_rng(seed)
    order = list(range(len(communities)))
    for _ in range(200):
        home_idx = order[int(rng.integers(len(order)))]
        home = communities[home_idx]
        members = sorted(home)
        if len(members) < 2:
            continue
        s, t = (int(members[i]) for i in rng.choice(len(members), size=2, replace=False))
        if s == t:
            continue
        removed = [
            e
            for e, (u, v) in enumerate(g.edges)
            if u in home and v in home and u not in (s, t) and v not in (s, t)
        ]
        masked = GraphView(g.base if isinstance(g, GraphView) else g, frozenset(removed) | g.removed)
        try:
            found = None
            for i, (nodes, _) in enumerate(iter_shortest_paths(masked, w, s, t)):
                if any(v not in home for v in nodes):
                    found = nodes
                    break
                if i >= 50:
                    break
            if found is not None:
                return Path.from_nodes(g, found)
        except UnreachableError:
            continue
    raise UnreachableError("no intra-community terminal pair admits an outside route")
