"""Weighted graphs with stable edge indices and deterministic path queries.

Graphs separate structure from weights: a :class:`WeightedGraph` holds nodes
and an ordered edge list (edge index = position), while weights and removal
costs live in :class:`WeightVector` / :class:`CostVector` arrays indexed by
edge. Edge removals are expressed as views so the base graph is never
mutated and surviving edges keep their indices.

Every query that compares paths breaks ties by the lexicographically
smallest node sequence, so all higher-level algorithms are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from pathdefense import kernels

INF = float("inf")


class UnreachableError(Exception):
    """No path exists between the requested endpoints."""


class InvalidPathError(Exception):
    """A node sequence does not describe a simple path in the graph."""


class WeightedGraph:
    """Directed or undirected graph with dense, stable edge indices."""

    __slots__ = ("node_count", "directed", "edges", "_index", "_fwd", "_rev")

    def __init__(self, node_count: int, edges: Iterable[tuple[int, int]], directed: bool = False):
        if node_count < 0:
            raise ValueError("node_count must be nonnegative")
        self.node_count = int(node_count)
        self.directed = bool(directed)
        edge_list = []
        index: dict[tuple[int, int], int] = {}
        for u, v in edges:
            u = int(u)
            v = int(v)
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise ValueError(f"edge ({u}, {v}) outside node range")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            key = (u, v) if (directed or u < v) else (v, u)
            if key in index:
                raise ValueError(f"duplicate edge ({u}, {v})")
            index[key] = len(edge_list)
            edge_list.append((u, v))
        self.edges = tuple(edge_list)
        self._index = index
        self._fwd = None
        self._rev = None

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def edge_index(self, u: int, v: int) -> int | None:
        """Index of the edge traversable from u to v, or None."""
        if self.directed:
            return self._index.get((u, v))
        return self._index.get((u, v) if u < v else (v, u))

    def _csr(self, reverse: bool = False):
        """(indptr, nbrs, eids) adjacency, neighbors sorted per node."""
        if not reverse or not self.directed:
            if self._fwd is None:
                self._fwd = self._build_csr(reverse=False)
            return self._fwd
        if self._rev is None:
            self._rev = self._build_csr(reverse=True)
        return self._rev

    def _build_csr(self, reverse: bool):
        n = self.node_count
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for e, (u, v) in enumerate(self.edges):
            if self.directed:
                if reverse:
                    adj[v].append((u, e))
                else:
                    adj[u].append((v, e))
            else:
                adj[u].append((v, e))
                adj[v].append((u, e))
        indptr = np.zeros(n + 1, dtype=np.int64)
        total = 0
        for u in range(n):
            adj[u].sort()
            total += len(adj[u])
            indptr[u + 1] = total
        nbrs = np.empty(total, dtype=np.int32)
        eids = np.empty(total, dtype=np.int32)
        pos = 0
        for u in range(n):
            for v, e in adj[u]:
                nbrs[pos] = v
                eids[pos] = e
                pos += 1
        return indptr, nbrs, eids

    # Views -----------------------------------------------------------------

    @property
    def removed(self) -> frozenset[int]:
        return frozenset()

    @property
    def base(self) -> "WeightedGraph":
        return self

    @property
    def emask(self):
        return None

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"WeightedGraph(n={self.node_count}, m={self.edge_count}, {kind})"


class GraphView:
    """A graph with some edges removed; shares structure with its base."""

    __slots__ = ("base", "removed", "emask")

    def __init__(self, base: WeightedGraph, removed: frozenset[int]):
        self.base = base
        self.removed = removed
        mask = np.zeros(base.edge_count, dtype=np.uint8)
        for e in removed:
            if not (0 <= e < base.edge_count):
                raise ValueError(f"edge index {e} out of range")
            mask[e] = 1
        self.emask = mask

    @property
    def node_count(self) -> int:
        return self.base.node_count

    @property
    def directed(self) -> bool:
        return self.base.directed

    @property
    def edges(self):
        return self.base.edges

    @property
    def edge_count(self) -> int:
        return self.base.edge_count

    def edge_index(self, u: int, v: int) -> int | None:
        e = self.base.edge_index(u, v)
        if e is None or e in self.removed:
            return None
        return e

    def _csr(self, reverse: bool = False):
        return self.base._csr(reverse)

    def __repr__(self) -> str:
        return f"GraphView(base={self.base!r}, removed={sorted(self.removed)})"


Graph = WeightedGraph | GraphView


def _wrap_values(values, positive: bool, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).copy()
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if positive:
        if np.any(arr <= 0):
            raise ValueError(f"{name} must be strictly positive")
    elif np.any(arr < 0):
        raise ValueError(f"{name} must be nonnegative")
    arr.flags.writeable = False
    return arr


class WeightVector:
    """Nonnegative per-edge weights (true or published)."""

    __slots__ = ("values",)

    def __init__(self, values):
        self.values = _wrap_values(values, positive=False, name="weights")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, e: int) -> float:
        return float(self.values[e])

    def with_increment(self, edge: int, delta: float) -> "WeightVector":
        out = self.values.copy()
        out[edge] += delta
        return WeightVector(out)

    def copy_values(self) -> np.ndarray:
        return self.values.copy()

    def __eq__(self, other) -> bool:
        return isinstance(other, WeightVector) and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"WeightVector({self.values.tolist()!r})"


class CostVector:
    """Strictly positive per-edge removal costs."""

    __slots__ = ("values",)

    def __init__(self, values):
        self.values = _wrap_values(values, positive=True, name="costs")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, e: int) -> float:
        return float(self.values[e])

    def __repr__(self) -> str:
        return f"CostVector({self.values.tolist()!r})"


def check_weights(g: Graph, w: WeightVector) -> None:
    if len(w) != g.edge_count:
        raise ValueError(f"weight vector length {len(w)} != edge count {g.edge_count}")


@dataclass(frozen=True)
class Path:
    """A simple path: node sequence plus the derived edge-index sequence."""

    nodes: tuple[int, ...]
    edges: tuple[int, ...]

    @classmethod
    def from_nodes(cls, g: Graph, nodes: Sequence[int]) -> "Path":
        nodes = tuple(int(v) for v in nodes)
        if not nodes:
            raise InvalidPathError("empty node sequence")
        if len(set(nodes)) != len(nodes):
            raise InvalidPathError(f"repeated node in {nodes}")
        edges = []
        for a, b in zip(nodes, nodes[1:]):
            e = g.edge_index(a, b)
            if e is None:
                raise InvalidPathError(f"({a}, {b}) is not a traversable edge")
            edges.append(e)
        return cls(nodes, tuple(edges))

    @property
    def source(self) -> int:
        return self.nodes[0]

    @property
    def dest(self) -> int:
        return self.nodes[-1]

    def edge_set(self) -> frozenset[int]:
        return frozenset(self.edges)

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class EdgeCut:
    """A set of removed edge indices with its total removal cost."""

    edges: frozenset[int]
    total_cost: float

    @classmethod
    def from_edges(cls, edges: Iterable[int], c: CostVector) -> "EdgeCut":
        es = frozenset(int(e) for e in edges)
        total = 0.0
        for e in sorted(es):
            total += c[e]
        return cls(es, total)

    @classmethod
    def empty(cls) -> "EdgeCut":
        return cls(frozenset(), 0.0)

    def __len__(self) -> int:
        return len(self.edges)


# Distance primitives --------------------------------------------------------


def dist_to(g: Graph, w: WeightVector | np.ndarray, t: int, extra_emask=None, nmask=None) -> np.ndarray:
    """Distances from every node to ``t`` (reverse Dijkstra)."""
    values = w.values if isinstance(w, WeightVector) else w
    indptr, nbrs, eids = g._csr(reverse=True)
    emask = _combined_emask(g, extra_emask)
    return kernels.dijkstra(indptr, nbrs, eids, values, emask, nmask, t)


def dist_from(g: Graph, w: WeightVector | np.ndarray, s: int, extra_emask=None, nmask=None) -> np.ndarray:
    """Distances from ``s`` to every node."""
    values = w.values if isinstance(w, WeightVector) else w
    indptr, nbrs, eids = g._csr(reverse=False)
    emask = _combined_emask(g, extra_emask)
    return kernels.dijkstra(indptr, nbrs, eids, values, emask, nmask, s)


def _combined_emask(g: Graph, extra):
    base = g.emask
    if extra is None:
        return base
    if base is None:
        return extra
    return np.maximum(base, extra)


def _lex_path(
    g: Graph,
    w: WeightVector | np.ndarray,
    s: int,
    t: int,
    dist_to_t: np.ndarray,
    skip: Sequence[int] | None = None,
    extra_emask=None,
    nmask=None,
) -> list[int] | None:
    values = w.values if isinstance(w, WeightVector) else w
    indptr, nbrs, eids = g._csr(reverse=False)
    emask = _combined_emask(g, extra_emask)
    skip_arr = np.asarray(skip, dtype=np.int32) if skip is not None else None
    return kernels.dag_search(indptr, nbrs, eids, values, emask, nmask, dist_to_t, s, t, skip_arr)


# Public operations -----------------------------------------------------------


def shortest_path(g: Graph, w: WeightVector, s: int, t: int) -> tuple[Path, float]:
    """Shortest s-t path; ties go to the lexicographically smallest node
    sequence. Raises :class:`UnreachableError` when no path exists."""
    if s == t:
        raise ValueError("source and destination must differ")
    check_weights(g, w)
    dist = dist_to(g, w, t)
    if not dist[s] < INF:
        raise UnreachableError(f"no path from {s} to {t}")
    nodes = _lex_path(g, w, s, t, dist)
    if nodes is None:  # pragma: no cover - tight-path walk always succeeds
        raise UnreachableError(f"no path from {s} to {t}")
    return Path.from_nodes(g, nodes), float(dist[s])


def path_length(g: Graph, w: WeightVector, p: Path) -> float:
    """Exact sequential sum of member edge weights; validates the path."""
    check_weights(g, w)
    total = 0.0
    for a, b in zip(p.nodes, p.nodes[1:]):
        e = g.edge_index(a, b)
        if e is None:
            raise InvalidPathError(f"({a}, {b}) is not a traversable edge")
        total += w[e]
    return total


def path_nodes_length(nodes: Sequence[int], g: Graph, w: WeightVector | np.ndarray) -> float:
    values = w.values if isinstance(w, WeightVector) else w
    total = 0.0
    for a, b in zip(nodes, nodes[1:]):
        e = g.edge_index(a, b)
        if e is None:
            raise InvalidPathError(f"({a}, {b}) is not a traversable edge")
        total += values[e]
    return total


def apply_cut(g: Graph, cut: EdgeCut) -> Graph:
    """View of ``g`` without the cut edges; ``g`` itself is untouched."""
    if not cut.edges:
        return g
    if isinstance(g, GraphView):
        return GraphView(g.base, g.removed | cut.edges)
    return GraphView(g, frozenset(cut.edges))


def iter_shortest_paths(g: Graph, w: WeightVector, s: int, t: int):
    """Yield simple s-t paths as (node tuple, length) in nondecreasing
    length, ties ordered by node sequence (Yen's algorithm)."""
    if s == t:
        raise ValueError("source and destination must differ")
    check_weights(g, w)
    import heapq

    try:
        first, first_len = shortest_path(g, w, s, t)
    except UnreachableError:
        return
    results: list[tuple[int, ...]] = []
    candidates: list[tuple[float, tuple[int, ...]]] = [(first_len, first.nodes)]
    seen = {first.nodes}
    n = g.node_count
    m = g.edge_count
    base_emask = g.emask
    while candidates:
        length, nodes = heapq.heappop(candidates)
        results.append(nodes)
        yield nodes, length
        # Spur from every node of the newly accepted path.
        for i in range(len(nodes) - 1):
            spur = nodes[i]
            root = nodes[: i + 1]
            emask = np.zeros(m, dtype=np.uint8) if base_emask is None else base_emask.copy()
            for accepted in results:
                if accepted[: i + 1] == root and len(accepted) > i + 1:
                    e = g.base.edge_index(accepted[i], accepted[i + 1])
                    if e is not None:
                        emask[e] = 1
            nmask = np.zeros(n, dtype=np.uint8)
            for v in root[:-1]:
                nmask[v] = 1
            dist = dist_to(g, w, t, extra_emask=emask, nmask=nmask)
            if not dist[spur] < INF:
                continue
            spur_nodes = _lex_path(g, w, spur, t, dist, extra_emask=emask, nmask=nmask)
            if spur_nodes is None:
                continue
            cand = root[:-1] + tuple(spur_nodes)
            if cand in seen:
                continue
            seen.add(cand)
            root_len = path_nodes_length(root, g, w)
            heapq.heappush(candidates, (root_len + float(dist[spur]), cand))


def k_shortest_paths(g: Graph, w: WeightVector, s: int, t: int, k: int) -> list[tuple[Path, float]]:
    """K shortest loopless paths in (length, lexicographic nodes) order.

    Returns fewer than k entries when fewer simple paths exist, and an
    empty list when t is unreachable.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    out = []
    for nodes, length in iter_shortest_paths(g, w, s, t):
        out.append((Path.from_nodes(g, nodes), length))
        if len(out) >= k:
            break
    return out


def second_shortest_excluding(
    g: Graph, w: WeightVector, s: int, t: int, reference: Path
) -> tuple[Path, float] | None:
    """Shortest simple s-t path distinct from ``reference``; None if the
    reference is the only s-t path."""
    if reference.nodes[0] != s or reference.nodes[-1] != t:
        raise InvalidPathError("reference does not connect the requested endpoints")
    path_length(g, w, reference)  # validates reference inside g
    sp, sp_len = shortest_path(g, w, s, t)
    if sp.nodes != reference.nodes:
        return sp, sp_len
    best: tuple[float, tuple[int, ...]] | None = None
    nodes = reference.nodes
    n = g.node_count
    m = g.edge_count
    base_emask = g.emask
    for i in range(len(nodes) - 1):
        spur = nodes[i]
        root = nodes[: i + 1]
        emask = np.zeros(m, dtype=np.uint8) if base_emask is None else base_emask.copy()
        e = g.base.edge_index(nodes[i], nodes[i + 1])
        if e is not None:
            emask[e] = 1
        nmask = np.zeros(n, dtype=np.uint8)
        for v in root[:-1]:
            nmask[v] = 1
        dist = dist_to(g, w, t, extra_emask=emask, nmask=nmask)
        if not dist[spur] < INF:
            continue
        spur_nodes = _lex_path(g, w, spur, t, dist, extra_emask=emask, nmask=nmask)
        if spur_nodes is None:
            continue
        cand = root[:-1] + tuple(spur_nodes)
        cand_len = path_nodes_length(root, g, w) + float(dist[spur])
        if best is None or (cand_len, cand) < best:
            best = (cand_len, cand)
    if best is None:
        return None
    return Path.from_nodes(g, best[1]), best[0]


def tied_shortest_excluding(
    g: Graph, w: WeightVector | np.ndarray, s: int, t: int, skip: Sequence[int], dist_to_t: np.ndarray
) -> list[int] | None:
    """Shortest path equal in length to dist(s, t) whose node sequence
    differs from ``skip``; None when the skip path is the unique optimum."""
    return _lex_path(g, w, s, t, dist_to_t, skip=skip)


# Connectivity ----------------------------------------------------------------


def _undirected_neighbors(g: Graph):
    """Adjacency treating edges as undirected and honoring removals."""
    indptr_f, nbrs_f, eids_f = g._csr(reverse=False)
    mask = g.emask
    n = g.node_count
    adj: list[list[int]] = [[] for _ in range(n)]
    for u in range(n):
        for k in range(indptr_f[u], indptr_f[u + 1]):
            e = eids_f[k]
            if mask is not None and mask[e]:
                continue
            v = int(nbrs_f[k])
            adj[u].append(v)
            if g.directed:
                adj[v].append(u)
    return adj


def connected_components(g: Graph) -> list[set[int]]:
    """Undirected components (weak components for directed graphs)."""
    adj = _undirected_neighbors(g)
    seen = [False] * g.node_count
    comps: list[set[int]] = []
    for start in range(g.node_count):
        if seen[start]:
            continue
        comp = {start}
        seen[start] = True
        stack = [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    comp.add(v)
                    stack.append(v)
        comps.append(comp)
    return comps


def is_connected(g: Graph, pairs: Iterable[tuple[int, int]] | None = None) -> bool:
    """Connectivity check.

    Undirected graphs use standard components. For directed graphs a set of
    travel pairs may be given, in which case every (u, v) must have v
    reachable from u; without pairs, strong connectivity is required.
    """
    if g.node_count == 0:
        return True
    if not g.directed:
        return len(connected_components(g)) == 1
    if pairs is None:
        return len(strongly_connected_components(g)) == 1
    ones = np.ones(g.edge_count, dtype=np.float64)
    dist_cache: dict[int, np.ndarray] = {}
    for u, v in pairs:
        if u not in dist_cache:
            dist_cache[u] = dist_from(g, ones, u)
        if not dist_cache[u][v] < INF:
            return False
    return True


def strongly_connected_components(g: Graph) -> list[set[int]]:
    """Tarjan's SCCs (iterative); honors edge removals."""
    indptr, nbrs, eids = g._csr(reverse=False)
    mask = g.emask
    n = g.node_count
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[set[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, indptr[root])]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            u, k = work[-1]
            if k < indptr[u + 1]:
                work[-1] = (u, k + 1)
                e = eids[k]
                if mask is not None and mask[e]:
                    continue
                v = int(nbrs[k])
                if index[v] == -1:
                    index[v] = low[v] = counter
                    counter += 1
                    stack.append(v)
                    on_stack[v] = True
                    work.append((v, indptr[v]))
                elif on_stack[v]:
                    low[u] = min(low[u], index[v])
            else:
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[u])
                if low[u] == index[u]:
                    comp = set()
                    while True:
                        v = stack.pop()
                        on_stack[v] = False
                        comp.add(v)
                        if v == u:
                            break
                    comps.append(comp)
    return comps
