import sys
from pathlib import Path as FsPath

import numpy as np
import pytest

sys.path.insert(0, str(FsPath(__file__).parent))

from pathdefense.graphs import CostVector, Path, WeightedGraph, WeightVector


DIAMOND_EDGES = [(0, 1), (1, 3), (0, 2), (2, 3), (0, 3)]
# s=0, a=1, b=2, t=3; weights: s-a 1, a-t 1, s-b 1, b-t 2, s-t 5.
DIAMOND_WEIGHTS = [1.0, 1.0, 1.0, 2.0, 5.0]


@pytest.fixture
def diamond():
    g = WeightedGraph(4, DIAMOND_EDGES, directed=True)
    w = WeightVector(DIAMOND_WEIGHTS)
    c = CostVector([1.0] * 5)
    return g, w, c


@pytest.fixture
def diamond_target(diamond):
    g, _, _ = diamond
    return Path.from_nodes(g, [0, 2, 3])


def random_connected_graph(rng, max_n=8, max_m=14, max_w=9, max_c=5, directed=None):
    """Small random instance for oracle suites; undirected ones are
    connected, directed ones sampled until some pair is mutually routable."""
    if directed is None:
        directed = bool(rng.integers(2))
    while True:
        n = int(rng.integers(4, max_n + 1))
        all_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        rng.shuffle(all_pairs)
        m = int(rng.integers(n - 1, max_m + 1))
        chosen = all_pairs[:m]
        if directed:
            chosen = [(u, v) if rng.integers(2) else (v, u) for u, v in chosen]
        g = WeightedGraph(n, chosen, directed=directed)
        from pathdefense.graphs import connected_components

        if len(connected_components(g)) != 1:
            continue
        w = WeightVector(rng.integers(0, max_w + 1, g.edge_count).astype(float))
        c = CostVector(rng.integers(1, max_c + 1, g.edge_count).astype(float))
        return g, w, c


def pick_target(rng, g, w, among=5):
    """A (path, s, t) target drawn from the shortest few paths of a random
    routable pair."""
    from pathdefense.graphs import k_shortest_paths

    n = g.node_count
    for _ in range(200):
        s = int(rng.integers(n))
        t = int(rng.integers(n))
        if s == t:
            continue
        ranked = k_shortest_paths(g, w, s, t, among)
        if not ranked:
            continue
        pick = int(rng.integers(len(ranked)))
        return ranked[pick][0], s, t
    raise AssertionError("no routable pair found")
