"""Independent reference implementations used only to check the library.

Everything here is deliberately naive: exhaustive DFS path enumeration,
Bellman-Ford relaxation sweeps, subset enumeration. None of it shares code
with the package.
"""

from __future__ import annotations

import itertools
import math

INF = float("inf")


def enumerate_simple_paths(n, edge_list, directed, s, t, removed=frozenset()):
    """All simple s-t node sequences via DFS over an explicit adjacency."""
    adj = {u: [] for u in range(n)}
    for idx, (u, v) in enumerate(edge_list):
        if idx in removed:
            continue
        adj[u].append(v)
        if not directed:
            adj[v].append(u)
    for u in adj:
        adj[u].sort()
    out = []
    stack = [(s, (s,))]
    while stack:
        node, path = stack.pop()
        if node == t:
            out.append(path)
            continue
        for nxt in reversed(adj[node]):
            if nxt not in path:
                stack.append((nxt, path + (nxt,)))
    return out


def path_weight(nodes, edge_list, directed, weights):
    index = {}
    for idx, (u, v) in enumerate(edge_list):
        index[(u, v)] = idx
        if not directed:
            index[(v, u)] = idx
    total = 0.0
    for a, b in zip(nodes, nodes[1:]):
        total += weights[index[(a, b)]]
    return total


def bellman_ford(n, edge_list, directed, weights, source, removed=frozenset()):
    """Distance array from source by |V|-1 relaxation sweeps."""
    arcs = []
    for idx, (u, v) in enumerate(edge_list):
        if idx in removed:
            continue
        arcs.append((u, v, weights[idx]))
        if not directed:
            arcs.append((v, u, weights[idx]))
    dist = [INF] * n
    dist[source] = 0.0
    for _ in range(max(n - 1, 1)):
        changed = False
        for u, v, w in arcs:
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
        if not changed:
            break
    return dist


def sorted_simple_paths(n, edge_list, directed, weights, s, t, removed=frozenset()):
    """(nodes, length) for every simple s-t path, sorted by (length, nodes)."""
    paths = enumerate_simple_paths(n, edge_list, directed, s, t, removed)
    scored = [(path_weight(p, edge_list, directed, weights), p) for p in paths]
    scored.sort()
    return [(p, L) for L, p in scored]


def attack_feasible(n, edge_list, directed, weights, target_nodes, cut):
    """Does removing ``cut`` make the target the unique shortest path?
    Checked directly against the enumerated path list."""
    s, t = target_nodes[0], target_nodes[-1]
    target_len = path_weight(target_nodes, edge_list, directed, weights)
    for nodes in enumerate_simple_paths(n, edge_list, directed, s, t, removed=frozenset(cut)):
        if nodes == tuple(target_nodes):
            continue
        if path_weight(nodes, edge_list, directed, weights) <= target_len:
            return False
    return True


def exhaustive_min_attack(n, edge_list, directed, weights, costs, target_nodes):
    """Minimum-cost edge subset achieving unique-shortest, by enumeration.

    Only subsets of edges lying on some competitor (and off the target) can
    help, and any feasible cut restricted to those edges stays feasible at
    no greater cost, so the enumeration is over that reduced set.
    """
    s, t = target_nodes[0], target_nodes[-1]
    target_len = path_weight(target_nodes, edge_list, directed, weights)
    index = {}
    for idx, (u, v) in enumerate(edge_list):
        index[(u, v)] = idx
        if not directed:
            index[(v, u)] = idx
    target_edges = {index[(a, b)] for a, b in zip(target_nodes, target_nodes[1:])}
    competitor_sets = []
    for nodes in enumerate_simple_paths(n, edge_list, directed, s, t):
        if nodes == tuple(target_nodes):
            continue
        if path_weight(nodes, edge_list, directed, weights) <= target_len:
            es = {index[(a, b)] for a, b in zip(nodes, nodes[1:])} - target_edges
            competitor_sets.append(frozenset(es))
    relevant = sorted(set().union(*competitor_sets)) if competitor_sets else []
    best_cost = INF
    best = None
    for r in range(len(relevant) + 1):
        for combo in itertools.combinations(relevant, r):
            chosen = set(combo)
            cost = sum(costs[e] for e in chosen)
            if cost >= best_cost:
                continue
            if all(cs & chosen for cs in competitor_sets):
                best_cost = cost
                best = chosen
    if best is None:
        return set(), 0.0
    return best, best_cost


def max_lengthening_attack_cost(n, edge_list, directed, weights, costs, target_nodes):
    """Highest attack cost reachable by lengthening target edges only: the
    cheapest hitting set over *all* rival paths (every rival eventually
    becomes a competitor as the target grows)."""
    s, t = target_nodes[0], target_nodes[-1]
    index = {}
    for idx, (u, v) in enumerate(edge_list):
        index[(u, v)] = idx
        if not directed:
            index[(v, u)] = idx
    target_edges = {index[(a, b)] for a, b in zip(target_nodes, target_nodes[1:])}
    rival_sets = []
    for nodes in enumerate_simple_paths(n, edge_list, directed, s, t):
        if nodes == tuple(target_nodes):
            continue
        es = {index[(a, b)] for a, b in zip(nodes, nodes[1:])} - target_edges
        rival_sets.append(frozenset(es))
    if not rival_sets:
        return 0.0
    relevant = sorted(set().union(*rival_sets))
    best = INF
    for r in range(len(relevant) + 1):
        for combo in itertools.combinations(relevant, r):
            chosen = set(combo)
            cost = sum(costs[e] for e in chosen)
            if cost >= best:
                continue
            if all(rs & chosen for rs in rival_sets):
                best = cost
    return best


def enumerate_lp_vertices(objective, bounds, rows):
    """Brute-force LP optimum by enumerating basic points: intersections of
    constraint/bound hyperplanes. Small instances only."""
    import numpy as np

    n = len(objective)
    planes = []
    for idxs, coefs, rel, rhs in rows:
        a = np.zeros(n)
        for i, co in zip(idxs, coefs):
            a[i] = co
        planes.append((a, rhs))
    for i, (lo, hi) in enumerate(bounds):
        if not math.isinf(lo):
            a = np.zeros(n)
            a[i] = 1.0
            planes.append((a, lo))
        if not math.isinf(hi):
            a = np.zeros(n)
            a[i] = 1.0
            planes.append((a, hi))

    def feasible(x):
        for idxs, coefs, rel, rhs in rows:
            val = sum(co * x[i] for i, co in zip(idxs, coefs))
            if rel == "<=" and val > rhs + 1e-7:
                return False
            if rel == ">=" and val < rhs - 1e-7:
                return False
            if rel == "=" and abs(val - rhs) > 1e-7:
                return False
        for i, (lo, hi) in enumerate(bounds):
            if x[i] < lo - 1e-7 or x[i] > hi + 1e-7:
                return False
        return True

    best = None
    for combo in itertools.combinations(range(len(planes)), n):
        a = np.array([planes[i][0] for i in combo])
        b = np.array([planes[i][1] for i in combo])
        try:
            x = np.linalg.solve(a, b)
        except np.linalg.LinAlgError:
            continue
        if feasible(x):
            val = float(sum(c * x[i] for i, c in enumerate(objective)))
            if best is None or val < best:
                best = val
    return best
