"""Pure-Python shortest-path kernels.

Reference implementation of the hot inner loops; the compiled module in
``_ckern.pyx`` mirrors these semantics exactly (same heap ordering, same
float arithmetic), so either backend yields bit-identical results.
"""

import heapq

import numpy as np

IMPLEMENTATION = "python"

INF = float("inf")


def dijkstra(indptr, nbrs, eids, weights, emask, nmask, source):
    """Single-source shortest distances over a CSR adjacency.

    ``emask``/``nmask`` are uint8 arrays marking removed edges/nodes (may be
    None). Returns a float64 array with inf for unreachable nodes. The heap
    is ordered by (distance, node) so tie handling is deterministic.
    """
    n = len(indptr) - 1
    dist = np.full(n, INF)
    if nmask is not None and nmask[source]:
        return dist
    indptr_l = indptr.tolist()
    nbrs_l = nbrs.tolist()
    eids_l = eids.tolist()
    w_l = weights.tolist()
    emask_l = emask.tolist() if emask is not None else None
    nmask_l = nmask.tolist() if nmask is not None else None
    dist_l = [INF] * n
    done = [False] * n
    dist_l[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        du, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for k in range(indptr_l[u], indptr_l[u + 1]):
            e = eids_l[k]
            if emask_l is not None and emask_l[e]:
                continue
            v = nbrs_l[k]
            if done[v]:
                continue
            if nmask_l is not None and nmask_l[v]:
                continue
            dv = du + w_l[e]
            if dv < dist_l[v]:
                dist_l[v] = dv
                heapq.heappush(heap, (dv, v))
    dist[:] = dist_l
    return dist


def dag_search(indptr, nbrs, eids, weights, emask, nmask, dist, source, target, skip):
    """Lexicographically smallest tight path from ``source`` to ``target``.

    ``dist`` holds distances *to* ``target`` (reverse Dijkstra); an edge
    (u, v) is tight when w(u,v) + dist[v] == dist[u] exactly. Every simple
    path made of tight edges is a shortest path, and the DFS scans
    neighbors in increasing node order, so the first completion is the
    lexicographically smallest shortest path. ``skip`` (a node sequence or
    None) excludes one exact path, which turns the search into "smallest
    shortest path other than skip". Returns a list of nodes or None.

    Backtracking keeps the search correct when zero-weight edges create
    tight cycles or visited-node dead ends.
    """
    if dist[source] == INF or dist[source] != dist[source]:
        return None
    indptr_l = indptr.tolist()
    nbrs_l = nbrs.tolist()
    eids_l = eids.tolist()
    w_l = weights.tolist()
    dist_l = dist.tolist()
    emask_l = emask.tolist() if emask is not None else None
    nmask_l = nmask.tolist() if nmask is not None else None
    skip_l = list(skip) if skip is not None else None
    if nmask_l is not None and nmask_l[source]:
        return None

    n = len(indptr_l) - 1
    onpath = [False] * n
    onpath[source] = True
    path = [source]
    # Per-depth scan position into the adjacency of the path's top node.
    cursor = [indptr_l[source]]
    while path:
        u = path[-1]
        if u == target:
            if skip_l is None or path != skip_l:
                return list(path)
            onpath[u] = False
            path.pop()
            cursor.pop()
            continue
        k = cursor[-1]
        end = indptr_l[u + 1]
        du = dist_l[u]
        advanced = False
        while k < end:
            e = eids_l[k]
            v = nbrs_l[k]
            k += 1
            if emask_l is not None and emask_l[e]:
                continue
            if nmask_l is not None and nmask_l[v]:
                continue
            if onpath[v]:
                continue
            if w_l[e] + dist_l[v] == du:
                cursor[-1] = k
                onpath[v] = True
                path.append(v)
                cursor.append(indptr_l[v])
                advanced = True
                break
        if not advanced:
            onpath[u] = False
            path.pop()
            cursor.pop()
    return None
