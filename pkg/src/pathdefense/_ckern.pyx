# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled shortest-path kernels.

Mirrors ``_pykern`` exactly: same (distance, node) heap ordering and the
same float arithmetic, so both backends return bit-identical results.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

IMPLEMENTATION = "cython"

cdef double INF = float("inf")


cdef inline bint _less(double da, cnp.int32_t na, double db, cnp.int32_t nb) noexcept nogil:
    if da != db:
        return da < db
    return na < nb


cdef void _heap_push(double* hd, cnp.int32_t* hn, int* size, double d, cnp.int32_t node) noexcept nogil:
    cdef int i = size[0]
    cdef int parent
    cdef double td
    cdef cnp.int32_t tn
    hd[i] = d
    hn[i] = node
    size[0] = i + 1
    while i > 0:
        parent = (i - 1) >> 1
        if _less(hd[i], hn[i], hd[parent], hn[parent]):
            td = hd[i]; hd[i] = hd[parent]; hd[parent] = td
            tn = hn[i]; hn[i] = hn[parent]; hn[parent] = tn
            i = parent
        else:
            break


cdef cnp.int32_t _heap_pop(double* hd, cnp.int32_t* hn, int* size, double* out_d) noexcept nogil:
    cdef cnp.int32_t top_node = hn[0]
    cdef double top_dist = hd[0]
    cdef int n = size[0] - 1
    cdef int i = 0
    cdef int child
    cdef double td
    cdef cnp.int32_t tn
    size[0] = n
    hd[0] = hd[n]
    hn[0] = hn[n]
    while True:
        child = 2 * i + 1
        if child >= n:
            break
        if child + 1 < n and _less(hd[child + 1], hn[child + 1], hd[child], hn[child]):
            child += 1
        if _less(hd[child], hn[child], hd[i], hn[i]):
            td = hd[i]; hd[i] = hd[child]; hd[child] = td
            tn = hn[i]; hn[i] = hn[child]; hn[child] = tn
            i = child
        else:
            break
    out_d[0] = top_dist
    return top_node


def dijkstra(indptr, nbrs, eids, weights, emask, nmask, source):
    """See ``_pykern.dijkstra``."""
    cdef const cnp.int64_t[::1] indptr_v = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const cnp.int32_t[::1] nbrs_v = np.ascontiguousarray(nbrs, dtype=np.int32)
    cdef const cnp.int32_t[::1] eids_v = np.ascontiguousarray(eids, dtype=np.int32)
    cdef const cnp.float64_t[::1] w_v = np.ascontiguousarray(weights, dtype=np.float64)
    cdef int n = indptr_v.shape[0] - 1
    cdef int m = nbrs_v.shape[0]

    cdef bint has_emask = emask is not None
    cdef bint has_nmask = nmask is not None
    cdef const cnp.uint8_t[::1] emask_v
    cdef const cnp.uint8_t[::1] nmask_v
    if has_emask:
        emask_v = np.ascontiguousarray(emask, dtype=np.uint8)
    else:
        emask_v = np.zeros(1, dtype=np.uint8)
    if has_nmask:
        nmask_v = np.ascontiguousarray(nmask, dtype=np.uint8)
    else:
        nmask_v = np.zeros(1, dtype=np.uint8)

    dist_arr = np.full(n, INF, dtype=np.float64)
    cdef cnp.float64_t[::1] dist = dist_arr
    cdef int src = source
    if has_nmask and nmask_v[src]:
        return dist_arr

    done_arr = np.zeros(n, dtype=np.uint8)
    heap_d_arr = np.empty(m + n + 1, dtype=np.float64)
    heap_n_arr = np.empty(m + n + 1, dtype=np.int32)
    cdef cnp.uint8_t[::1] done = done_arr
    cdef cnp.float64_t[::1] heap_d = heap_d_arr
    cdef cnp.int32_t[::1] heap_n = heap_n_arr
    cdef int heap_size = 0
    cdef int u, v, e
    cdef cnp.int64_t k
    cdef double du, dv

    dist[src] = 0.0
    _heap_push(&heap_d[0], &heap_n[0], &heap_size, 0.0, src)
    while heap_size > 0:
        u = _heap_pop(&heap_d[0], &heap_n[0], &heap_size, &du)
        if done[u]:
            continue
        done[u] = 1
        for k in range(indptr_v[u], indptr_v[u + 1]):
            e = eids_v[k]
            if has_emask and emask_v[e]:
                continue
            v = nbrs_v[k]
            if done[v]:
                continue
            if has_nmask and nmask_v[v]:
                continue
            dv = du + w_v[e]
            if dv < dist[v]:
                dist[v] = dv
                _heap_push(&heap_d[0], &heap_n[0], &heap_size, dv, v)
    return dist_arr


def dag_search(indptr, nbrs, eids, weights, emask, nmask, dist, source, target, skip):
    """See ``_pykern.dag_search``."""
    cdef const cnp.int64_t[::1] indptr_v = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const cnp.int32_t[::1] nbrs_v = np.ascontiguousarray(nbrs, dtype=np.int32)
    cdef const cnp.int32_t[::1] eids_v = np.ascontiguousarray(eids, dtype=np.int32)
    cdef const cnp.float64_t[::1] w_v = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const cnp.float64_t[::1] dist_v = np.ascontiguousarray(dist, dtype=np.float64)
    cdef int n = indptr_v.shape[0] - 1
    cdef int src = source
    cdef int dst = target

    if not (dist_v[src] < INF):
        return None

    cdef bint has_emask = emask is not None
    cdef bint has_nmask = nmask is not None
    cdef const cnp.uint8_t[::1] emask_v
    cdef const cnp.uint8_t[::1] nmask_v
    if has_emask:
        emask_v = np.ascontiguousarray(emask, dtype=np.uint8)
    else:
        emask_v = np.zeros(1, dtype=np.uint8)
    if has_nmask:
        nmask_v = np.ascontiguousarray(nmask, dtype=np.uint8)
    else:
        nmask_v = np.zeros(1, dtype=np.uint8)
    if has_nmask and nmask_v[src]:
        return None

    cdef bint has_skip = skip is not None
    cdef const cnp.int32_t[::1] skip_v
    cdef int skip_len = 0
    if has_skip:
        skip_v = np.ascontiguousarray(skip, dtype=np.int32)
        skip_len = skip_v.shape[0]
    else:
        skip_v = np.zeros(1, dtype=np.int32)

    onpath_arr = np.zeros(n, dtype=np.uint8)
    path_arr = np.empty(n + 1, dtype=np.int32)
    cursor_arr = np.empty(n + 1, dtype=np.int64)
    cdef cnp.uint8_t[::1] onpath = onpath_arr
    cdef cnp.int32_t[::1] path = path_arr
    cdef cnp.int64_t[::1] cursor = cursor_arr

    cdef int depth = 0
    cdef int u, v, e, i
    cdef cnp.int64_t k, end
    cdef double du
    cdef bint advanced, matches

    onpath[src] = 1
    path[0] = src
    cursor[0] = indptr_v[src]
    while depth >= 0:
        u = path[depth]
        if u == dst:
            matches = False
            if has_skip and skip_len == depth + 1:
                matches = True
                for i in range(depth + 1):
                    if path[i] != skip_v[i]:
                        matches = False
                        break
            if not matches:
                return [path[i] for i in range(depth + 1)]
            onpath[u] = 0
            depth -= 1
            continue
        k = cursor[depth]
        end = indptr_v[u + 1]
        du = dist_v[u]
        advanced = False
        while k < end:
            e = eids_v[k]
            v = nbrs_v[k]
            k += 1
            if has_emask and emask_v[e]:
                continue
            if has_nmask and nmask_v[v]:
                continue
            if onpath[v]:
                continue
            if w_v[e] + dist_v[v] == du:
                cursor[depth] = k
                onpath[v] = 1
                depth += 1
                path[depth] = v
                cursor[depth] = indptr_v[v]
                advanced = True
                break
        if not advanced:
            onpath[u] = 0
            depth -= 1
    return None
