# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled shortest-path kernel.

Same contract as ``_sp_pure``: CSR adjacency, pre-scaled int64 weights,
``UNREACHED`` marks infinity.  The robust all-pairs loop (thresholds x
sources) dominates the package's runtime, which is why it lives here.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

UNREACHED = 1 << 62

cdef long long _INF = <long long>1 << 62


cdef void _dijkstra(
    int n,
    const int[::1] indptr,
    const int[::1] nbr,
    const long long[::1] w,
    int source,
    long long[::1] dist,
    long long[::1] hkey,
    int[::1] hval,
    unsigned char[::1] done,
) noexcept nogil:
    cdef int hs, i, u, v, k, c, p
    cdef long long d, nd
    for i in range(n):
        dist[i] = _INF
        done[i] = 0
    dist[source] = 0
    hkey[0] = 0
    hval[0] = source
    hs = 1
    while hs > 0:
        d = hkey[0]
        u = hval[0]
        hs -= 1
        hkey[0] = hkey[hs]
        hval[0] = hval[hs]
        k = 0
        while True:
            c = 2 * k + 1
            if c >= hs:
                break
            if c + 1 < hs and hkey[c + 1] < hkey[c]:
                c += 1
            if hkey[c] < hkey[k]:
                hkey[c], hkey[k] = hkey[k], hkey[c]
                hval[c], hval[k] = hval[k], hval[c]
                k = c
            else:
                break
        if done[u] or d != dist[u]:
            continue
        done[u] = 1
        for i in range(indptr[u], indptr[u + 1]):
            v = nbr[i]
            nd = d + w[i]
            if nd < dist[v]:
                dist[v] = nd
                hkey[hs] = nd
                hval[hs] = v
                k = hs
                hs += 1
                while k > 0:
                    p = (k - 1) >> 1
                    if hkey[k] < hkey[p]:
                        hkey[k], hkey[p] = hkey[p], hkey[k]
                        hval[k], hval[p] = hval[p], hval[k]
                        k = p
                    else:
                        break


def robust_apsp(
    int n,
    int[::1] indptr,
    int[::1] nbr,
    long long[::1] base,
    long long[::1] dev,
    long long gamma,
    long long[::1] thetas,
    int[::1] sources,
):
    """Budgeted-robust shortest distances; rows follow ``sources`` order."""
    cdef int narcs = nbr.shape[0]
    cdef int nsrc = sources.shape[0]
    cdef cnp.ndarray out_arr = np.full((nsrc, n), _INF, dtype=np.int64)
    cdef long long[:, ::1] out = out_arr
    cdef cnp.ndarray w_arr = np.empty(narcs, dtype=np.int64)
    cdef long long[::1] w = w_arr
    cdef cnp.ndarray dist_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] dist = dist_arr
    # Each arc relaxes at most once per settled endpoint: narcs + 1 slots.
    cdef cnp.ndarray hkey_arr = np.empty(max(narcs + 2, 4), dtype=np.int64)
    cdef long long[::1] hkey = hkey_arr
    cdef cnp.ndarray hval_arr = np.empty(max(narcs + 2, 4), dtype=np.int32)
    cdef int[::1] hval = hval_arr
    cdef cnp.ndarray done_arr = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] done = done_arr
    cdef int it, k, row, v
    cdef long long theta, penalty, cand
    with nogil:
        for it in range(thetas.shape[0]):
            theta = thetas[it]
            for k in range(narcs):
                if dev[k] > theta:
                    w[k] = base[k] + dev[k] - theta
                else:
                    w[k] = base[k]
            penalty = gamma * theta
            for row in range(nsrc):
                _dijkstra(n, indptr, nbr, w, sources[row], dist, hkey, hval, done)
                for v in range(n):
                    if dist[v] < _INF:
                        cand = penalty + dist[v]
                        if cand < out[row, v]:
                            out[row, v] = cand
    return out_arr
