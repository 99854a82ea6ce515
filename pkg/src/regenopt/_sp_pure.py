"""Pure-Python shortest-path engine.

Fallback for the compiled kernel.  Works on pre-scaled integer weights with
arbitrary precision, so it is exact for any input the package can produce;
the compiled kernel is preferred whenever the scaled weights fit in int64.

Unreachable targets are reported as ``None`` (an explicit marker, never a
sentinel magnitude: scaled weights can grow arbitrarily large).
"""

from __future__ import annotations

import heapq
from typing import Sequence


def sssp(
    n: int,
    indptr: Sequence[int],
    nbr: Sequence[int],
    weights: Sequence[int],
    source: int,
) -> list[int | None]:
    """Single-source Dijkstra over a CSR adjacency with per-arc weights."""
    dist: list[int | None] = [None] * n
    dist[source] = 0
    heap = [(0, source)]
    done = [False] * n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for k in range(indptr[u], indptr[u + 1]):
            v = nbr[k]
            nd = d + weights[k]
            if dist[v] is None or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def robust_apsp(
    n: int,
    indptr: Sequence[int],
    nbr: Sequence[int],
    base: Sequence[int],
    dev: Sequence[int],
    gamma: int,
    thetas: Sequence[int],
    sources: Sequence[int] | None = None,
) -> list[list[int | None]]:
    """Budgeted-robust shortest distances from ``sources`` (default: all).

    For every threshold theta the arc weights become
    ``base + max(dev - theta, 0)`` and the candidate distance is
    ``gamma * theta`` plus the nominal distance under those weights; the
    result is the minimum candidate.  Rows follow the order of ``sources``.
    """
    if sources is None:
        sources = range(n)
    out: list[list[int | None]] = [[None] * n for _ in sources]
    for theta in thetas:
        w = [base[k] + (dev[k] - theta if dev[k] > theta else 0) for k in range(len(nbr))]
        penalty = gamma * theta
        for row, s in enumerate(sources):
            dist = sssp(n, indptr, nbr, w, s)
            out_row = out[row]
            for v in range(n):
                d = dist[v]
                if d is not None:
                    cand = penalty + d
                    if out_row[v] is None or cand < out_row[v]:
                        out_row[v] = cand
    return out
