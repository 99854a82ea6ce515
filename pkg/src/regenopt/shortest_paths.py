"""Nominal, static-robust, and dynamic-robust shortest paths, and the
construction of the transformed communication graph.

The communication graph M keeps an edge (p, q) exactly when the certified
worst-case shortest distance between p and q is at most ``d_max`` under the
active regime:

* ``DWC``  - every edge length fixed at nominal + maximum deviation;
* ``RSB``  - budgeted adversary, full deviations available;
* ``RDB``  - budgeted adversary per period with that period's caps,
             worst period taken.

Budgeted-robust distances are computed exactly by threshold decomposition:
for every threshold theta in {0} union {deviation values}, run a nominal
all-pairs pass with lengths ``nominal + max(dev - theta, 0)`` and keep the
minimum of ``gamma * theta + distance``.  The budget makes at most
``|E| + 1`` candidates necessary, and each candidate is a plain
shortest-path computation.
"""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import backend
from .bitsets import bits as _bits
from .bitsets import component as _component
from .errors import InfeasibleInstanceError, InvalidArgumentError
from .instance import NetworkInstance
from .rationals import common_scale, scaled_int


class Regime(enum.Enum):
    DWC = "nominal-upper"
    RSB = "static-budget"
    RDB = "dynamic-budget-worst-period"


@dataclass(frozen=True)
class RobustDistanceMatrix:
    """Certified worst-case distances under one regime.

    Distances are stored as scaled integers; ``get`` converts back to exact
    rationals.  Disconnection is an explicit ``None`` entry, never a numeric
    sentinel.
    """

    regime: Regime
    scale: int
    rows: tuple[tuple[int | None, ...], ...]

    @property
    def n(self) -> int:
        return len(self.rows)

    def get(self, p: int, q: int) -> Fraction | None:
        value = self.rows[p][q]
        if value is None:
            return None
        return Fraction(value, self.scale)

    def finite(self, p: int, q: int) -> bool:
        return self.rows[p][q] is not None


@dataclass(frozen=True)
class TransformedGraph:
    """Communication graph M with its certifying distance matrix.

    ``adjacency[v]`` is the neighbor bitmask of v; ``ndc_pairs`` holds every
    distinct pair absent from M (the pairs that can only communicate through
    regenerator-equipped internal nodes).
    """

    n: int
    adjacency: tuple[int, ...]
    ndc_pairs: frozenset[tuple[int, int]]
    distances: RobustDistanceMatrix
    regime: Regime

    def has_edge(self, p: int, q: int) -> bool:
        return bool(self.adjacency[p] >> q & 1)

    def neighbors(self, v: int) -> list[int]:
        return _bits(self.adjacency[v])

    def degree(self, v: int) -> int:
        return self.adjacency[v].bit_count()

    def is_complete(self) -> bool:
        full = (1 << self.n) - 1
        return all(self.adjacency[v] == full & ~(1 << v) for v in range(self.n))

    def to_dict(self) -> dict:
        """JSON-ready diagnostics form (certified distances as strings)."""
        edges = []
        for p in range(self.n):
            for q in range(p + 1, self.n):
                if self.has_edge(p, q):
                    edges.append({"p": p, "q": q, "dist": str(self.distances.get(p, q))})
        return {
            "n": self.n,
            "regime": self.regime.value,
            "edges": edges,
            "ndc_pairs": sorted(list(pair) for pair in self.ndc_pairs),
        }


# ---------------------------------------------------------------------------
# CSR assembly and scaled runs


def _csr(inst: NetworkInstance) -> tuple[list[int], list[int], list[int]]:
    """Adjacency in CSR form; third array maps each arc to its edge id."""
    n = inst.n
    deg = [0] * n
    for e in inst.edges:
        u, v = e.endpoints
        deg[u] += 1
        deg[v] += 1
    indptr = [0] * (n + 1)
    for v in range(n):
        indptr[v + 1] = indptr[v] + deg[v]
    nbr = [0] * indptr[n]
    arc_edge = [0] * indptr[n]
    cursor = indptr[:-1].copy()
    for eid, e in enumerate(inst.edges):
        u, v = e.endpoints
        nbr[cursor[u]] = v
        arc_edge[cursor[u]] = eid
        cursor[u] += 1
        nbr[cursor[v]] = u
        arc_edge[cursor[v]] = eid
        cursor[v] += 1
    return indptr, nbr, arc_edge


def _robust_rows_scaled(
    inst: NetworkInstance,
    lengths: Sequence[Fraction],
    deviations: Sequence[Fraction],
    gamma: int,
    sources: Sequence[int] | None = None,
) -> tuple[int, list[list[int]]]:
    """Scaled robust distances; returns (scale, rows)."""
    if gamma < 0:
        raise InvalidArgumentError(f"gamma must be nonnegative, got {gamma}")
    for i, value in enumerate(lengths):
        if value < 0:
            raise InvalidArgumentError(f"negative length on edge {i}: {value}")
    for i, value in enumerate(deviations):
        if value < 0:
            raise InvalidArgumentError(f"negative deviation on edge {i}: {value}")
    scale = common_scale(list(lengths) + list(deviations))
    base_e = [scaled_int(v, scale) for v in lengths]
    dev_e = [scaled_int(v, scale) for v in deviations]
    indptr, nbr, arc_edge = _csr(inst)
    base = [base_e[eid] for eid in arc_edge]
    dev = [dev_e[eid] for eid in arc_edge]
    thetas = sorted({0, *dev_e})
    rows = backend.robust_rows(inst.n, indptr, nbr, base, dev, gamma, thetas, sources)
    return scale, rows


def _worst_period_rows_scaled(
    inst: NetworkInstance,
    per_period_devs: Sequence[Sequence[Fraction]],
    gamma: int,
    sources: Sequence[int] | None = None,
) -> tuple[int, list[list[int | None]]]:
    """Per-period robust distances folded by their worst (largest) period."""
    merged_scale = common_scale(
        list(inst.edge_lengths()) + [d for devs in per_period_devs for d in devs]
    )
    out: list[list[int | None]] | None = None
    for devs in per_period_devs:
        scale, rows = _robust_rows_scaled(inst, inst.edge_lengths(), devs, gamma, sources)
        factor = merged_scale // scale
        if out is None:
            out = [[None if r is None else r * factor for r in row] for row in rows]
        else:
            for i, row in enumerate(rows):
                merged = out[i]
                for j, r in enumerate(row):
                    if merged[j] is None:
                        continue
                    if r is None:
                        merged[j] = None
                    else:
                        value = r * factor
                        if value > merged[j]:
                            merged[j] = value
    assert out is not None
    return merged_scale, out


# ---------------------------------------------------------------------------
# Public operations


def nominal_shortest_paths(
    inst: NetworkInstance, lengths: Sequence
) -> RobustDistanceMatrix:
    """Exact all-pairs shortest distances under the given per-edge lengths."""
    values = [v if isinstance(v, Fraction) else Fraction(v) for v in lengths]
    if len(values) != inst.m:
        raise InvalidArgumentError(f"expected {inst.m} lengths, got {len(values)}")
    scale, rows = _robust_rows_scaled(inst, values, [Fraction(0)] * inst.m, 0)
    return RobustDistanceMatrix(
        regime=Regime.DWC, scale=scale, rows=tuple(tuple(r) for r in rows)
    )


def robust_sp_static(
    inst: NetworkInstance, p: int, q: int, gamma: int
) -> Fraction | None:
    """Worst-case shortest p-q distance when the adversary may push up to
    ``gamma`` edges of the chosen path to their full deviation."""
    if p == q:
        raise InvalidArgumentError("endpoints must differ")
    scale, rows = _robust_rows_scaled(
        inst, inst.edge_lengths(), inst.edge_deviations(), gamma, sources=[p]
    )
    value = rows[0][q]
    return None if value is None else Fraction(value, scale)


def robust_sp_dynamic(inst: NetworkInstance, p: int, q: int) -> Fraction | None:
    """Worst-period robust p-q distance: the per-period budgeted-robust
    problems decouple, so the value is the maximum over periods of the
    static computation with that period's caps."""
    if p == q:
        raise InvalidArgumentError("endpoints must differ")
    caps = [inst.period_caps(t) for t in range(inst.horizon)]
    scale, rows = _worst_period_rows_scaled(inst, caps, inst.gamma_e, sources=[p])
    value = rows[0][q]
    return None if value is None else Fraction(value, scale)


def distance_matrix_at(
    inst: NetworkInstance,
    per_period_devs: Sequence[Sequence[Fraction]],
    gamma: int,
) -> RobustDistanceMatrix:
    """Worst-period robust distance matrix at explicit deviation levels
    (used by the adversarial game and the iterative method)."""
    scale, rows = _worst_period_rows_scaled(inst, per_period_devs, gamma)
    return RobustDistanceMatrix(
        regime=Regime.RDB, scale=scale, rows=tuple(tuple(r) for r in rows)
    )


def distance_matrix(inst: NetworkInstance, regime: Regime) -> RobustDistanceMatrix:
    """Distance matrix of one of the three standard regimes."""
    if regime is Regime.DWC:
        upper = [e.nominal_length + e.max_deviation for e in inst.edges]
        matrix = nominal_shortest_paths(inst, upper)
        return RobustDistanceMatrix(regime=Regime.DWC, scale=matrix.scale, rows=matrix.rows)
    if regime is Regime.RSB:
        scale, rows = _robust_rows_scaled(
            inst, inst.edge_lengths(), inst.edge_deviations(), inst.gamma_e
        )
        return RobustDistanceMatrix(
            regime=Regime.RSB, scale=scale, rows=tuple(tuple(r) for r in rows)
        )
    if regime is Regime.RDB:
        caps = [inst.period_caps(t) for t in range(inst.horizon)]
        return distance_matrix_at(inst, caps, inst.gamma_e)
    raise InvalidArgumentError(f"unknown regime {regime!r}")


def graph_from_matrix(
    inst: NetworkInstance, matrix: RobustDistanceMatrix, regime: Regime
) -> TransformedGraph:
    """Threshold the distance matrix at ``d_max``; raise if the result is
    disconnected (no placement could connect all nodes)."""
    n = inst.n
    adjacency = [0] * n
    ndc = set()
    for p in range(n):
        for q in range(p + 1, n):
            d = matrix.get(p, q)
            if d is not None and d <= inst.d_max:
                adjacency[p] |= 1 << q
                adjacency[q] |= 1 << p
            else:
                ndc.add((p, q))
    reached = _component(adjacency, 0, (1 << n) - 1)
    if reached != (1 << n) - 1:
        raise InfeasibleInstanceError(
            "communication graph is disconnected; no placement is feasible"
        )
    return TransformedGraph(
        n=n,
        adjacency=tuple(adjacency),
        ndc_pairs=frozenset(ndc),
        distances=matrix,
        regime=regime,
    )


def build_transformed_graph(inst: NetworkInstance, regime: Regime) -> TransformedGraph:
    """Build the communication graph M for the given uncertainty regime."""
    return graph_from_matrix(inst, distance_matrix(inst, regime), regime)


# ---------------------------------------------------------------------------
# Path certificates (deterministic, pure Python; used for scenario
# extraction and criticality scores, never on the hot path)


@dataclass(frozen=True)
class PathCertificate:
    """An optimal robust path and the attack that realizes its value."""

    value: Fraction
    path: tuple[int, ...]
    attacked_edges: frozenset[int]


def robust_path_certificate(
    inst: NetworkInstance,
    p: int,
    q: int,
    gamma: int,
    deviations: Sequence[Fraction],
) -> PathCertificate | None:
    """Optimal robust p-q path under the given deviations, with the
    worst-case attack on it.  Ties break toward the smaller threshold, then
    the lower-id predecessor, so results are reproducible."""
    lengths = inst.edge_lengths()
    scale = common_scale(list(lengths) + list(deviations))
    base_e = [scaled_int(v, scale) for v in lengths]
    dev_e = [scaled_int(v, scale) for v in deviations]
    indptr, nbr, arc_edge = _csr(inst)
    base = [base_e[eid] for eid in arc_edge]
    dev = [dev_e[eid] for eid in arc_edge]
    best: tuple[int, int] | None = None  # (value, theta)
    for theta in sorted({0, *dev_e}):
        row = backend.robust_rows(
            inst.n, indptr, nbr, base, dev, gamma, [theta], sources=[p]
        )[0]
        if row[q] is None:
            return None
        if best is None or row[q] < best[0]:
            best = (row[q], theta)
    assert best is not None
    w = [
        base_e[eid] + (dev_e[eid] - best[1] if dev_e[eid] > best[1] else 0)
        for eid in arc_edge
    ]
    _, pred = _sssp_with_pred(inst.n, indptr, nbr, w, p)
    path = [q]
    while path[-1] != p:
        path.append(pred[path[-1]])
    path.reverse()
    edge_ids = {tuple(sorted(e.endpoints)): i for i, e in enumerate(inst.edges)}
    path_edges = [
        edge_ids[tuple(sorted((path[i], path[i + 1])))] for i in range(len(path) - 1)
    ]
    ranked = sorted(path_edges, key=lambda eid: (-dev_e[eid], eid))
    attacked = frozenset(eid for eid in ranked[:gamma] if dev_e[eid] > 0)
    value = sum((lengths[eid] for eid in path_edges), Fraction(0)) + sum(
        (deviations[eid] for eid in attacked), Fraction(0)
    )
    return PathCertificate(value=value, path=tuple(path), attacked_edges=attacked)


def _sssp_with_pred(n, indptr, nbr, weights, source):
    """Dijkstra with deterministic predecessors (lowest feasible id)."""
    dist: list[int | None] = [None] * n
    pred = [-1] * n
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
            if (
                dist[v] is None
                or nd < dist[v]
                or (nd == dist[v] and not done[v] and u < pred[v])
            ):
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, pred
