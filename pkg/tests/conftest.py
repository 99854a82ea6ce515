"""Shared fixtures and independent oracles.

The oracles deliberately avoid the package's solver internals: path
enumeration is a plain DFS, attack maximization enumerates subsets, and
feasibility goes through networkx.  They exist so the fast implementations
have something independent to be measured against.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from pathlib import Path

import networkx as nx
import pytest

from regenopt import build_instance, load_instance
from regenopt.instance import NetworkInstance

DATA = Path(__file__).parent / "data"


def pytest_terminal_summary(terminalreporter):
    """One visible pass/fail line per acceptance criterion."""
    verdicts = {
        "passed": "PASS",
        "failed": "FAIL",
        "error": "FAIL",
        "xfailed": "FAIL (documented expected failure; see the test's marker)",
    }
    lines = []
    for status, verdict in verdicts.items():
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance" in nodeid and "::" in nodeid:
                name = nodeid.split("::")[-1]
                lines.append(f"{name}: {verdict}")
    if lines:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for line in sorted(lines):
            terminalreporter.write_line("  " + line)


@pytest.fixture(scope="session")
def five_node() -> NetworkInstance:
    """A five-node optical network with hand-checkable values."""
    return load_instance((DATA / "five_node.json").read_bytes())


def path_instance(costs, devs, lengths, length_devs=None, d_max=1000, gamma_e=1,
                  gamma_v=1, horizon=1):
    """A path 0-1-...-k with the given node costs and edge lengths."""
    n = len(costs)
    length_devs = length_devs or [0] * (n - 1)
    edges = [
        (i, i + 1, lengths[i], length_devs[i], [length_devs[i]] * horizon)
        for i in range(n - 1)
    ]
    return build_instance(costs, devs, edges, d_max, gamma_e, gamma_v, horizon)


# ---------------------------------------------------------------------------
# Shortest-path oracles


def simple_paths_edges(inst: NetworkInstance, p: int, q: int):
    """All simple p-q paths as edge-id lists (DFS enumeration)."""
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(inst.n)}
    for eid, e in enumerate(inst.edges):
        u, v = e.endpoints
        adj[u].append((v, eid))
        adj[v].append((u, eid))
    out = []

    def walk(v, visited, edges_so_far):
        if v == q:
            out.append(list(edges_so_far))
            return
        for w, eid in adj[v]:
            if w not in visited:
                visited.add(w)
                edges_so_far.append(eid)
                walk(w, visited, edges_so_far)
                edges_so_far.pop()
                visited.remove(w)

    walk(p, {p}, [])
    return out


def oracle_robust_sp(inst, p, q, gamma, deviations):
    """Min over simple paths of max over <=gamma attack subsets."""
    best = None
    for path in simple_paths_edges(inst, p, q):
        base = sum((inst.edges[e].nominal_length for e in path), Fraction(0))
        worst = Fraction(0)
        for k in range(0, min(gamma, len(path)) + 1):
            for subset in itertools.combinations(path, k):
                hit = sum((deviations[e] for e in subset), Fraction(0))
                worst = max(worst, hit)
        value = base + worst
        if best is None or value < best:
            best = value
    return best


def fw_distances(inst, lengths):
    """Floyd-Warshall all-pairs distances with exact rationals."""
    n = inst.n
    dist = [[None] * n for _ in range(n)]
    for v in range(n):
        dist[v][v] = Fraction(0)
    for e, edge in enumerate(inst.edges):
        u, v = edge.endpoints
        w = Fraction(lengths[e])
        if dist[u][v] is None or w < dist[u][v]:
            dist[u][v] = dist[v][u] = w
    for k in range(n):
        for i in range(n):
            if dist[i][k] is None:
                continue
            for j in range(n):
                if dist[k][j] is None:
                    continue
                cand = dist[i][k] + dist[k][j]
                if dist[i][j] is None or cand < dist[i][j]:
                    dist[i][j] = cand
    return dist


# ---------------------------------------------------------------------------
# Placement oracles (networkx-based feasibility)


def nx_graph_of(graph) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(graph.n))
    for p in range(graph.n):
        for q in range(p + 1, graph.n):
            if graph.has_edge(p, q):
                g.add_edge(p, q)
    return g


def nx_feasible(g: nx.Graph, subset) -> bool:
    subset = set(subset)
    if not subset:
        return False
    for v in g.nodes:
        if v not in subset and not any(u in subset for u in g.neighbors(v)):
            return False
    induced = g.subgraph(subset)
    return nx.is_connected(induced)


def oracle_worst_cost(inst, subset, gamma_v=None):
    """Exhaustive cost adversary: max over <=gamma_v attacked subsets."""
    if gamma_v is None:
        gamma_v = inst.gamma_v
    subset = sorted(subset)
    base = sum((inst.nodes[v].nominal_cost for v in subset), Fraction(0))
    worst = Fraction(0)
    for k in range(0, min(gamma_v, len(subset)) + 1):
        for attack in itertools.combinations(subset, k):
            hit = sum((inst.nodes[v].max_deviation for v in attack), Fraction(0))
            worst = max(worst, hit)
    return base + worst


def oracle_minmax(inst, graph):
    """Brute-force min over feasible placements of the exhaustive worst cost."""
    g = nx_graph_of(graph)
    best = None
    for size in range(1, graph.n + 1):
        for subset in itertools.combinations(range(graph.n), size):
            if not nx_feasible(g, subset):
                continue
            value = oracle_worst_cost(inst, subset)
            if best is None or value < best:
                best = value
    return best


def oracle_optimal_placements(inst, graph):
    """Every minimum-worst-cost feasible placement (for warm-start checks)."""
    g = nx_graph_of(graph)
    best = None
    winners = []
    for size in range(1, graph.n + 1):
        for subset in itertools.combinations(range(graph.n), size):
            if not nx_feasible(g, subset):
                continue
            value = oracle_worst_cost(inst, subset)
            if best is None or value < best:
                best = value
                winners = [set(subset)]
            elif value == best:
                winners.append(set(subset))
    return best, winners
