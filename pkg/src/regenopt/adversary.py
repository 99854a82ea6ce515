"""Budgeted-adversary oracles.

The cost adversary's inner problem is a fractional knapsack with unit item
capacities, so its optimum is integral and available in closed form: attack
the ``gamma_v`` selected nodes with the largest deviations.  The length
adversary's worst realization is extracted from the robust shortest-path
certificates of the connections a placement actually relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .instance import NetworkInstance, Scenario
from .shortest_paths import (
    Regime,
    TransformedGraph,
    build_transformed_graph,
    robust_path_certificate,
)


@dataclass(frozen=True)
class WorstCaseCost:
    """Exact optimum of the cost adversary against one placement."""

    total: Fraction
    attacked_nodes: frozenset[int]
    nominal_part: Fraction
    deviation_part: Fraction


def worst_case_node_cost(
    placement: Iterable[int], inst: NetworkInstance, gamma_v: int | None = None
) -> WorstCaseCost:
    """Nominal cost of the placement plus its ``gamma_v`` largest deviations.

    Ties between equal deviations break toward the lower node id so the
    attacked set is reproducible.  ``gamma_v`` defaults to the instance
    budget; passing 0 evaluates the plain nominal cost.
    """
    if gamma_v is None:
        gamma_v = inst.gamma_v
    selected = sorted(set(placement))
    nominal = sum((inst.nodes[v].nominal_cost for v in selected), Fraction(0))
    ranked = sorted(selected, key=lambda v: (-inst.nodes[v].max_deviation, v))
    attacked = ranked[: min(gamma_v, len(ranked))]
    deviation = sum((inst.nodes[v].max_deviation for v in attacked), Fraction(0))
    return WorstCaseCost(
        total=nominal + deviation,
        attacked_nodes=frozenset(attacked),
        nominal_part=nominal,
        deviation_part=deviation,
    )


def dual_certificate(
    placement: Iterable[int], inst: NetworkInstance
) -> tuple[Fraction, dict[int, Fraction]]:
    """Optimal duals of the cost adversary's LP.

    pi is the (gamma_v + 1)-th largest deviation among the placement (0 when
    fewer), lambda_v = max(0, dev_v - pi) on selected nodes; together they
    certify ``gamma_v * pi + sum(lambda)`` equals the worst-case deviation
    part exactly.
    """
    selected = sorted(set(placement))
    devs = sorted((inst.nodes[v].max_deviation for v in selected), reverse=True)
    pi = devs[inst.gamma_v] if inst.gamma_v < len(devs) else Fraction(0)
    lam = {
        v: max(Fraction(0), inst.nodes[v].max_deviation - pi) for v in selected
    }
    return pi, lam


def placement_relevant_pairs(
    graph: TransformedGraph, placement: Iterable[int]
) -> list[tuple[int, int]]:
    """Connections a placement relies on: its induced edges in M plus each
    outside node's link to its lowest-id dominator."""
    selected = sorted(set(placement))
    sel_set = set(selected)
    pairs: list[tuple[int, int]] = []
    for i, p in enumerate(selected):
        for q in selected[i + 1 :]:
            if graph.has_edge(p, q):
                pairs.append((p, q))
    for v in range(graph.n):
        if v in sel_set:
            continue
        dominators = [u for u in graph.neighbors(v) if u in sel_set]
        if dominators:
            pairs.append((min(v, dominators[0]), max(v, dominators[0])))
    return pairs


def certificate_attack_census(
    inst: NetworkInstance, pairs: Iterable[tuple[int, int]], t: int
) -> dict[int, int]:
    """How often each edge appears in the period-``t`` worst-case attack
    certificates of the given connections."""
    caps = inst.period_caps(t)
    census: dict[int, int] = {}
    for p, q in pairs:
        cert = robust_path_certificate(inst, p, q, inst.gamma_e, caps)
        if cert is None:
            continue
        for eid in cert.attacked_edges:
            census[eid] = census.get(eid, 0) + 1
    return census


def worst_case_scenario(
    placement: Iterable[int],
    inst: NetworkInstance,
    graph: TransformedGraph | None = None,
) -> Scenario:
    """Worst adversary realization against a placement.

    Node side: the argmax set of :func:`worst_case_node_cost`.  Length side:
    per period, the edges most frequently attacked across the worst-case
    certificates of the connections the placement relies on, capped at
    ``gamma_e`` and realized at the period caps.  Deterministic: ties break
    by attack count, then lowest edge id.
    """
    selected = sorted(set(placement))
    attacked = worst_case_node_cost(selected, inst).attacked_nodes
    if graph is None:
        graph = build_transformed_graph(inst, Regime.RDB)

    pairs = placement_relevant_pairs(graph, selected)
    edge_attacks: list[frozenset[int]] = []
    levels: list[tuple[tuple[int, Fraction], ...]] = []
    for t in range(inst.horizon):
        caps = inst.period_caps(t)
        census = certificate_attack_census(inst, pairs, t)
        ranked = sorted(census, key=lambda eid: (-census[eid], eid))
        chosen = frozenset(ranked[: inst.gamma_e])
        edge_attacks.append(chosen)
        levels.append(tuple(sorted((eid, caps[eid]) for eid in chosen)))
    return Scenario(
        node_attacks=attacked,
        edge_attacks=tuple(edge_attacks),
        deviation_levels=tuple(levels),
    )
