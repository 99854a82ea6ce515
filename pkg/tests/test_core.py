"""Exact placement solver against the exhaustive oracle."""

import itertools
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regenopt import (
    Regime,
    brute_force_rlp,
    build_instance,
    build_transformed_graph,
    generate_instance,
    preprocess,
    solve_rlp_exact,
    verify_placement,
    worst_case_node_cost,
)
from regenopt.bitsets import lex_less
from regenopt.core import TopGammaCost
from regenopt.errors import InvalidArgumentError

from conftest import nx_feasible, nx_graph_of, path_instance


def _graph_of(inst, regime=Regime.DWC):
    return build_transformed_graph(inst, regime)


def _unit_cost(n):
    return TopGammaCost(base=(Fraction(1),) * n, dev=(Fraction(0),) * n, gamma=0)


@pytest.fixture
def path3():
    return _graph_of(path_instance([1, 1, 1], [0, 0, 0], [600, 600]))


def test_preprocess_path_marks_middle(path3):
    assert preprocess(path3).mandatory == frozenset({1})


def test_preprocess_star_marks_center():
    inst = build_instance(
        [1] * 5,
        [0] * 5,
        [(0, i, 400, 0, [0]) for i in range(1, 5)],
        d_max=450,
        gamma_e=0,
        gamma_v=0,
        horizon=1,
    )
    assert preprocess(_graph_of(inst)).mandatory == frozenset({0})


def test_preprocess_cycle_is_empty():
    inst = build_instance(
        [1] * 5,
        [0] * 5,
        [(i, (i + 1) % 5, 600, 0, [0]) for i in range(5)],
        d_max=700,
        gamma_e=0,
        gamma_v=0,
        horizon=1,
    )
    assert preprocess(_graph_of(inst)).mandatory == frozenset()


def test_preprocess_degenerate_graph():
    inst = path_instance([1, 1], [0, 0], [5], d_max=10)
    assert preprocess(_graph_of(inst)).mandatory == frozenset()


def test_verify_placement_on_path(path3):
    assert verify_placement(path3, {1}).ok
    bad = verify_placement(path3, {0, 2})
    assert not bad.ok
    assert bad.witness == ("disconnected", (0, 2))
    assert verify_placement(path3, {0, 1, 2}).ok
    undominated = verify_placement(path3, set())
    assert not undominated.ok
    assert undominated.witness[0] == "undominated"


def test_verify_placement_restricted_pairs(path3):
    assert verify_placement(path3, {0, 1}, pairs=[(0, 1)]).ok
    assert not verify_placement(path3, {0, 1}, pairs=[(0, 2)]).ok


def test_path_unit_costs(path3):
    placement = solve_rlp_exact(path3, _unit_cost(3), preprocess(path3))
    assert placement.selected == frozenset({1})
    assert placement.objective == 1


def test_path_worst_case_costs():
    inst = path_instance([5, 5, 5], [2, 9, 2], [600, 600], gamma_v=1)
    graph = _graph_of(inst)
    cost = TopGammaCost(base=inst.node_costs(), dev=inst.node_deviations(), gamma=1)
    placement = solve_rlp_exact(graph, cost, preprocess(graph))
    assert placement.selected == frozenset({1})
    assert placement.objective == 14


def test_complete_graph_picks_cheapest_node():
    inst = build_instance(
        [1, 2, 3, 4],
        [0] * 4,
        [(u, v, 300, 0, [0]) for u in range(4) for v in range(u + 1, 4)],
        d_max=1000,
        gamma_e=0,
        gamma_v=0,
        horizon=1,
    )
    graph = _graph_of(inst)
    placement = solve_rlp_exact(graph, TopGammaCost(inst.node_costs(), inst.node_deviations(), 0))
    assert placement.selected == frozenset({0})
    assert placement.objective == 1


def test_single_edge_graph_keeps_cheaper_endpoint():
    inst = build_instance(
        [3, 7], [0, 0], [(0, 1, 5, 0, [0])], d_max=10, gamma_e=0, gamma_v=0, horizon=1
    )
    graph = _graph_of(inst)
    placement = brute_force_rlp(graph, TopGammaCost(inst.node_costs(), inst.node_deviations(), 0))
    assert placement.selected == frozenset({0})
    assert placement.objective == 3


def test_brute_force_scale_guard():
    inst = generate_instance(17, 0.5, 1000, 1, 1, 1, seed=0)
    graph = _graph_of(inst)
    with pytest.raises(InvalidArgumentError):
        brute_force_rlp(graph, _unit_cost(17))


@pytest.mark.parametrize("seed", range(150))
def test_solver_agrees_with_brute_force(seed):
    inst = generate_instance(4 + seed % 5, 0.5, 1000, seed % 3, seed % 3, 1 + seed % 3, seed=seed)
    regime = (Regime.DWC, Regime.RSB, Regime.RDB)[seed % 3]
    graph = build_transformed_graph(inst, regime)
    cost = TopGammaCost(inst.node_costs(), inst.node_deviations(), inst.gamma_v)
    exact = solve_rlp_exact(graph, cost, preprocess(graph))
    brute = brute_force_rlp(graph, cost)
    assert exact.objective == brute.objective
    assert exact.selected == brute.selected


@pytest.mark.parametrize("seed", range(40))
def test_warm_start_contained_in_every_optimum(seed):
    inst = generate_instance(4 + seed % 5, 0.5, 1000, 1, 1, 1, seed=seed)
    graph = build_transformed_graph(inst, Regime.RSB)
    if graph.n < 3:
        return
    mandatory = preprocess(graph).mandatory
    cost = TopGammaCost(inst.node_costs(), inst.node_deviations(), inst.gamma_v)
    best = brute_force_rlp(graph, cost)
    g = nx_graph_of(graph)
    for size in range(1, graph.n + 1):
        for subset in itertools.combinations(range(graph.n), size):
            if nx_feasible(g, subset) and cost(frozenset(subset)) == best.objective:
                assert mandatory <= set(subset)


def test_feasibility_is_superset_monotone():
    inst = generate_instance(7, 0.5, 1000, 1, 1, 1, seed=21)
    graph = build_transformed_graph(inst, Regime.DWC)
    full = frozenset(range(graph.n))
    assert verify_placement(graph, full).ok
    feasible = {1, *preprocess(graph).mandatory}
    if verify_placement(graph, feasible).ok:
        for v in range(graph.n):
            grown = feasible | {v}
            g = nx_graph_of(graph)
            if nx.is_connected(g.subgraph(grown)):
                assert verify_placement(graph, grown).ok


@pytest.mark.parametrize("seed", range(25))
def test_verify_matches_flow_oracle(seed):
    """Induced connectivity is exactly unit-flow feasibility between every
    selected pair (checked by max-flow), domination covers the rest."""
    inst = generate_instance(6, 0.5, 1000, 1, 1, 1, seed=seed)
    graph = build_transformed_graph(inst, Regime.DWC)
    g = nx_graph_of(graph)
    for subset_seed in range(8):
        subset = {v for v in range(6) if (subset_seed + seed) >> v & 1}
        verdict = verify_placement(graph, subset)
        dominated = all(
            v in subset or any(u in subset for u in g.neighbors(v)) for v in g.nodes
        )
        flows_ok = bool(subset)
        directed = nx.DiGraph()
        directed.add_nodes_from(subset)
        for p in subset:
            for q in subset:
                if p != q and g.has_edge(p, q):
                    directed.add_edge(p, q, capacity=1)
        for p in subset:
            for q in subset:
                if p == q:
                    continue
                value, _ = nx.maximum_flow(directed, p, q)
                if value < 1:
                    flows_ok = False
        assert verdict.ok == (dominated and flows_ok and bool(subset))


def test_tie_breaks_are_lexicographic():
    # Two symmetric optima: {0,1} and {1,2} both cost 2; expect {0,1}.
    inst = build_instance(
        [1, 1, 1, 1],
        [0] * 4,
        [
            (0, 1, 5, 0, [0]),
            (1, 2, 5, 0, [0]),
            (2, 3, 5, 0, [0]),
            (0, 3, 5, 0, [0]),
        ],
        d_max=6,
        gamma_e=0,
        gamma_v=0,
        horizon=1,
    )
    graph = _graph_of(inst)
    cost = _unit_cost(4)
    exact = solve_rlp_exact(graph, cost)
    brute = brute_force_rlp(graph, cost)
    assert exact.selected == brute.selected == frozenset({0, 1})


@given(st.lists(st.integers(min_value=0, max_value=9), max_size=6),
       st.lists(st.integers(min_value=0, max_value=9), max_size=6))
@settings(max_examples=200, deadline=None)
def test_mask_lex_order_matches_tuple_order(a, b):
    ma = sum(1 << v for v in set(a))
    mb = sum(1 << v for v in set(b))
    assert lex_less(ma, mb) == (tuple(sorted(set(a))) < tuple(sorted(set(b))))


def test_cost_models_are_monotone():
    inst = generate_instance(8, 0.5, 1000, 1, 2, 1, seed=2)
    cost = TopGammaCost(inst.node_costs(), inst.node_deviations(), 2)
    subset = frozenset({1, 4})
    for v in range(8):
        assert cost(subset | {v}) >= cost(subset)
