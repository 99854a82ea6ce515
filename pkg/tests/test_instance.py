"""Instance model, generator distributions, and file round-trips."""

import json
from fractions import Fraction

import pytest

from regenopt import (
    Scenario,
    build_instance,
    generate_instance,
    load_instance,
    save_instance,
)
from regenopt.errors import (
    GenerationError,
    InvalidArgumentError,
    ParseError,
    ValidationError,
)
from regenopt.instance import validate_scenario


def test_generator_respects_sampling_ranges():
    for seed in range(1000):
        inst = generate_instance(6, 0.5, 1000, 2, 2, 2, seed=seed)
        for node in inst.nodes:
            assert 250 <= node.nominal_cost <= 300
            assert 1 <= node.max_deviation <= 50
        for edge in inst.edges:
            assert 350 <= edge.nominal_length <= 600
            assert 1 <= edge.max_deviation <= 250
            assert len(edge.period_caps) == 2
            for cap in edge.period_caps:
                assert 0 <= cap <= edge.max_deviation
                assert cap.denominator in (1, 2, 4, 5, 8) or 1000 % cap.denominator == 0


def test_generator_is_deterministic():
    a = generate_instance(12, 0.3, 1000, 2, 2, 3, seed=99)
    b = generate_instance(12, 0.3, 1000, 2, 2, 3, seed=99)
    assert save_instance(a) == save_instance(b)
    assert a == b


def test_two_node_dense_graph_is_single_edge():
    inst = generate_instance(2, 1.0, 1000, 1, 1, 1, seed=5)
    assert inst.n == 2
    assert inst.m == 1


def test_generator_rejects_bad_arguments():
    with pytest.raises(InvalidArgumentError):
        generate_instance(1, 0.3, 1000, 1, 1, 1, seed=0)
    with pytest.raises(InvalidArgumentError):
        generate_instance(5, 0.0, 1000, 1, 1, 1, seed=0)
    with pytest.raises(InvalidArgumentError):
        generate_instance(5, 0.3, 0, 1, 1, 1, seed=0)


def test_generator_failure_when_no_edge_can_survive():
    # d_max below the minimum possible length: every draw loses all edges.
    with pytest.raises(GenerationError):
        generate_instance(4, 1.0, 100, 1, 1, 1, seed=0)


def test_edges_longer_than_dmax_are_dropped():
    inst = build_instance(
        [1, 1, 1],
        [0, 0, 0],
        [(0, 1, 5, 0, [0]), (1, 2, 7, 0, [0]), (0, 2, 50, 0, [0])],
        d_max=10,
        gamma_e=1,
        gamma_v=1,
        horizon=1,
    )
    assert inst.m == 2
    assert all(e.nominal_length <= 10 for e in inst.edges)


def test_dropping_edges_must_keep_connectivity():
    with pytest.raises(ValidationError):
        build_instance(
            [1, 1],
            [0, 0],
            [(0, 1, 50, 0, [0])],
            d_max=10,
            gamma_e=1,
            gamma_v=1,
            horizon=1,
        )


def test_roundtrip_identity():
    inst = generate_instance(10, 0.4, 1000, 2, 1, 3, seed=1234)
    blob = save_instance(inst)
    again = load_instance(blob)
    assert again == inst
    assert save_instance(again) == blob


def test_fixture_loads(five_node):
    assert five_node.n == 5
    assert five_node.m == 5
    assert five_node.d_max == 10
    assert five_node.edges[2].max_deviation == Fraction(3, 2)


def test_duplicate_edge_rejected(five_node):
    doc = json.loads(save_instance(five_node))
    doc["edges"].append(dict(doc["edges"][0]))
    with pytest.raises(ValidationError, match="parallel"):
        load_instance(json.dumps(doc))


def test_unknown_field_rejected(five_node):
    doc = json.loads(save_instance(five_node))
    doc["meta"]["flavor"] = "strawberry"
    with pytest.raises(ValidationError, match="flavor"):
        load_instance(json.dumps(doc))


def test_malformed_document_reports_location():
    with pytest.raises(ParseError, match="line"):
        load_instance(b'{"meta": ')


def test_period_cap_above_deviation_rejected():
    with pytest.raises(ValidationError, match="period_caps"):
        build_instance(
            [1, 1],
            [0, 0],
            [(0, 1, 5, 2, [3])],
            d_max=10,
            gamma_e=1,
            gamma_v=1,
            horizon=1,
        )


def test_scenario_budget_validation(five_node):
    ok = Scenario(
        node_attacks=frozenset({1}),
        edge_attacks=(frozenset({2}), frozenset(), frozenset({0, 3})),
        deviation_levels=(((2, Fraction(3, 2)),), (), ((0, Fraction(1)), (3, Fraction(1)))),
    )
    validate_scenario(five_node, ok)
    toomany = Scenario(
        node_attacks=frozenset({0, 1}),  # gamma_v is 1
        edge_attacks=(frozenset(), frozenset(), frozenset()),
        deviation_levels=((), (), ()),
    )
    with pytest.raises(ValidationError, match="node_attacks"):
        validate_scenario(five_node, toomany)
    overfull_period = Scenario(
        node_attacks=frozenset(),
        edge_attacks=(frozenset({0, 1, 2}), frozenset(), frozenset()),
        deviation_levels=(((0, Fraction(1)), (1, Fraction(1)), (2, Fraction(1))), (), ()),
    )
    with pytest.raises(ValidationError, match="edge_attacks"):
        validate_scenario(five_node, overfull_period)
