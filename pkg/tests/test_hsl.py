"""Adversarial game: update arithmetic, projection, and oracle brackets."""

from dataclasses import replace
from fractions import Fraction

import pytest

from regenopt import (
    Regime,
    build_transformed_graph,
    estimate_sensitivity,
    generate_instance,
    hider_step,
    play_hsl,
    seeker_step,
    solve_dwc,
    solve_rdb,
)
from regenopt.errors import InvalidArgumentError
from regenopt.hsl import initial_state, updated_deviation

from conftest import oracle_minmax


def test_update_arithmetic_is_exact():
    eta = Fraction("0.15")
    assert updated_deviation(Fraction("1.5"), Fraction("0.8"), eta, cap=Fraction(5)) == Fraction("1.62")
    assert updated_deviation(Fraction("1.2"), Fraction("0.5"), eta, cap=Fraction(5)) == Fraction("1.275")


def test_update_projects_at_boundaries():
    eta = Fraction("0.15")
    cap = Fraction("1.5")
    assert updated_deviation(cap, Fraction(2), eta, cap) == cap
    assert updated_deviation(Fraction(0), Fraction(-3), eta, cap) == 0


def test_hider_step_applies_projection(five_node):
    state = initial_state(five_node, Fraction("0.15"))
    sensitivities = {(e, t): Fraction(1) for e in range(five_node.m) for t in range(3)}
    moved = hider_step(state, five_node, sensitivities)
    for e, edge in enumerate(five_node.edges):
        for t in range(3):
            assert moved.deviations[e][t] == edge.max_deviation  # started at cap
    assert moved.k == state.k + 1


def test_hider_step_moves_interior_points(five_node):
    state = initial_state(five_node, Fraction("0.15"))
    lowered = replace(
        state,
        deviations=tuple(
            (Fraction(1, 2),) * 3 for _ in range(five_node.m)
        ),
    )
    moved = hider_step(lowered, five_node, {(2, 0): Fraction("0.8")})
    assert moved.deviations[2][0] == Fraction(1, 2) + Fraction("0.15") * Fraction("0.8")
    assert moved.deviations[2][1] == Fraction(1, 2)


def test_seeker_on_fixture_matches_worst_period_solution(five_node):
    state = initial_state(five_node, Fraction("0.15"))
    placement = seeker_step(state, five_node)
    report = solve_rdb(five_node)
    assert placement.objective == report.objective
    assert placement.selected == report.placement.selected


def test_sensitivity_zero_at_cap(five_node):
    state = initial_state(five_node, Fraction("0.15"))
    assert estimate_sensitivity(state, five_node, 0, 0) == 0


def test_sensitivity_zero_off_certification_paths(five_node):
    state = initial_state(five_node, Fraction("0.15"))
    lowered = replace(
        state,
        deviations=tuple((Fraction(0),) * 3 for _ in range(five_node.m)),
    )
    values = {
        (e, t): estimate_sensitivity(lowered, five_node, e, t)
        for e in range(five_node.m)
        for t in range(3)
    }
    assert all(v >= 0 for v in values.values())
    # Every edge of this small network lies on some certification path, so
    # instead check the documented zero case via a saturated deviation.
    assert estimate_sensitivity(state, five_node, 2, 1) == 0


def test_game_on_fixture_terminates_and_respects_bounds(five_node):
    report = play_hsl(five_node, eta_d=Fraction("0.15"), epsilon=Fraction(1, 10**6), max_iter=10)
    assert report.iterations <= 10
    graph = build_transformed_graph(five_node, Regime.RDB)
    lower = oracle_minmax(five_node, graph)
    upper = solve_dwc(five_node).objective
    assert lower <= report.objective <= upper


def test_game_stops_quickly_without_edge_budget():
    inst = generate_instance(7, 0.5, 1000, 0, 2, 2, seed=31)
    report = play_hsl(inst, eta_d=Fraction(1, 10), epsilon=Fraction(1, 10**6), max_iter=10)
    assert report.iterations <= 2


def test_zero_learning_rate_freezes_the_game(five_node):
    state = initial_state(five_node, Fraction(1))
    frozen = replace(state, eta_d=Fraction(0))
    sensitivities = {(e, t): Fraction(1) for e in range(five_node.m) for t in range(3)}
    moved = hider_step(frozen, five_node, sensitivities)
    assert moved.deviations == frozen.deviations


@pytest.mark.parametrize("seed", range(12))
def test_losses_stay_inside_oracle_bracket(seed):
    inst = generate_instance(4 + seed % 5, 0.5, 1000, 1 + seed % 2, 1 + seed % 2, 2, seed=seed)
    graph = build_transformed_graph(inst, Regime.RDB)
    lower = oracle_minmax(inst, graph)
    upper = solve_dwc(inst).objective
    report = play_hsl(inst, eta_d=Fraction(25), epsilon=Fraction(1, 10**6), max_iter=6)
    for record in report.trace:
        assert lower <= record.upper <= upper


def test_deviations_remain_projected(five_node):
    state = initial_state(five_node, Fraction(10))
    for _ in range(4):
        sensitivities = {
            (e, t): Fraction(3, 2) for e in range(five_node.m) for t in range(3)
        }
        state = hider_step(state, five_node, sensitivities)
        for e, edge in enumerate(five_node.edges):
            for t in range(3):
                assert 0 <= state.deviations[e][t] <= edge.max_deviation


def test_seeker_is_a_best_response():
    inst = generate_instance(8, 0.5, 1000, 1, 1, 2, seed=8)
    state = initial_state(inst, Fraction(1, 10))
    placement = seeker_step(state, inst)
    graph = build_transformed_graph(inst, Regime.RDB)  # caps equal the game start
    from regenopt import verify_placement, worst_case_node_cost

    selected = placement.selected
    for v in range(inst.n):
        for swap in (selected - {v}, selected | {v}):
            if swap == selected or not swap:
                continue
            if verify_placement(graph, swap).ok:
                assert worst_case_node_cost(swap, inst).total >= placement.objective


def test_relabeling_preserves_the_objective():
    inst = generate_instance(7, 0.5, 1000, 1, 1, 2, seed=17)
    perm = [3, 0, 6, 1, 5, 2, 4]
    from regenopt import build_instance

    relabeled = build_instance(
        [inst.nodes[perm.index(i)].nominal_cost for i in range(7)],
        [inst.nodes[perm.index(i)].max_deviation for i in range(7)],
        [
            (
                perm[e.endpoints[0]],
                perm[e.endpoints[1]],
                e.nominal_length,
                e.max_deviation,
                list(e.period_caps),
            )
            for e in inst.edges
        ],
        inst.d_max,
        inst.gamma_e,
        inst.gamma_v,
        inst.horizon,
    )
    a = play_hsl(inst, eta_d=Fraction(1), epsilon=Fraction(1, 10**6), max_iter=3)
    b = play_hsl(relabeled, eta_d=Fraction(1), epsilon=Fraction(1, 10**6), max_iter=3)
    assert a.objective == b.objective


def test_play_rejects_bad_parameters(five_node):
    with pytest.raises(InvalidArgumentError):
        play_hsl(five_node, eta_d=Fraction(0))
    with pytest.raises(InvalidArgumentError):
        play_hsl(five_node, epsilon=Fraction(0))
    with pytest.raises(InvalidArgumentError):
        play_hsl(five_node, max_iter=0)
