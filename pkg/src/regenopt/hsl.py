"""Adversarial hide-and-seek game between a placement planner (seeker) and a
deviation-steering adversary (hider).

The hider owns one deviation level per edge and period, always inside
``[0, max_deviation]``; the seeker best-responds with an exact placement
solve on the communication graph induced by the current deviations (an edge
must survive every period, i.e. the worst period decides).  The hider then
moves each deviation along a sensitivity estimate of the seeker's cost,
projected back into the feasible range.  Deviations start at the instance's
realized period caps, so the first seeker response equals the worst-period
robust solution and later rounds can only become more conservative.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping

from .core import Placement, check_deadline, preprocess, solve_rlp_exact
from .errors import GameInfeasibleError, InfeasibleInstanceError, InvalidArgumentError
from .instance import NetworkInstance
from .methods import IterationRecord, SolveReport, _digest, _node_cost_model, _report
from .shortest_paths import (
    Regime,
    RobustDistanceMatrix,
    TransformedGraph,
    graph_from_matrix,
    robust_path_certificate,
    _robust_rows_scaled,
)


@dataclass(frozen=True)
class GameState:
    """One game round: deviation levels, last placement, loss history."""

    k: int
    deviations: tuple[tuple[Fraction, ...], ...]  # [edge][period]
    placement: Placement | None
    eta_d: Fraction
    loss_history: tuple[Fraction, ...]


def initial_state(inst: NetworkInstance, eta_d) -> GameState:
    eta = Fraction(eta_d)
    if eta <= 0:
        raise InvalidArgumentError(f"eta_d must be positive, got {eta_d}")
    return GameState(
        k=0,
        deviations=tuple(e.period_caps for e in inst.edges),
        placement=None,
        eta_d=eta,
        loss_history=(),
    )


def updated_deviation(value: Fraction, sensitivity: Fraction, eta: Fraction, cap: Fraction) -> Fraction:
    """Gradient-style move projected back into [0, cap]."""
    moved = value + eta * sensitivity
    if moved < 0:
        return Fraction(0)
    if moved > cap:
        return cap
    return moved


# ---------------------------------------------------------------------------
# Per-period distance cache (probing one (edge, period) only recomputes that
# period's rows)


def _per_period(state: GameState) -> list[list[Fraction]]:
    periods = len(state.deviations[0]) if state.deviations else 0
    return [[devs[t] for devs in state.deviations] for t in range(periods)]


def _fold_worst(
    per_period_rows: list[tuple[int, list[list[int | None]]]]
) -> tuple[int, list[list[int | None]]]:
    merged_scale = 1
    for scale, _ in per_period_rows:
        merged_scale = merged_scale * scale // math.gcd(merged_scale, scale)
    out: list[list[int | None]] | None = None
    for scale, rows in per_period_rows:
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


def _graph_at(
    inst: NetworkInstance, per_period_rows: list[tuple[int, list[list[int]]]]
) -> TransformedGraph:
    scale, rows = _fold_worst(per_period_rows)
    matrix = RobustDistanceMatrix(
        regime=Regime.RDB, scale=scale, rows=tuple(tuple(r) for r in rows)
    )
    try:
        return graph_from_matrix(inst, matrix, Regime.RDB)
    except InfeasibleInstanceError as exc:
        raise GameInfeasibleError(str(exc)) from exc


def _period_rows(inst: NetworkInstance, devs: list[Fraction]) -> tuple[int, list[list[int]]]:
    return _robust_rows_scaled(inst, inst.edge_lengths(), devs, inst.gamma_e)


def _solve_seeker(inst, graph, deadline=None) -> Placement:
    return solve_rlp_exact(graph, _node_cost_model(inst), preprocess(graph), deadline)


# ---------------------------------------------------------------------------
# Public operations


def seeker_step(
    state: GameState, inst: NetworkInstance, deadline: float | None = None
) -> Placement:
    """Best response of the planner at the current deviation levels.

    The loss depends on the period only through the connectivity
    constraints, so the expectation over periods collapses into this single
    worst-case solve.
    """
    rows = [_period_rows(inst, devs) for devs in _per_period(state)]
    graph = _graph_at(inst, rows)
    return _solve_seeker(inst, graph, deadline)


def estimate_sensitivity(
    state: GameState,
    inst: NetworkInstance,
    edge: int,
    period: int,
    *,
    _cache: dict | None = None,
) -> Fraction:
    """Surrogate for the marginal effect of one deviation on the seeker cost.

    Finite difference between the current optimum and the optimum with this
    one deviation raised to its cap; 0 when the deviation has no room.  When
    the cost does not move, falls back to the fraction of period-``period``
    certification paths that traverse the edge (a criticality score in
    [0, 1], zero for edges on no certification path).  Values are floored to
    the 1/1000 grid so deviation denominators stay bounded over the game.
    """
    cap = inst.edges[edge].max_deviation
    current = state.deviations[edge][period]
    if current == cap:
        return Fraction(0)
    cache = _cache if _cache is not None else _build_probe_cache(state, inst)
    devs_t = list(cache["per_period"][period])
    devs_t[edge] = cap
    probe_rows = list(cache["rows"])
    probe_rows[period] = _period_rows(inst, devs_t)
    if probe_rows[period][1] == cache["rows"][period][1]:
        # The bump moved no distance, so the graph and the optimum stand.
        return _snap(_criticality(state, inst, edge, period, cache))
    try:
        graph = _graph_at(inst, probe_rows)
    except GameInfeasibleError:
        return Fraction(1)  # the bump alone severs the network: maximal leverage
    if graph.adjacency == cache["graph"].adjacency:
        # Same communication graph, same feasible family, same cost.
        return _snap(_criticality(state, inst, edge, period, cache))
    z_cap = _solve_seeker(inst, graph).objective
    z_cur = cache["objective"]
    if z_cap != z_cur:
        return _snap((z_cap - z_cur) / (cap - current))
    return _snap(_criticality(state, inst, edge, period, cache))


def _snap(value: Fraction) -> Fraction:
    """Floor onto the 1/1000 grid (sensitivities are never negative)."""
    return Fraction(value.numerator * 1000 // value.denominator, 1000)


def _build_probe_cache(state: GameState, inst: NetworkInstance, deadline=None) -> dict:
    per_period = _per_period(state)
    rows = [_period_rows(inst, devs) for devs in per_period]
    graph = _graph_at(inst, rows)
    placement = _solve_seeker(inst, graph, deadline)
    return {
        "per_period": per_period,
        "rows": rows,
        "graph": graph,
        "placement": placement,
        "objective": placement.objective,
        "paths": {},
    }


def _criticality(state, inst, edge, period, cache) -> Fraction:
    if period not in cache["paths"]:
        graph = cache["graph"]
        devs_t = cache["per_period"][period]
        lookup = {e.endpoints: i for i, e in enumerate(inst.edges)}
        traversed: list[set[int]] = []
        for p in range(inst.n):
            for q in range(p + 1, inst.n):
                if not graph.has_edge(p, q):
                    continue
                cert = robust_path_certificate(inst, p, q, inst.gamma_e, devs_t)
                if cert is None:
                    continue
                edges_on_path = {
                    lookup[(a, b) if a < b else (b, a)]
                    for a, b in zip(cert.path, cert.path[1:])
                }
                traversed.append(edges_on_path)
        cache["paths"][period] = traversed
    traversed = cache["paths"][period]
    if not traversed:
        return Fraction(0)
    hits = sum(1 for edges_on_path in traversed if edge in edges_on_path)
    return Fraction(hits, len(traversed))


def hider_step(
    state: GameState,
    inst: NetworkInstance,
    sensitivities: Mapping[tuple[int, int], Fraction],
) -> GameState:
    """Move every deviation along its sensitivity, projected into [0, cap].

    Edge lengths need no separate refresh: the robust computations read the
    deviation levels directly.
    """
    new_devs = []
    for e, edge in enumerate(inst.edges):
        row = []
        for t, value in enumerate(state.deviations[e]):
            s = sensitivities.get((e, t), Fraction(0))
            row.append(updated_deviation(value, Fraction(s), state.eta_d, edge.max_deviation))
        new_devs.append(tuple(row))
    return replace(state, k=state.k + 1, deviations=tuple(new_devs))


def play_hsl(
    inst: NetworkInstance,
    eta_d=Fraction(3, 20),
    epsilon: Fraction = Fraction(1, 10**6),
    max_iter: int = 10,
    *,
    deadline: float | None = None,
    observer=None,
) -> SolveReport:
    """Run the game until the seeker loss stabilizes (or ``max_iter``).

    Reports the final placement, its worst-case cost as the objective, and
    the count of deviation entries the hider moved away from their starting
    levels.  ``observer``, when given, receives one dict per round with the
    loss, placement, and the deviations the hider changed afterwards.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon}")
    if max_iter < 1:
        raise InvalidArgumentError(f"max_iter must be at least 1, got {max_iter}")
    started = time.perf_counter()
    state = initial_state(inst, eta_d)
    trace: list[IterationRecord] = []
    placement: Placement | None = None
    for k in range(1, max_iter + 1):
        check_deadline(deadline)
        cache = _build_probe_cache(state, inst, deadline)
        placement = cache["placement"]
        loss = placement.objective
        state = replace(
            state,
            k=k,
            placement=placement,
            loss_history=state.loss_history + (loss,),
        )
        trace.append(
            IterationRecord(k=k, lower=None, upper=loss, placement_digest=_digest(placement.selected))
        )
        history = state.loss_history
        stop = (len(history) >= 2 and abs(history[-1] - history[-2]) < epsilon) or k == max_iter
        if stop:
            if observer is not None:
                observer({"k": k, "loss": loss, "placement": sorted(placement.selected), "changed": []})
            break
        sensitivities = {
            (e, t): estimate_sensitivity(state, inst, e, t, _cache=cache)
            for e in range(inst.m)
            for t in range(inst.horizon)
        }
        moved_state = hider_step(state, inst, sensitivities)
        if observer is not None:
            changed = [
                {"edge": e, "period": t, "value": str(moved_state.deviations[e][t])}
                for e in range(inst.m)
                for t in range(inst.horizon)
                if moved_state.deviations[e][t] != state.deviations[e][t]
            ]
            observer({"k": k, "loss": loss, "placement": sorted(placement.selected), "changed": changed})
        state = moved_state
    assert placement is not None
    moved = sum(
        1
        for e, edge in enumerate(inst.edges)
        for t in range(inst.horizon)
        if state.deviations[e][t] != edge.period_caps[t]
    )
    final_loss = state.loss_history[-1]
    final = Placement(selected=placement.selected, objective=final_loss)
    return _report(
        "HSL",
        final,
        len(state.loss_history),
        final_loss,
        final_loss,
        moved,
        started,
        trace,
    )
