"""End-to-end solution pipelines.

Monolithic pipelines (one master solve each):

* ``solve_dwc`` - every parameter at its upper bound;
* ``solve_rsb`` - static budgets on both sides, full edge deviations;
* ``solve_rdb`` - per-period edge caps, worst period, static node budget.

Scalable pipelines for the dynamic setting (all operate on the worst-period
communication graph and agree with ``solve_rdb`` on the optimum):

* ``solve_ccg``     - master over a growing worst-case scenario pool,
                      adversarial separation subproblem;
* ``solve_benders`` - master placement problem under accumulated
                      feasibility cuts, connectivity/domination subproblem;
* ``solve_iro``     - alternates graph rebuilds under emphasized deviations
                      with static master solves until the adversarial value
                      stabilizes.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .adversary import (
    certificate_attack_census,
    placement_relevant_pairs,
    worst_case_node_cost,
    worst_case_scenario,
)
from .bitsets import component, lowest_bit, mask_of
from .core import (
    CutFeasibility,
    check_deadline,
    Placement,
    PoolMaxCost,
    TopGammaCost,
    WarmStart,
    minimize_over_cuts,
    preprocess,
    solve_rlp_exact,
    verify_placement,
)
from .errors import InvalidArgumentError, NonConvergenceError
from .instance import NetworkInstance, Scenario
from .shortest_paths import (
    Regime,
    TransformedGraph,
    build_transformed_graph,
    distance_matrix_at,
    graph_from_matrix,
    robust_path_certificate,
    _worst_period_rows_scaled,
)


@dataclass(frozen=True)
class IterationRecord:
    k: int
    lower: Fraction | None
    upper: Fraction | None
    placement_digest: str


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one solve: objective, bounds, and per-iteration trace."""

    method: str
    placement: Placement
    objective: Fraction
    iterations: int
    lower_bound: Fraction
    upper_bound: Fraction
    gap: Fraction
    scenarios_or_cuts: int
    wall_time: float
    trace: tuple[IterationRecord, ...]


@dataclass
class ScenarioPool:
    """Insertion-ordered pool of distinct adversary scenarios."""

    scenarios: list[Scenario]

    def __init__(self):
        self.scenarios = []
        self._seen: set[Scenario] = set()

    def add(self, scenario: Scenario) -> bool:
        if scenario in self._seen:
            return False
        self._seen.add(scenario)
        self.scenarios.append(scenario)
        return True

    def __len__(self) -> int:
        return len(self.scenarios)


def _digest(selected: Iterable[int]) -> str:
    text = ",".join(str(v) for v in sorted(selected))
    return hashlib.sha1(text.encode()).hexdigest()[:12]


def _node_cost_model(inst: NetworkInstance) -> TopGammaCost:
    return TopGammaCost(
        base=inst.node_costs(), dev=inst.node_deviations(), gamma=inst.gamma_v
    )


def _report(method, placement, iterations, lower, upper, cuts, started, trace):
    return SolveReport(
        method=method,
        placement=placement,
        objective=placement.objective,
        iterations=iterations,
        lower_bound=lower,
        upper_bound=upper,
        gap=upper - lower,
        scenarios_or_cuts=cuts,
        wall_time=time.perf_counter() - started,
        trace=tuple(trace),
    )


def _shortcut(method, graph: TransformedGraph, complete_shortcut: bool, started):
    """Complete M means every pair already communicates; with the shortcut
    enabled no regenerator is needed at all."""
    if complete_shortcut and graph.is_complete():
        empty = Placement(selected=frozenset(), objective=Fraction(0))
        record = IterationRecord(k=1, lower=Fraction(0), upper=Fraction(0), placement_digest=_digest(()))
        return _report(method, empty, 1, Fraction(0), Fraction(0), 0, started, [record])
    return None


def _single_master(method, inst, regime, cost, complete_shortcut, deadline):
    started = time.perf_counter()
    check_deadline(deadline)
    graph = build_transformed_graph(inst, regime)
    check_deadline(deadline)
    short = _shortcut(method, graph, complete_shortcut, started)
    if short is not None:
        return short
    placement = solve_rlp_exact(graph, cost, preprocess(graph), deadline)
    record = IterationRecord(
        k=1,
        lower=placement.objective,
        upper=placement.objective,
        placement_digest=_digest(placement.selected),
    )
    return _report(
        method, placement, 1, placement.objective, placement.objective, 0, started, [record]
    )


def solve_dwc(
    inst: NetworkInstance,
    *,
    complete_shortcut: bool = False,
    deadline: float | None = None,
) -> SolveReport:
    """Deterministic worst case: all lengths and costs at their upper bounds.

    Ignores both adversary budgets entirely.
    """
    upper_cost = TopGammaCost(
        base=tuple(
            nd.nominal_cost + nd.max_deviation for nd in inst.nodes
        ),
        dev=tuple(Fraction(0) for _ in inst.nodes),
        gamma=0,
    )
    return _single_master("DWC", inst, Regime.DWC, upper_cost, complete_shortcut, deadline)


def solve_rsb(
    inst: NetworkInstance,
    *,
    complete_shortcut: bool = False,
    deadline: float | None = None,
) -> SolveReport:
    """Static budgets: full edge deviations for the graph, worst-case node cost."""
    return _single_master(
        "RSB", inst, Regime.RSB, _node_cost_model(inst), complete_shortcut, deadline
    )


def solve_rdb(
    inst: NetworkInstance,
    *,
    complete_shortcut: bool = False,
    deadline: float | None = None,
) -> SolveReport:
    """Dynamic edge budgets (worst period) with the static node-cost master."""
    return _single_master(
        "RDB", inst, Regime.RDB, _node_cost_model(inst), complete_shortcut, deadline
    )


# ---------------------------------------------------------------------------
# Column-and-constraint generation


def solve_ccg(
    inst: NetworkInstance,
    epsilon: Fraction | int = 0,
    *,
    complete_shortcut: bool = False,
    deadline: float | None = None,
) -> SolveReport:
    """Master over a growing scenario pool plus adversarial separation.

    The master minimizes the worst cost over pooled scenarios (nominal cost
    while the pool is empty); the subproblem is the exact cost adversary.
    The pool is seeded with the valid scenario attacking the globally
    largest deviations, which prices the riskiest nodes before the first
    master solve.  Terminates once the duality gap between the master's
    lower bound and the incumbent's adversarial value is at most
    ``epsilon``; with the default 0 the incumbent is exactly optimal.
    ``scenarios_or_cuts`` counts the scenarios produced by separation.
    """
    epsilon = Fraction(epsilon)
    if epsilon < 0:
        raise InvalidArgumentError(f"epsilon must be nonnegative, got {epsilon}")
    started = time.perf_counter()
    check_deadline(deadline)
    graph = build_transformed_graph(inst, Regime.RDB)
    short = _shortcut("CCG", graph, complete_shortcut, started)
    if short is not None:
        return short
    warm = preprocess(graph)
    costs = inst.node_costs()
    devs = inst.node_deviations()
    pool = ScenarioPool()
    rows: list[tuple[Fraction, ...]] = []
    if inst.gamma_v > 0:
        # Seed the pool with a deviation-rank partition: every node's
        # deviation is priced by some valid scenario before the first master
        # solve, so the master cannot dodge the adversary entirely.
        ranked = sorted(range(inst.n), key=lambda v: (-devs[v], v))
        for start in range(0, inst.n, inst.gamma_v):
            seed_attack = frozenset(ranked[start : start + inst.gamma_v])
            pool.add(
                Scenario(
                    node_attacks=seed_attack,
                    edge_attacks=(frozenset(),) * inst.horizon,
                    deviation_levels=((),) * inst.horizon,
                )
            )
            rows.append(
                tuple(
                    costs[v] + (devs[v] if v in seed_attack else Fraction(0))
                    for v in range(inst.n)
                )
            )
    seeded = len(pool)
    trace: list[IterationRecord] = []
    iterations = 0
    incumbent: Placement | None = None
    upper: Fraction | None = None
    while True:
        iterations += 1
        check_deadline(deadline)
        cost = PoolMaxCost(rows=tuple(rows) if rows else (costs,))
        placement = solve_rlp_exact(graph, cost, warm, deadline)
        lower = placement.objective
        worst = worst_case_node_cost(placement.selected, inst)
        if upper is None or worst.total < upper:
            upper = worst.total
            incumbent = Placement(selected=placement.selected, objective=worst.total)
        trace.append(
            IterationRecord(
                k=iterations,
                lower=lower,
                upper=upper,
                placement_digest=_digest(placement.selected),
            )
        )
        # Duality-gap termination: the master value bounds the optimum from
        # below, the incumbent's adversarial value from above.
        if upper - lower <= epsilon:
            assert incumbent is not None
            return _report(
                "CCG",
                incumbent,
                iterations,
                lower,
                upper,
                len(pool) - seeded,
                started,
                trace,
            )
        scenario = worst_case_scenario(placement.selected, inst, graph=graph)
        if not pool.add(scenario):
            raise NonConvergenceError("scenario repeated without progress")
        # Attacking an unselected node leaves the adversary's value
        # unchanged, so padding the attack set up to the budget with the
        # largest remaining deviations is still an optimal response and
        # makes the pooled row bind against future placements too.
        attack = set(scenario.node_attacks)
        if len(attack) < inst.gamma_v:
            spare = sorted(
                (v for v in range(inst.n) if v not in attack),
                key=lambda v: (-devs[v], v),
            )
            attack.update(spare[: inst.gamma_v - len(attack)])
        rows.append(
            tuple(
                costs[v] + (devs[v] if v in attack else Fraction(0))
                for v in range(inst.n)
            )
        )
        if len(pool) > 1 << inst.n:
            raise NonConvergenceError("scenario pool exceeded its safety cap")


# ---------------------------------------------------------------------------
# Benders decomposition


def solve_benders(
    inst: NetworkInstance,
    epsilon: Fraction | int = 0,
    *,
    complete_shortcut: bool = False,
    deadline: float | None = None,
) -> SolveReport:
    """Feasibility decomposition: the master picks the cheapest worst-case
    placement covering every closed neighborhood (the domination rows are
    master structure, known upfront); the subproblem verifies domination
    plus induced connectivity on M and returns violated cuts.

    Cuts are witness-based: an undominated node contributes its closed
    neighborhood as a covering cut (only reachable if the master rows were
    bypassed) and each disconnected component contributes a node-separator
    cut.  Both exclude the current placement, so the loop is finite, and
    both hold for every feasible placement, so the first verified master
    solution is optimal.  The subproblem carries no cost term, hence the
    master objective is the reported objective.
    """
    epsilon = Fraction(epsilon)
    if epsilon < 0:
        raise InvalidArgumentError(f"epsilon must be nonnegative, got {epsilon}")
    started = time.perf_counter()
    check_deadline(deadline)
    graph = build_transformed_graph(inst, Regime.RDB)
    short = _shortcut("BDC", graph, complete_shortcut, started)
    if short is not None:
        return short
    warm = preprocess(graph)
    cost = _node_cost_model(inst)
    feas = CutFeasibility(
        inst.n,
        cover_masks=[(1 << v) | graph.adjacency[v] for v in range(inst.n)],
    )
    structural = len(feas.cover_masks)
    trace: list[IterationRecord] = []
    iterations = 0
    while True:
        iterations += 1
        check_deadline(deadline)
        placement = minimize_over_cuts(
            inst.n, cost, feas, mandatory=warm.mandatory, deadline=deadline
        )
        ok, _ = verify_placement(graph, placement.selected)
        trace.append(
            IterationRecord(
                k=iterations,
                lower=placement.objective,
                upper=placement.objective if ok else None,
                placement_digest=_digest(placement.selected),
            )
        )
        if ok:
            return _report(
                "BDC",
                placement,
                iterations,
                placement.objective,
                placement.objective,
                len(feas.cover_masks) + len(feas.region_cuts) - structural,
                started,
                trace,
            )
        _add_witness_cuts(graph, placement.selected, feas)
        if len(feas.cover_masks) + len(feas.region_cuts) > 1 << inst.n:
            raise NonConvergenceError("cut pool exceeded its safety cap")


def _add_witness_cuts(graph: TransformedGraph, selected, feas: CutFeasibility) -> None:
    mask = mask_of(selected)
    full = (1 << graph.n) - 1
    undominated = []
    m = full & ~mask
    while m:
        low = m & -m
        v = low.bit_length() - 1
        if graph.adjacency[v] & mask == 0:
            undominated.append(v)
        m ^= low
    for v in undominated:
        feas.cover_masks.append((1 << v) | graph.adjacency[v])
    if mask:
        remaining = mask
        components = []
        while remaining:
            comp = component(graph.adjacency, lowest_bit(remaining), mask)
            components.append(comp)
            remaining &= ~comp
        if len(components) > 1:
            for comp in components:
                neighborhood = 0
                c = comp
                while c:
                    low = c & -c
                    neighborhood |= graph.adjacency[low.bit_length() - 1]
                    c ^= low
                feas.region_cuts.append((comp, neighborhood & ~comp))


# ---------------------------------------------------------------------------
# Iterative robust optimization


def solve_iro(
    inst: NetworkInstance,
    epsilon: Fraction = Fraction(1, 10**6),
    *,
    max_iter: int = 50,
    complete_shortcut: bool = False,
    deadline: float | None = None,
) -> SolveReport:
    """Alternate graph rebuilds and static master solves.

    The first pass is the full dynamic solve (every deviation at its period
    cap).  Afterwards the deviation emphasis is rebuilt from the adversary's
    responses: edges attacked against any placement so far stay pinned at
    their caps, all others drop to zero, which opens optimistic graphs that
    can only be kept if they survive the true worst-period distances.  The
    per-iteration value Z is the adversary's response to the placement,
    defined only when the placement survives the true worst-period graph;
    the loop stops once the relative change between consecutive defined Z
    values drops to ``epsilon`` (absolute change if the previous Z is 0).
    If no defined Z stabilizes within ``max_iter``, a final full-cap solve
    supplies the answer.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon}")
    started = time.perf_counter()
    caps = [inst.period_caps(t) for t in range(inst.horizon)]
    cost = _node_cost_model(inst)
    pinned: set[tuple[int, int]] = set()
    trace: list[IterationRecord] = []
    prev_z: Fraction | None = None
    latest: tuple[Placement, Fraction] | None = None
    iterations = 0
    converged = False
    shortcut_report = None
    zero = Fraction(0)
    while iterations < max_iter:
        iterations += 1
        check_deadline(deadline)
        if iterations == 1:
            devs_k = [list(caps[t]) for t in range(inst.horizon)]
        else:
            devs_k = [
                [caps[t][e] if (e, t) in pinned else zero for e in range(inst.m)]
                for t in range(inst.horizon)
            ]
        matrix = distance_matrix_at(inst, devs_k, inst.gamma_e)
        graph_k = graph_from_matrix(inst, matrix, Regime.RDB)
        if iterations == 1:
            shortcut_report = _shortcut("IRO", graph_k, complete_shortcut, started)
            if shortcut_report is not None:
                return shortcut_report
        placement = solve_rlp_exact(graph_k, cost, preprocess(graph_k), deadline)
        ok, fail_pairs = _survives_worst_period(inst, placement.selected)
        z = placement.objective if ok else None
        if ok:
            latest = (placement, placement.objective)
        trace.append(
            IterationRecord(
                k=iterations,
                lower=None,
                upper=z,
                placement_digest=_digest(placement.selected),
            )
        )
        if z is not None and prev_z is not None:
            delta = abs(z - prev_z)
            if (delta <= epsilon if prev_z == 0 else delta / prev_z <= epsilon):
                converged = True
                break
        if z is not None:
            prev_z = z
        new_pins = _emphasis_update(inst, placement.selected, graph_k, devs_k, fail_pairs)
        if new_pins <= pinned and not ok:
            break  # stalled while infeasible: fall through to the rescue solve
        pinned |= new_pins
    if converged and latest is not None:
        placement, z = latest
    else:
        # Rescue: one full-cap solve guarantees a certified answer.
        iterations += 1
        rescue = solve_rdb(inst, complete_shortcut=complete_shortcut, deadline=deadline)
        placement = rescue.placement
        z = rescue.objective
        trace.append(
            IterationRecord(
                k=iterations, lower=z, upper=z, placement_digest=_digest(placement.selected)
            )
        )
    final = Placement(selected=placement.selected, objective=z)
    return _report("IRO", final, iterations, z, z, len(pinned), started, trace)


def _survives_worst_period(inst: NetworkInstance, selected) -> tuple[bool, list]:
    """Check a placement against the true worst-period distances.

    Only rows from the selected nodes are needed: domination asks the
    distance of every outside node to its best selected neighbor, and
    connectivity only concerns selected pairs.
    """
    sel = sorted(selected)
    if not sel:
        return False, [(0, 0)]
    caps = [inst.period_caps(t) for t in range(inst.horizon)]
    scale, rows = _worst_period_rows_scaled(inst, caps, inst.gamma_e, sources=sel)
    limit_num = inst.d_max.numerator * scale
    limit_den = inst.d_max.denominator

    def within(i: int, v: int) -> bool:
        return rows[i][v] is not None and rows[i][v] * limit_den <= limit_num

    fail: list[tuple[int, int]] = []
    index = {v: i for i, v in enumerate(sel)}
    sel_set = set(sel)
    for v in range(inst.n):
        if v in sel_set:
            continue
        candidates = [u for u in sel if within(index[u], v)]
        if not candidates:
            nearest = min(
                sel,
                key=lambda u: (rows[index[u]][v] is None, rows[index[u]][v] or 0),
            )
            fail.append((min(v, nearest), max(v, nearest)))
    adjacency = [0] * inst.n
    for i, u in enumerate(sel):
        for v in sel:
            if v != u and within(i, v):
                adjacency[u] |= 1 << v
    mask = mask_of(sel)
    comp = component(adjacency, sel[0], mask)
    if comp != mask:
        fail.append((lowest_bit(comp), lowest_bit(mask & ~comp)))
    return not fail, fail


def _emphasis_update(inst, selected, graph_k, devs_k, fail_pairs) -> set[tuple[int, int]]:
    """Edge-period pairs to pin at their caps for the next rebuild.

    The emphasis is an availability vector, not a budgeted attack, so every
    edge any certificate attacks gets pinned, across all connections the
    placement relies on plus the paths currently certifying failing pairs.
    """
    pins: set[tuple[int, int]] = set()
    pairs = placement_relevant_pairs(graph_k, selected)
    for t in range(inst.horizon):
        census = certificate_attack_census(inst, pairs, t)
        pins.update((e, t) for e in census)
    for p, q in fail_pairs:
        for t in range(inst.horizon):
            cert = robust_path_certificate(inst, p, q, inst.gamma_e, devs_k[t])
            if cert is None:
                continue
            caps_t = inst.period_caps(t)
            path_edges = _path_edge_ids(inst, cert.path)
            ranked = sorted(path_edges, key=lambda e: (-caps_t[e], e))
            pins.update(
                (e, t) for e in ranked[: inst.gamma_e] if caps_t[e] > 0
            )
    return pins


def _path_edge_ids(inst: NetworkInstance, path: tuple[int, ...]) -> list[int]:
    lookup = {e.endpoints: i for i, e in enumerate(inst.edges)}
    out = []
    for a, b in zip(path, path[1:]):
        out.append(lookup[(a, b) if a < b else (b, a)])
    return out
