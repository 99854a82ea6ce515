"""Preprocessing, feasibility verification, and the exact placement solver.

On the communication graph M the placement problem is a minimum-cost
connected dominating set: the selected nodes must induce a connected
subgraph and every unselected node must have a selected neighbor.  Those two
conditions are exactly the existence of a unit flow between every selected
pair plus per-node coverage, so :func:`verify_placement` doubles as the
feasibility subproblem of the decomposition methods.

The exact solver is a depth-first branch and bound over node
inclusion/exclusion with bitmask state.  For any monotone cost function the
optimum reported is unique: minimum cost, ties broken by the
lexicographically smallest node set, so every search order returns the same
placement.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, NamedTuple, Sequence

from .bitsets import bits, component, lex_less, lowest_bit, mask_of
from .errors import InvalidArgumentError, SolveTimeout
from .shortest_paths import TransformedGraph

CostFn = Callable[[frozenset[int]], Fraction]


def check_deadline(deadline: float | None) -> None:
    if deadline is not None and time.monotonic() > deadline:
        raise SolveTimeout("solve exceeded its time limit")


@dataclass(frozen=True)
class Placement:
    """A selected node set together with its cost under the active regime."""

    selected: frozenset[int]
    objective: Fraction


@dataclass(frozen=True)
class WarmStart:
    """Nodes forced into every solution (unique neighbors of degree-1 nodes)."""

    mandatory: frozenset[int]


class VerifyResult(NamedTuple):
    ok: bool
    witness: tuple | None


# ---------------------------------------------------------------------------
# Cost models.  All pipelines use one of these two shapes; both are plain
# callables on node sets, with a fast bitmask path for the solver.


@dataclass(frozen=True)
class TopGammaCost:
    """Sum of base costs plus the ``gamma`` largest deviations selected."""

    base: tuple[Fraction, ...]
    dev: tuple[Fraction, ...]
    gamma: int

    def of_mask(self, mask: int) -> Fraction:
        total = Fraction(0)
        devs = []
        m = mask
        while m:
            low = m & -m
            v = low.bit_length() - 1
            total += self.base[v]
            devs.append(self.dev[v])
            m ^= low
        if self.gamma > 0 and devs:
            devs.sort(reverse=True)
            for d in devs[: self.gamma]:
                total += d
        return total

    def __call__(self, selected: Iterable[int]) -> Fraction:
        return self.of_mask(mask_of(selected))


@dataclass(frozen=True)
class PoolMaxCost:
    """Maximum over scenario rows of a linear node cost (CCG master)."""

    rows: tuple[tuple[Fraction, ...], ...]

    def of_mask(self, mask: int) -> Fraction:
        best = None
        for row in self.rows:
            total = Fraction(0)
            m = mask
            while m:
                low = m & -m
                total += row[low.bit_length() - 1]
                m ^= low
            if best is None or total > best:
                best = total
        return best if best is not None else Fraction(0)

    def __call__(self, selected: Iterable[int]) -> Fraction:
        return self.of_mask(mask_of(selected))


def _mask_cost(cost_fn) -> Callable[[int], Fraction]:
    if hasattr(cost_fn, "of_mask"):
        return cost_fn.of_mask
    return lambda mask: cost_fn(frozenset(bits(mask)))


# ---------------------------------------------------------------------------
# Feasibility models for the search


class CDSFeasibility:
    """Connected-dominating-set feasibility on M."""

    def __init__(self, graph: TransformedGraph):
        self.adjacency = graph.adjacency
        self.n = graph.n
        self.full = (1 << graph.n) - 1

    def leaf_ok(self, mask: int) -> bool:
        if mask == 0:
            return False
        outside = self.full & ~mask
        m = outside
        while m:
            low = m & -m
            if self.adjacency[low.bit_length() - 1] & mask == 0:
                return False
            m ^= low
        return component(self.adjacency, lowest_bit(mask), mask) == mask

    def dead_end(self, in_mask: int, out_mask: int) -> bool:
        avail = self.full & ~out_mask
        m = out_mask
        while m:
            low = m & -m
            if self.adjacency[low.bit_length() - 1] & avail == 0:
                return True  # this excluded node can never be dominated
            m ^= low
        if in_mask:
            comp = component(self.adjacency, lowest_bit(in_mask), avail)
            if in_mask & ~comp:
                return True  # included nodes cannot be reconnected
        return False


class CutFeasibility:
    """Feasibility given only accumulated cuts (decomposition master).

    ``cover_masks`` demand a nonempty intersection.  ``region_cuts`` are
    pairs (inside_mask, separator_mask) where the separator is the full
    neighborhood of the inside region: any connected placement selecting
    nodes both inside and beyond the region must select a separator node,
    so the cut is valid for every feasible placement.
    """

    def __init__(
        self,
        n: int,
        cover_masks: Sequence[int] = (),
        region_cuts: Sequence[tuple[int, int]] = (),
    ):
        self.full = (1 << n) - 1
        self.cover_masks = list(cover_masks)
        self.region_cuts = list(region_cuts)

    def leaf_ok(self, mask: int) -> bool:
        for cm in self.cover_masks:
            if cm & mask == 0:
                return False
        for inside, sep in self.region_cuts:
            outside = self.full & ~(inside | sep)
            if mask & inside and mask & outside and sep & mask == 0:
                return False
        return True

    def dead_end(self, in_mask: int, out_mask: int) -> bool:
        avail = self.full & ~out_mask
        for cm in self.cover_masks:
            if cm & avail == 0:
                return True
        for inside, sep in self.region_cuts:
            outside = self.full & ~(inside | sep)
            if in_mask & inside and in_mask & outside and sep & avail == 0:
                return True
        return False


# ---------------------------------------------------------------------------
# Public operations


def preprocess(graph: TransformedGraph) -> WarmStart:
    """Warm start: the unique neighbor of every degree-1 node of M.

    Any such neighbor belongs to every feasible placement (for n >= 3), so
    the solver may fix it upfront.  Degenerate graphs (n < 3) yield an empty
    warm start.
    """
    if graph.n < 3:
        return WarmStart(mandatory=frozenset())
    mandatory = set()
    for v in range(graph.n):
        if graph.degree(v) == 1:
            mandatory.add(lowest_bit(graph.adjacency[v]))
    return WarmStart(mandatory=frozenset(mandatory))


def verify_placement(
    graph: TransformedGraph,
    placement: Iterable[int],
    pairs: Iterable[tuple[int, int]] | None = None,
) -> VerifyResult:
    """Check domination plus induced connectivity.

    Every node outside the placement must have a selected neighbor, and the
    selected nodes must be pairwise connected inside the induced subgraph
    (equivalently: a unit flow exists between every selected pair).  With
    ``pairs`` given, connectivity is checked for those pairs only.  On
    failure the witness is ``("undominated", v)`` or
    ``("disconnected", (p, q))``.
    """
    mask = mask_of(placement)
    full = (1 << graph.n) - 1
    m = full & ~mask
    while m:
        low = m & -m
        v = low.bit_length() - 1
        if graph.adjacency[v] & mask == 0:
            return VerifyResult(False, ("undominated", v))
        m ^= low
    if pairs is None:
        if mask:
            comp = component(graph.adjacency, lowest_bit(mask), mask)
            if comp != mask:
                return VerifyResult(
                    False,
                    ("disconnected", (lowest_bit(mask), lowest_bit(mask & ~comp))),
                )
    else:
        for p, q in sorted(pairs):
            if not (mask >> p & 1 and mask >> q & 1):
                return VerifyResult(False, ("disconnected", (p, q)))
            if not component(graph.adjacency, p, mask) >> q & 1:
                return VerifyResult(False, ("disconnected", (p, q)))
    return VerifyResult(True, None)


def solve_rlp_exact(
    graph: TransformedGraph,
    cost_fn: CostFn,
    warm: WarmStart | None = None,
    deadline: float | None = None,
) -> Placement:
    """Minimum-cost feasible placement on M (exact).

    Requires a monotone cost function (adding a node never decreases cost).
    Deterministic: among minimum-cost feasible sets the lexicographically
    smallest is returned.
    """
    mandatory = mask_of(warm.mandatory) if warm is not None else 0
    feas = CDSFeasibility(graph)
    return _search(graph.n, mandatory, _mask_cost(cost_fn), feas, deadline)


def minimize_over_cuts(
    n: int,
    cost_fn: CostFn,
    feas: CutFeasibility,
    mandatory: frozenset[int] = frozenset(),
    deadline: float | None = None,
) -> Placement:
    """Cheapest node set satisfying the accumulated cuts (decomposition MP)."""
    return _search(n, mask_of(mandatory), _mask_cost(cost_fn), feas, deadline)


def brute_force_rlp(graph: TransformedGraph, cost_fn: CostFn) -> Placement:
    """Exhaustive oracle over all node subsets; identical tie rule.

    Refused above n = 16: this is deliberately oracle-scale only.
    """
    if graph.n > 16:
        raise InvalidArgumentError(f"brute force limited to n <= 16, got {graph.n}")
    cost = _mask_cost(cost_fn)
    feas = CDSFeasibility(graph)
    best_mask = None
    best_cost = None
    for mask in range(1 << graph.n):
        if not feas.leaf_ok(mask):
            continue
        c = cost(mask)
        if (
            best_cost is None
            or c < best_cost
            or (c == best_cost and lex_less(mask, best_mask))
        ):
            best_cost = c
            best_mask = mask
    if best_mask is None:
        raise InvalidArgumentError("no feasible placement exists")
    return Placement(selected=frozenset(bits(best_mask)), objective=best_cost)


# ---------------------------------------------------------------------------
# Search engine


def _reverse_greedy(n, mandatory, cost, feas):
    """Deterministic incumbent: start from all nodes, drop what stays feasible
    (most expensive singleton first)."""
    full = (1 << n) - 1
    if not feas.leaf_ok(full):
        return None
    mask = full
    order = sorted(range(n), key=lambda v: (-cost(1 << v), -v))
    for v in order:
        if mandatory >> v & 1:
            continue
        cand = mask & ~(1 << v)
        if feas.leaf_ok(cand):
            mask = cand
    return mask


def _search(n, mandatory, cost, feas, deadline):
    check_deadline(deadline)
    best_mask = _reverse_greedy(n, mandatory, cost, feas)
    if best_mask is None:
        best_cost = None
    else:
        best_cost = cost(best_mask)

    ticks = 0

    def rec(in_mask, out_mask):
        nonlocal best_mask, best_cost, ticks
        ticks += 1
        if deadline is not None and ticks % 2048 == 0 and time.monotonic() > deadline:
            raise SolveTimeout("placement search exceeded its time limit")
        c = cost(in_mask)
        if best_cost is not None and c > best_cost:
            return
        if feas.dead_end(in_mask, out_mask):
            return
        if feas.leaf_ok(in_mask) and (
            best_cost is None
            or c < best_cost
            or (c == best_cost and lex_less(in_mask, best_mask))
        ):
            best_mask, best_cost = in_mask, c
        undecided = ~(in_mask | out_mask) & ((1 << n) - 1)
        if not undecided:
            return
        low = undecided & -undecided
        rec(in_mask | low, out_mask)
        rec(in_mask, out_mask | low)

    rec(mandatory, 0)
    if best_mask is None:
        raise InvalidArgumentError("no feasible placement exists")
    return Placement(selected=frozenset(bits(best_mask)), objective=best_cost)
