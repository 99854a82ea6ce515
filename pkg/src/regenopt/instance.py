"""Problem data model, seeded random instance generator, and file I/O.

An instance is an undirected network whose edge lengths and node costs are
uncertain:

* each node has a nominal installation cost plus a maximum cost deviation
  (the cost adversary may push at most ``gamma_v`` nodes to their upper
  bound, once);
* each edge has a nominal length, a maximum length deviation, and one
  realized deviation cap per time period (the length adversary may push at
  most ``gamma_e`` edges per period to their period cap).

Edges longer than ``d_max`` can never carry a signal and are dropped when an
instance is constructed.  All constructors guarantee a connected network.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import (
    GenerationError,
    InvalidArgumentError,
    ParseError,
    ValidationError,
)
from .rationals import as_rational, rational_to_json

# Sampling ranges for the generator (uniform integer sets).
_LEN_RANGE = (350, 600)
_LEN_DEV_RANGE = (1, 250)
_COST_RANGE = (250, 300)
_COST_DEV_RANGE = (1, 50)
# Period caps are sampled on a fixed 1/1000 grid so arithmetic stays exact.
_CAP_DENOMINATOR = 1000
_MAX_RESAMPLES = 1000


@dataclass(frozen=True)
class NodeData:
    """One network node: dense 0-based id, nominal cost, maximum cost deviation."""

    id: int
    nominal_cost: Fraction
    max_deviation: Fraction


@dataclass(frozen=True)
class EdgeData:
    """One undirected edge.

    ``endpoints`` is stored with the smaller id first.  ``period_caps`` holds
    the realized per-period deviation caps, each within [0, max_deviation].
    """

    endpoints: tuple[int, int]
    nominal_length: Fraction
    max_deviation: Fraction
    period_caps: tuple[Fraction, ...]


@dataclass(frozen=True)
class NetworkInstance:
    """Immutable problem instance; safe to share across threads."""

    nodes: tuple[NodeData, ...]
    edges: tuple[EdgeData, ...]
    d_max: Fraction
    gamma_e: int
    gamma_v: int
    horizon: int
    seed: int

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.edges)

    def node_costs(self) -> tuple[Fraction, ...]:
        return tuple(nd.nominal_cost for nd in self.nodes)

    def node_deviations(self) -> tuple[Fraction, ...]:
        return tuple(nd.max_deviation for nd in self.nodes)

    def edge_lengths(self) -> tuple[Fraction, ...]:
        return tuple(e.nominal_length for e in self.edges)

    def edge_deviations(self) -> tuple[Fraction, ...]:
        return tuple(e.max_deviation for e in self.edges)

    def period_caps(self, t: int) -> tuple[Fraction, ...]:
        """Deviation caps of every edge in period ``t`` (0-based)."""
        return tuple(e.period_caps[t] for e in self.edges)


@dataclass(frozen=True)
class Scenario:
    """One adversary realization against a placement.

    ``edge_attacks[t]`` lists the edges pushed to their period-``t`` cap;
    ``deviation_levels[t]`` records the realized deviation of each attacked
    edge as sorted ``(edge_id, value)`` pairs.
    """

    node_attacks: frozenset[int]
    edge_attacks: tuple[frozenset[int], ...]
    deviation_levels: tuple[tuple[tuple[int, Fraction], ...], ...]


def validate_scenario(inst: NetworkInstance, scenario: Scenario) -> None:
    """Raise ValidationError if the scenario violates the adversary budgets."""
    if len(scenario.node_attacks) > inst.gamma_v:
        raise ValidationError(
            f"{len(scenario.node_attacks)} node attacks exceed budget {inst.gamma_v}",
            field="node_attacks",
        )
    for v in scenario.node_attacks:
        if not 0 <= v < inst.n:
            raise ValidationError(f"unknown node {v}", field="node_attacks")
    if len(scenario.edge_attacks) != inst.horizon:
        raise ValidationError(
            f"expected {inst.horizon} periods, got {len(scenario.edge_attacks)}",
            field="edge_attacks",
        )
    for t, attacked in enumerate(scenario.edge_attacks):
        if len(attacked) > inst.gamma_e:
            raise ValidationError(
                f"{len(attacked)} edge attacks exceed budget {inst.gamma_e}",
                field=f"edge_attacks[{t}]",
            )
        levels = dict(scenario.deviation_levels[t])
        for e in attacked:
            if not 0 <= e < inst.m:
                raise ValidationError(f"unknown edge {e}", field=f"edge_attacks[{t}]")
            value = levels.get(e, Fraction(0))
            if not 0 <= value <= inst.edges[e].period_caps[t]:
                raise ValidationError(
                    f"deviation {value} outside [0, {inst.edges[e].period_caps[t]}]",
                    field=f"deviation_levels[{t}][{e}]",
                )


# ---------------------------------------------------------------------------
# Construction and validation


def _connected(n: int, edges: Sequence[tuple[int, int]]) -> bool:
    if n == 0:
        return False
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * n
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if not seen[w]:
                seen[w] = True
                count += 1
                stack.append(w)
    return count == n


def build_instance(
    node_costs: Sequence,
    node_deviations: Sequence,
    edges: Iterable[tuple],
    d_max,
    gamma_e: int,
    gamma_v: int,
    horizon: int,
    seed: int = 0,
) -> NetworkInstance:
    """Assemble and validate an instance from plain values.

    ``edges`` yields ``(u, v, length, deviation, period_caps)`` tuples;
    ``period_caps`` may be a single value (used for every period) or a
    sequence of length ``horizon``.  Edges longer than ``d_max`` are dropped.
    Raises ValidationError on any invariant violation, including a
    disconnected surviving network.
    """
    n = len(node_costs)
    if n < 1:
        raise ValidationError("instance needs at least one node", field="nodes")
    if len(node_deviations) != n:
        raise ValidationError("one deviation per node required", field="nodes")
    if horizon < 1:
        raise ValidationError("horizon must be positive", field="meta.horizon")
    if gamma_e < 0 or gamma_v < 0:
        raise ValidationError("budgets must be nonnegative", field="meta")
    d_max = as_rational(d_max, "d_max")
    if d_max <= 0:
        raise ValidationError("d_max must be positive", field="meta.d_max")

    nodes = []
    for i in range(n):
        cost = as_rational(node_costs[i], f"nodes[{i}].cost")
        dev = as_rational(node_deviations[i], f"nodes[{i}].dev")
        if cost < 0:
            raise ValidationError("negative nominal cost", field=f"nodes[{i}].cost")
        if dev < 0:
            raise ValidationError("negative deviation", field=f"nodes[{i}].dev")
        nodes.append(NodeData(id=i, nominal_cost=cost, max_deviation=dev))

    seen_pairs: set[tuple[int, int]] = set()
    kept: list[EdgeData] = []
    for idx, spec in enumerate(edges):
        u, v, length, dev, caps = spec
        if not (0 <= u < n and 0 <= v < n):
            raise ValidationError(f"endpoint outside [0,{n})", field=f"edges[{idx}]")
        if u == v:
            raise ValidationError("self-loop", field=f"edges[{idx}]")
        pair = (u, v) if u < v else (v, u)
        if pair in seen_pairs:
            raise ValidationError(f"parallel edge {pair}", field=f"edges[{idx}]")
        seen_pairs.add(pair)
        length = as_rational(length, f"edges[{idx}].len")
        dev = as_rational(dev, f"edges[{idx}].dev")
        if length < 0:
            raise ValidationError("negative length", field=f"edges[{idx}].len")
        if dev < 0:
            raise ValidationError("negative deviation", field=f"edges[{idx}].dev")
        if isinstance(caps, (list, tuple)):
            cap_values = [as_rational(c, f"edges[{idx}].period_caps[{t}]") for t, c in enumerate(caps)]
        else:
            cap_values = [as_rational(caps, f"edges[{idx}].period_caps")] * horizon
        if len(cap_values) != horizon:
            raise ValidationError(
                f"expected {horizon} period caps, got {len(cap_values)}",
                field=f"edges[{idx}].period_caps",
            )
        for t, c in enumerate(cap_values):
            if not 0 <= c <= dev:
                raise ValidationError(
                    f"cap {c} outside [0, {dev}]",
                    field=f"edges[{idx}].period_caps[{t}]",
                )
        if length > d_max:
            continue  # unusable edge: signal cannot survive it
        kept.append(
            EdgeData(
                endpoints=pair,
                nominal_length=length,
                max_deviation=dev,
                period_caps=tuple(cap_values),
            )
        )

    if not _connected(n, [e.endpoints for e in kept]) and n > 1:
        raise ValidationError(
            "network is disconnected after dropping edges longer than d_max",
            field="edges",
        )

    return NetworkInstance(
        nodes=tuple(nodes),
        edges=tuple(kept),
        d_max=d_max,
        gamma_e=gamma_e,
        gamma_v=gamma_v,
        horizon=horizon,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Random generation


def generate_instance(
    n: int,
    density: float,
    d_max,
    gamma_e: int,
    gamma_v: int,
    horizon: int,
    seed: int,
) -> NetworkInstance:
    """Sample a connected instance with the standard parameter distributions.

    Topology is Erdős–Rényi G(n, density), resampled with a derived seed
    until the network (after dropping edges longer than ``d_max``) is
    connected.  Lengths are uniform in {350..600}, edge deviations in
    {1..250}, node costs in {250..300}, node deviations in {1..50}; period
    caps are uniform on the 1/1000 grid of [0, deviation].  The same
    arguments and seed always produce the identical instance.
    """
    if n < 2:
        raise InvalidArgumentError(f"n must be at least 2, got {n}")
    if not 0 < density <= 1:
        raise InvalidArgumentError(f"density must be in (0, 1], got {density}")
    if horizon < 1:
        raise InvalidArgumentError(f"horizon must be positive, got {horizon}")
    if as_rational(d_max, "d_max") <= 0:
        raise InvalidArgumentError(f"d_max must be positive, got {d_max}")
    if gamma_e < 0 or gamma_v < 0:
        raise InvalidArgumentError("budgets must be nonnegative")

    master = random.Random(seed)
    for _ in range(_MAX_RESAMPLES):
        rng = random.Random(master.getrandbits(64))
        pairs = [
            (u, v)
            for u in range(n)
            for v in range(u + 1, n)
            if rng.random() < density
        ]
        edge_specs = []
        for u, v in pairs:
            length = rng.randint(*_LEN_RANGE)
            dev = rng.randint(*_LEN_DEV_RANGE)
            caps = [
                Fraction(rng.randint(0, dev * _CAP_DENOMINATOR), _CAP_DENOMINATOR)
                for _ in range(horizon)
            ]
            edge_specs.append((u, v, length, dev, caps))
        costs = []
        devs = []
        for _ in range(n):
            costs.append(rng.randint(*_COST_RANGE))
            devs.append(rng.randint(*_COST_DEV_RANGE))
        try:
            return build_instance(
                costs, devs, edge_specs, d_max, gamma_e, gamma_v, horizon, seed=seed
            )
        except ValidationError:
            continue  # disconnected draw; resample with a fresh derived seed
    raise GenerationError(
        f"no connected graph after {_MAX_RESAMPLES} draws (n={n}, density={density})"
    )


# ---------------------------------------------------------------------------
# File format

_META_FIELDS = {"n", "d_max", "gamma_e", "gamma_v", "horizon", "seed"}
_NODE_FIELDS = {"id", "cost", "dev"}
_EDGE_FIELDS = {"u", "v", "len", "dev", "period_caps"}


def _reject_unknown(obj: Mapping, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ValidationError(f"unknown field {sorted(unknown)[0]!r}", field=where)


def _require(obj: Mapping, key: str, where: str):
    if key not in obj:
        raise ValidationError("missing field", field=f"{where}.{key}")
    return obj[key]


def save_instance(inst: NetworkInstance) -> bytes:
    """Serialize to the canonical instance document."""
    doc = {
        "meta": {
            "n": inst.n,
            "d_max": rational_to_json(inst.d_max),
            "gamma_e": inst.gamma_e,
            "gamma_v": inst.gamma_v,
            "horizon": inst.horizon,
            "seed": inst.seed,
        },
        "nodes": [
            {
                "id": nd.id,
                "cost": rational_to_json(nd.nominal_cost),
                "dev": rational_to_json(nd.max_deviation),
            }
            for nd in inst.nodes
        ],
        "edges": [
            {
                "u": e.endpoints[0],
                "v": e.endpoints[1],
                "len": rational_to_json(e.nominal_length),
                "dev": rational_to_json(e.max_deviation),
                "period_caps": [rational_to_json(c) for c in e.period_caps],
            }
            for e in inst.edges
        ],
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def load_instance(data: bytes | str) -> NetworkInstance:
    """Parse and validate an instance document.

    Raises ParseError for malformed JSON (with line/column) and
    ValidationError, naming the field, for any invariant violation.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, location=f"line {exc.lineno}, column {exc.colno}") from exc

    if not isinstance(doc, dict):
        raise ValidationError("document root must be an object", field="<root>")
    _reject_unknown(doc, {"meta", "nodes", "edges"}, "<root>")
    meta = _require(doc, "meta", "<root>")
    if not isinstance(meta, dict):
        raise ValidationError("must be an object", field="meta")
    _reject_unknown(meta, _META_FIELDS, "meta")
    n = _require(meta, "n", "meta")
    if not isinstance(n, int) or n < 1:
        raise ValidationError("n must be a positive integer", field="meta.n")
    for key in ("gamma_e", "gamma_v", "horizon", "seed"):
        value = _require(meta, key, "meta")
        if not isinstance(value, int):
            raise ValidationError("must be an integer", field=f"meta.{key}")

    raw_nodes = _require(doc, "nodes", "<root>")
    if not isinstance(raw_nodes, list) or len(raw_nodes) != n:
        raise ValidationError(f"expected {n} node records", field="nodes")
    costs = [None] * n
    devs = [None] * n
    for i, rec in enumerate(raw_nodes):
        if not isinstance(rec, dict):
            raise ValidationError("must be an object", field=f"nodes[{i}]")
        _reject_unknown(rec, _NODE_FIELDS, f"nodes[{i}]")
        node_id = _require(rec, "id", f"nodes[{i}]")
        if node_id != i:
            raise ValidationError(
                f"ids must be dense and ordered (expected {i}, got {node_id})",
                field=f"nodes[{i}].id",
            )
        costs[i] = _require(rec, "cost", f"nodes[{i}]")
        devs[i] = _require(rec, "dev", f"nodes[{i}]")

    raw_edges = _require(doc, "edges", "<root>")
    if not isinstance(raw_edges, list):
        raise ValidationError("must be an array", field="edges")
    edge_specs = []
    for i, rec in enumerate(raw_edges):
        if not isinstance(rec, dict):
            raise ValidationError("must be an object", field=f"edges[{i}]")
        _reject_unknown(rec, _EDGE_FIELDS, f"edges[{i}]")
        u = _require(rec, "u", f"edges[{i}]")
        v = _require(rec, "v", f"edges[{i}]")
        if not isinstance(u, int) or not isinstance(v, int):
            raise ValidationError("endpoints must be integers", field=f"edges[{i}]")
        caps = _require(rec, "period_caps", f"edges[{i}]")
        if not isinstance(caps, list):
            raise ValidationError("must be an array", field=f"edges[{i}].period_caps")
        edge_specs.append(
            (u, v, _require(rec, "len", f"edges[{i}]"), _require(rec, "dev", f"edges[{i}]"), caps)
        )

    return build_instance(
        costs,
        devs,
        edge_specs,
        _require(meta, "d_max", "meta"),
        meta["gamma_e"],
        meta["gamma_v"],
        meta["horizon"],
        seed=meta["seed"],
    )
