"""Experiment runner, result tables, and performance profiles.

An experiment sweeps cells of (n, gamma_e, gamma_v), generates a fixed
number of seeded instances per cell, runs the configured methods on each,
and records one CSV row per (cell, instance, method) with the objective,
the percentage improvements over the DWC and RSB references, iteration
counts, wall time, and a status.  Identical config and master seed give an
identical CSV up to the wall-time column.

Performance profiles follow the usual convention: for each instance the
per-solver ratio to the fastest solver, with timeouts treated as infinite;
``k_s(tau)`` is the fraction of instances where solver ``s`` stays within a
factor ``tau`` of the best.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from typing import Mapping, Sequence

from . import hsl, methods
from .errors import (
    InfeasibleInstanceError,
    InvalidArgumentError,
    ParseError,
    SolveTimeout,
    ValidationError,
)
from .instance import generate_instance
from .rationals import as_rational, rational_to_json

logger = logging.getLogger(__name__)

METHOD_NAMES = ("dwc", "rsb", "rdb", "ccg", "bdc", "iro", "hsl")

RESULT_COLUMNS = (
    "experiment",
    "n",
    "gamma_e",
    "gamma_v",
    "seed",
    "method",
    "objective",
    "r_dwc",
    "r_rsb",
    "iterations",
    "time_ms",
    "status",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs; serializable to the config document."""

    experiment: str
    n_values: tuple[int, ...]
    gamma_e_values: tuple[int, ...]
    gamma_v_values: tuple[int, ...]
    instances_per_cell: int
    methods: tuple[str, ...]
    d_max: Fraction = Fraction(1000)
    density: float = 0.3
    horizon: int = 3
    eta_d: Fraction = Fraction(1, 10)
    max_iter: int = 10
    epsilon: Fraction = Fraction(0)
    master_seed: int = 1
    time_limit: float = 60.0
    scale: float = 1.0

    def validate(self) -> None:
        if not self.methods:
            raise InvalidArgumentError("method set must be nonempty")
        unknown = [m for m in self.methods if m not in METHOD_NAMES]
        if unknown:
            raise InvalidArgumentError(f"unknown methods: {unknown}")
        if self.instances_per_cell < 1:
            raise InvalidArgumentError("instances_per_cell must be at least 1")


def preset(
    name: str, scale: float = 1.0, master_seed: int = 1, **overrides
) -> ExperimentConfig:
    """Standard experiment presets; ``scale`` shrinks sizes and instance
    counts while keeping the sampling distributions."""
    if name == "exp1":
        cfg = ExperimentConfig(
            experiment="exp1",
            n_values=tuple(range(10, 31, 2)),
            gamma_e_values=(2,),
            gamma_v_values=(2,),
            instances_per_cell=50,
            methods=("dwc", "rsb", "rdb"),
        )
    elif name == "exp2":
        cfg = ExperimentConfig(
            experiment="exp2",
            n_values=(25,),
            gamma_e_values=(1, 2),
            gamma_v_values=(1, 2, 3),
            instances_per_cell=50,
            methods=("dwc", "rsb", "rdb"),
        )
    elif name == "exp3":
        # Scalable methods run with a small absolute tolerance (about half a
        # percent of typical objectives), like any practical solver setup.
        cfg = ExperimentConfig(
            experiment="exp3",
            n_values=tuple(range(40, 61, 2)),
            gamma_e_values=(2,),
            gamma_v_values=(2,),
            instances_per_cell=50,
            methods=("dwc", "bdc", "ccg", "iro", "hsl"),
            epsilon=Fraction(5),
        )
    elif name == "exp4":
        cfg = ExperimentConfig(
            experiment="exp4",
            n_values=(50,),
            gamma_e_values=(1, 2),
            gamma_v_values=(1, 2, 3),
            instances_per_cell=50,
            methods=("dwc", "bdc", "ccg", "iro", "hsl"),
            eta_d=Fraction(1, 10),
            max_iter=10,
            epsilon=Fraction(5),
        )
    else:
        raise InvalidArgumentError(f"unknown preset {name!r}")
    if scale != 1.0:
        n_values = tuple(sorted({max(6, round(n * scale)) for n in cfg.n_values}))
        cfg = replace(
            cfg,
            n_values=n_values,
            instances_per_cell=max(1, round(cfg.instances_per_cell * scale)),
            scale=scale,
        )
    return replace(cfg, master_seed=master_seed, **overrides)


# ---------------------------------------------------------------------------
# Config document

_CONFIG_FIELDS = {
    "experiment",
    "n_values",
    "gamma_e_values",
    "gamma_v_values",
    "instances_per_cell",
    "methods",
    "d_max",
    "density",
    "horizon",
    "eta_d",
    "max_iter",
    "epsilon",
    "master_seed",
    "time_limit",
    "scale",
}


def save_config(cfg: ExperimentConfig) -> bytes:
    doc = asdict(cfg)
    doc["d_max"] = rational_to_json(cfg.d_max)
    doc["eta_d"] = rational_to_json(cfg.eta_d)
    doc["epsilon"] = rational_to_json(cfg.epsilon)
    doc["n_values"] = list(cfg.n_values)
    doc["gamma_e_values"] = list(cfg.gamma_e_values)
    doc["gamma_v_values"] = list(cfg.gamma_v_values)
    doc["methods"] = list(cfg.methods)
    return (json.dumps(doc, indent=2) + "\n").encode()


def load_config(data: bytes | str) -> ExperimentConfig:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, location=f"line {exc.lineno}, column {exc.colno}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("config root must be an object", field="<root>")
    unknown = set(doc) - _CONFIG_FIELDS
    if unknown:
        raise ValidationError(f"unknown field {sorted(unknown)[0]!r}", field="<root>")
    required = {"experiment", "n_values", "gamma_e_values", "gamma_v_values",
                "instances_per_cell", "methods"}
    missing = required - set(doc)
    if missing:
        raise ValidationError("missing field", field=sorted(missing)[0])
    cfg = ExperimentConfig(
        experiment=str(doc["experiment"]),
        n_values=tuple(int(x) for x in doc["n_values"]),
        gamma_e_values=tuple(int(x) for x in doc["gamma_e_values"]),
        gamma_v_values=tuple(int(x) for x in doc["gamma_v_values"]),
        instances_per_cell=int(doc["instances_per_cell"]),
        methods=tuple(str(m) for m in doc["methods"]),
        d_max=as_rational(doc.get("d_max", 1000), "d_max"),
        density=float(doc.get("density", 0.3)),
        horizon=int(doc.get("horizon", 3)),
        eta_d=as_rational(doc.get("eta_d", "1/10"), "eta_d"),
        max_iter=int(doc.get("max_iter", 10)),
        epsilon=as_rational(doc.get("epsilon", 0), "epsilon"),
        master_seed=int(doc.get("master_seed", 1)),
        time_limit=float(doc.get("time_limit", 60.0)),
        scale=float(doc.get("scale", 1.0)),
    )
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# Seed derivation (fixed mixing so replays are identical across platforms)


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


def derived_seed(master_seed: int, *parts: int) -> int:
    x = master_seed & 0xFFFFFFFFFFFFFFFF
    for p in parts:
        x = _splitmix64(x ^ ((p * 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF))
    return x


# ---------------------------------------------------------------------------
# Running


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    n: int
    gamma_e: int
    gamma_v: int
    seed: int
    method: str
    objective: Fraction | None
    r_dwc: float | None
    r_rsb: float | None
    iterations: int | None
    time_ms: float | None
    status: str


def _solve_one(method: str, inst, cfg: ExperimentConfig):
    deadline = time.monotonic() + cfg.time_limit if cfg.time_limit else None
    if method == "dwc":
        return methods.solve_dwc(inst, deadline=deadline)
    if method == "rsb":
        return methods.solve_rsb(inst, deadline=deadline)
    if method == "rdb":
        return methods.solve_rdb(inst, deadline=deadline)
    if method == "ccg":
        return methods.solve_ccg(inst, cfg.epsilon, deadline=deadline)
    if method == "bdc":
        return methods.solve_benders(inst, cfg.epsilon, deadline=deadline)
    if method == "iro":
        eps = cfg.epsilon if cfg.epsilon > 0 else Fraction(1, 10**6)
        return methods.solve_iro(inst, eps, deadline=deadline)
    if method == "hsl":
        eps = cfg.epsilon if cfg.epsilon > 0 else Fraction(1, 10**6)
        return hsl.play_hsl(
            inst, eta_d=cfg.eta_d, epsilon=eps, max_iter=cfg.max_iter, deadline=deadline
        )
    raise InvalidArgumentError(f"unknown method {method!r}")


def _instance_rows(cfg: ExperimentConfig, cell_idx: int, cell, index: int) -> list[ResultRow]:
    """Solve every configured method on one (resampled-until-feasible) instance."""
    n, gamma_e, gamma_v = cell
    for attempt in range(50):
        seed = derived_seed(cfg.master_seed, cell_idx, index, attempt)
        inst = generate_instance(
            n, cfg.density, cfg.d_max, gamma_e, gamma_v, cfg.horizon, seed
        )
        reports: dict[str, object] = {}
        try:
            for method in cfg.methods:
                start = time.perf_counter()
                try:
                    reports[method] = _solve_one(method, inst, cfg)
                except SolveTimeout:
                    reports[method] = time.perf_counter() - start
        except InfeasibleInstanceError:
            logger.info(
                "cell %s instance %d seed %d infeasible; resampling", cell, index, seed
            )
            continue
        rows = []
        dwc_obj = None
        rsb_obj = None
        for method in cfg.methods:
            rep = reports[method]
            if isinstance(rep, methods.SolveReport):
                if method == "dwc":
                    dwc_obj = rep.objective
                elif method == "rsb":
                    rsb_obj = rep.objective
        for method in cfg.methods:
            rep = reports[method]
            if isinstance(rep, methods.SolveReport):
                r_dwc = (
                    float(100 * (dwc_obj - rep.objective) / dwc_obj)
                    if dwc_obj not in (None, 0)
                    else None
                )
                r_rsb = (
                    float(100 * (rsb_obj - rep.objective) / rsb_obj)
                    if rsb_obj not in (None, 0)
                    else None
                )
                rows.append(
                    ResultRow(
                        experiment=cfg.experiment,
                        n=n,
                        gamma_e=gamma_e,
                        gamma_v=gamma_v,
                        seed=seed,
                        method=method,
                        objective=rep.objective,
                        r_dwc=r_dwc,
                        r_rsb=r_rsb,
                        iterations=rep.iterations,
                        time_ms=rep.wall_time * 1000.0,
                        status="ok",
                    )
                )
            else:
                rows.append(
                    ResultRow(
                        experiment=cfg.experiment,
                        n=n,
                        gamma_e=gamma_e,
                        gamma_v=gamma_v,
                        seed=seed,
                        method=method,
                        objective=None,
                        r_dwc=None,
                        r_rsb=None,
                        iterations=None,
                        time_ms=float(rep) * 1000.0,
                        status="timeout",
                    )
                )
        return rows
    raise InfeasibleInstanceError(
        f"cell {cell}: no feasible instance after 50 resamples"
    )


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> list[ResultRow]:
    """Run the full sweep; rows come back in deterministic (cell, instance,
    method) order regardless of worker count."""
    cfg.validate()
    cells = [
        (n, ge, gv)
        for n in cfg.n_values
        for ge in cfg.gamma_e_values
        for gv in cfg.gamma_v_values
    ]
    tasks = [
        (cell_idx, cell, index)
        for cell_idx, cell in enumerate(cells)
        for index in range(cfg.instances_per_cell)
    ]
    rows: list[ResultRow] = []
    if workers <= 1:
        for cell_idx, cell, index in tasks:
            rows.extend(_instance_rows(cfg, cell_idx, cell, index))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_instance_rows, cfg, cell_idx, cell, index)
                for cell_idx, cell, index in tasks
            ]
            for future in futures:
                rows.extend(future.result())
    return rows


# ---------------------------------------------------------------------------
# CSV serialization


def write_results_csv(rows: Sequence[ResultRow], stream) -> None:
    writer = csv.writer(stream)
    writer.writerow(RESULT_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                row.experiment,
                row.n,
                row.gamma_e,
                row.gamma_v,
                row.seed,
                row.method,
                "" if row.objective is None else rational_to_json(row.objective),
                "" if row.r_dwc is None else f"{row.r_dwc:.6f}",
                "" if row.r_rsb is None else f"{row.r_rsb:.6f}",
                "" if row.iterations is None else row.iterations,
                "" if row.time_ms is None else f"{row.time_ms:.3f}",
                row.status,
            ]
        )


def results_csv_text(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    write_results_csv(rows, buf)
    return buf.getvalue()


def read_results_csv(stream) -> list[dict]:
    reader = csv.DictReader(stream)
    return list(reader)


# ---------------------------------------------------------------------------
# Performance profiles


@dataclass(frozen=True)
class ProfileCurve:
    """Step function k_s(tau): fraction of instances within ratio tau."""

    solver: str
    breakpoints: tuple[tuple[float, float], ...]

    def value(self, tau: float) -> float:
        out = 0.0
        for t, k in self.breakpoints:
            if t <= tau:
                out = k
            else:
                break
        return out


def performance_profile(
    times: Mapping[str, Sequence[float | None]]
) -> dict[str, ProfileCurve]:
    """Profile curves from per-solver per-instance times (None = timeout).

    Instances where every solver timed out are excluded with a warning.
    """
    solvers = list(times)
    if not solvers:
        raise InvalidArgumentError("at least one solver required")
    counts = {len(ts) for ts in times.values()}
    if len(counts) != 1 or counts == {0}:
        raise InvalidArgumentError("every solver needs the same positive instance count")
    total = counts.pop()
    kept = []
    for idx in range(total):
        finite = [times[s][idx] for s in solvers if times[s][idx] is not None]
        if not finite:
            warnings.warn(f"instance {idx} unsolved by every solver; excluded")
            continue
        kept.append(idx)
    if not kept:
        raise InvalidArgumentError("no instance solved by any solver")
    ratios: dict[str, list[float]] = {s: [] for s in solvers}
    for idx in kept:
        best = min(times[s][idx] for s in solvers if times[s][idx] is not None)
        for s in solvers:
            t = times[s][idx]
            if t is None:
                ratios[s].append(float("inf"))
            elif best == 0:
                ratios[s].append(1.0 if t == 0 else float("inf"))
            else:
                ratios[s].append(t / best)
    taus = sorted({1.0, *(r for rs in ratios.values() for r in rs if r != float("inf"))})
    curves = {}
    for s in solvers:
        points = tuple(
            (tau, sum(1 for r in ratios[s] if r <= tau) / len(kept)) for tau in taus
        )
        curves[s] = ProfileCurve(solver=s, breakpoints=points)
    return curves


def profile_from_results(rows: Sequence[Mapping]) -> dict[str, ProfileCurve]:
    """Group result-table rows by instance and profile the solver times."""
    solvers = sorted({row["method"] for row in rows})
    keys = []
    seen = set()
    for row in rows:
        key = (row["experiment"], row["n"], row["gamma_e"], row["gamma_v"], row["seed"])
        if key not in seen:
            seen.add(key)
            keys.append(key)
    table: dict[str, list[float | None]] = {s: [None] * len(keys) for s in solvers}
    index = {key: i for i, key in enumerate(keys)}
    for row in rows:
        key = (row["experiment"], row["n"], row["gamma_e"], row["gamma_v"], row["seed"])
        if row["status"] == "ok" and row["time_ms"] != "":
            table[row["method"]][index[key]] = float(row["time_ms"])
    return performance_profile(table)


def write_profile_csv(curves: Mapping[str, ProfileCurve], stream) -> None:
    writer = csv.writer(stream)
    writer.writerow(["solver", "tau", "k"])
    for solver in sorted(curves):
        for tau, k in curves[solver].breakpoints:
            writer.writerow([solver, f"{tau:.9g}", f"{k:.9g}"])
