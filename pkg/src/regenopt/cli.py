"""Command-line interface.

Subcommands: ``generate`` (write an instance file), ``solve`` (run one
method on an instance), ``experiment`` (full sweep with CSV results and
profile data), ``profile`` (profile curves from a results table), ``hsl``
(the adversarial game with an iteration trace).

Exit codes: 0 success, 1 infeasible or invalid input, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import bench, hsl, methods
from .errors import RegenoptError
from .instance import generate_instance, load_instance, save_instance
from .methods import SolveReport
from .rationals import as_rational, rational_to_json

_SOLVERS = {
    "dwc": lambda inst, a: methods.solve_dwc(
        inst, complete_shortcut=a.complete_shortcut
    ),
    "rsb": lambda inst, a: methods.solve_rsb(
        inst, complete_shortcut=a.complete_shortcut
    ),
    "rdb": lambda inst, a: methods.solve_rdb(
        inst, complete_shortcut=a.complete_shortcut
    ),
    "ccg": lambda inst, a: methods.solve_ccg(
        inst, as_rational(a.epsilon), complete_shortcut=a.complete_shortcut
    ),
    "bdc": lambda inst, a: methods.solve_benders(
        inst, as_rational(a.epsilon), complete_shortcut=a.complete_shortcut
    ),
    "iro": lambda inst, a: methods.solve_iro(
        inst,
        max(as_rational(a.epsilon), Fraction(1, 10**6)),
        max_iter=a.max_iter if a.max_iter is not None else 50,
        complete_shortcut=a.complete_shortcut,
    ),
    "hsl": lambda inst, a: hsl.play_hsl(
        inst,
        eta_d=as_rational(a.eta_d),
        epsilon=max(as_rational(a.epsilon), Fraction(1, 10**6)),
        max_iter=a.max_iter if a.max_iter is not None else 10,
    ),
}


def report_to_dict(report: SolveReport) -> dict:
    return {
        "method": report.method,
        "objective": rational_to_json(report.objective),
        "placement": sorted(report.placement.selected),
        "iterations": report.iterations,
        "lower_bound": rational_to_json(report.lower_bound),
        "upper_bound": rational_to_json(report.upper_bound),
        "gap": rational_to_json(report.gap),
        "scenarios_or_cuts": report.scenarios_or_cuts,
        "wall_time_ms": round(report.wall_time * 1000.0, 3),
        "trace": [
            {
                "k": rec.k,
                "lower": None if rec.lower is None else rational_to_json(rec.lower),
                "upper": None if rec.upper is None else rational_to_json(rec.upper),
                "placement": rec.placement_digest,
            }
            for rec in report.trace
        ],
    }


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regenopt",
        description="Robust regenerator placement under budgeted uncertainty.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random instance file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("--d-max", default="1000")
    p.add_argument("--gamma-e", type=int, default=2)
    p.add_argument("--gamma-v", type=int, default=2)
    p.add_argument("--horizon", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("solve", help="solve one instance with one method")
    p.add_argument("--method", choices=sorted(_SOLVERS), required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--out", default=None, help="report path (default stdout)")
    p.add_argument("--epsilon", default="0")
    p.add_argument("--eta-d", default="0.15")
    p.add_argument(
        "--max-iter", type=int, default=None,
        help="iteration cap (defaults: 10 for hsl, 50 for iro)",
    )
    p.add_argument(
        "--complete-shortcut",
        action="store_true",
        help="report the empty placement when the communication graph is complete",
    )

    p = sub.add_parser("experiment", help="run an experiment sweep")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="experiment config file")
    source.add_argument("--preset", choices=["exp1", "exp2", "exp3", "exp4"])
    p.add_argument("--scale", type=float, default=1.0, help="shrink preset sizes")
    p.add_argument("--seed", type=int, default=1, help="master seed for presets")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("profile", help="performance profiles from a results table")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("hsl", help="run the adversarial game with a trace")
    p.add_argument("--instance", required=True)
    p.add_argument("--eta-d", default="0.15")
    p.add_argument("--epsilon", default="1/1000000")
    p.add_argument("--max-iter", type=int, default=10)
    p.add_argument("--trace-out", default=None, help="JSONL trace path (default stdout)")
    p.add_argument("--out", default=None, help="report path")
    return parser


def _cmd_generate(args) -> int:
    inst = generate_instance(
        args.n,
        args.density,
        as_rational(args.d_max),
        args.gamma_e,
        args.gamma_v,
        args.horizon,
        args.seed,
    )
    Path(args.out).write_bytes(save_instance(inst))
    return 0


def _cmd_solve(args) -> int:
    inst = load_instance(Path(args.instance).read_bytes())
    report = _SOLVERS[args.method](inst, args)
    _write(args.out, json.dumps(report_to_dict(report), indent=2) + "\n")
    return 0


def _cmd_experiment(args) -> int:
    if args.config:
        cfg = bench.load_config(Path(args.config).read_bytes())
        if args.scale != 1.0:
            raise RegenoptError("--scale applies to presets; put it in the config file")
    else:
        cfg = bench.preset(args.preset, scale=args.scale, master_seed=args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = bench.run_experiment(cfg, workers=args.workers)
    with open(out_dir / "results.csv", "w", newline="") as stream:
        bench.write_results_csv(rows, stream)
    curves = bench.profile_from_results(bench.read_results_csv(
        open(out_dir / "results.csv", newline="")
    ))
    with open(out_dir / "profile.csv", "w", newline="") as stream:
        bench.write_profile_csv(curves, stream)
    (out_dir / "meta.json").write_bytes(bench.save_config(cfg))
    return 0


def _cmd_profile(args) -> int:
    with open(args.input, newline="") as stream:
        rows = bench.read_results_csv(stream)
    curves = bench.profile_from_results(rows)
    import io

    buf = io.StringIO()
    bench.write_profile_csv(curves, buf)
    _write(args.out, buf.getvalue())
    return 0


def _cmd_hsl(args) -> int:
    inst = load_instance(Path(args.instance).read_bytes())
    lines: list[str] = []

    def observer(row: dict) -> None:
        lines.append(
            json.dumps(
                {
                    "k": row["k"],
                    "loss": rational_to_json(row["loss"]),
                    "placement": row["placement"],
                    "changed": row["changed"],
                }
            )
        )

    report = hsl.play_hsl(
        inst,
        eta_d=as_rational(args.eta_d),
        epsilon=as_rational(args.epsilon),
        max_iter=args.max_iter,
        observer=observer,
    )
    _write(args.trace_out, "".join(line + "\n" for line in lines))
    if args.out is not None:
        _write(args.out, json.dumps(report_to_dict(report), indent=2) + "\n")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "solve": _cmd_solve,
    "experiment": _cmd_experiment,
    "profile": _cmd_profile,
    "hsl": _cmd_hsl,
}


def cli(argv=None) -> int:
    """Parse and dispatch; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return _COMMANDS[args.command](args)
    except RegenoptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(cli())


if __name__ == "__main__":
    main()
