#!/usr/bin/env python3
"""Compare the compiled shortest-path kernel against the pure-Python engine.

Runs the robust all-pairs computation (the package's hot loop) on generated
instances of growing size with both backends, checks they return identical
distances, and prints a timing table.

    python3 benchmarks/backend_benchmark.py [--sizes 10,20,40,60] [--repeats 3]
"""

import argparse
import time

from regenopt import backend, generate_instance
from regenopt.rationals import common_scale, scaled_int
from regenopt.shortest_paths import _csr


def scaled_inputs(inst):
    lengths = inst.edge_lengths()
    devs = inst.edge_deviations()
    scale = common_scale(list(lengths) + list(devs))
    base_e = [scaled_int(v, scale) for v in lengths]
    dev_e = [scaled_int(v, scale) for v in devs]
    indptr, nbr, arc_edge = _csr(inst)
    base = [base_e[e] for e in arc_edge]
    dev = [dev_e[e] for e in arc_edge]
    thetas = sorted({0, *dev_e})
    return indptr, nbr, base, dev, thetas


def run(inst, which, repeats):
    indptr, nbr, base, dev, thetas = scaled_inputs(inst)
    best = None
    rows = None
    for _ in range(repeats):
        start = time.perf_counter()
        rows = backend.robust_rows(
            inst.n, indptr, nbr, base, dev, inst.gamma_e, thetas, force=which
        )
        elapsed = time.perf_counter() - start
        best = elapsed if best is None else min(best, elapsed)
    return best, rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="10,20,40,60")
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--density", type=float, default=0.3)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    have_kernel = backend.kernel_available()
    print(f"kernel available: {have_kernel}")
    header = f"{'n':>4} {'edges':>6} {'thetas':>7} {'pure (s)':>10}"
    if have_kernel:
        header += f" {'kernel (s)':>11} {'speedup':>8}"
    print(header)
    for n in sizes:
        inst = generate_instance(n, args.density, 1000, 2, 2, 3, seed=n)
        t_pure, rows_pure = run(inst, "pure", args.repeats)
        line = f"{n:>4} {inst.m:>6} {inst.m + 1:>7} {t_pure:>10.4f}"
        if have_kernel:
            t_kern, rows_kern = run(inst, "kernel", args.repeats)
            assert rows_kern == rows_pure, "backends disagree"
            line += f" {t_kern:>11.4f} {t_pure / t_kern:>7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
