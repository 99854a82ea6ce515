"""Shortest-path backend selection.

The compiled kernel (``_spkernel``) is used whenever it imported cleanly,
``REGENOPT_PURE`` is not set, and the scaled weights provably fit in int64;
otherwise the pure-Python engine runs the identical algorithm with
arbitrary-precision integers.  Both report unreachable targets as ``None``
(the kernel's internal int64 sentinel is converted at this boundary, where
the eligibility bound guarantees no finite distance can reach it).
"""

from __future__ import annotations

import os
from typing import Sequence

from . import _sp_pure

try:
    from . import _spkernel

    _HAVE_KERNEL = True
except ImportError:  # pragma: no cover - depends on build environment
    _spkernel = None
    _HAVE_KERNEL = False

_FORCE_PURE = os.environ.get("REGENOPT_PURE", "") not in ("", "0")

# int64 headroom: candidate distances are gamma*theta + path sums and must
# stay strictly below the kernel's infinity sentinel (2**62).
_SAFE_LIMIT = 1 << 61


def kernel_available() -> bool:
    return _HAVE_KERNEL and not _FORCE_PURE


def backend_name() -> str:
    return "kernel" if kernel_available() else "pure"


def robust_rows(
    n: int,
    indptr: Sequence[int],
    nbr: Sequence[int],
    base: Sequence[int],
    dev: Sequence[int],
    gamma: int,
    thetas: Sequence[int],
    sources: Sequence[int] | None = None,
    force: str | None = None,
) -> list[list[int | None]]:
    """Robust shortest distances from ``sources`` (default all nodes).

    Inputs are pre-scaled integers; rows come back as Python ints with
    ``None`` marking disconnection.  ``force`` pins a backend by name (used
    by the benchmark and the equivalence tests).
    """
    use_kernel = kernel_available() if force is None else force == "kernel"
    if use_kernel:
        weight_mass = sum(base) + sum(dev)
        worst = weight_mass + gamma * (max(thetas) if len(thetas) else 0)
        if worst >= _SAFE_LIMIT:
            if force == "kernel":
                raise RuntimeError("weights too large for the compiled kernel")
            use_kernel = False
    if use_kernel:
        if not _HAVE_KERNEL:
            raise RuntimeError("compiled kernel requested but not available")
        import numpy as np

        src = np.arange(n, dtype=np.int32) if sources is None else np.asarray(
            list(sources), dtype=np.int32
        )
        out = _spkernel.robust_apsp(
            n,
            np.asarray(list(indptr), dtype=np.int32),
            np.asarray(list(nbr), dtype=np.int32),
            np.asarray(list(base), dtype=np.int64),
            np.asarray(list(dev), dtype=np.int64),
            gamma,
            np.asarray(list(thetas), dtype=np.int64),
            src,
        )
        sentinel = _spkernel.UNREACHED
        return [
            [None if x >= sentinel else int(x) for x in row] for row in out
        ]
    return _sp_pure.robust_apsp(n, indptr, nbr, base, dev, gamma, thetas, sources)
