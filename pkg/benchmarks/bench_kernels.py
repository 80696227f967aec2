"""Time every hot kernel under the numba and the numpy backend.

    python3 benchmarks/bench_kernels.py [--size 200] [--repeat 5] [--json out.json]

Both kernel tables are imported side by side, so one process times both
backends; each numba kernel is called once before timing to exclude
compilation. Outputs are compared bit for bit before anything is timed.
"""

import argparse
import json
import sys
import timeit

import numpy as np

from frechetproj import kernels
from frechetproj.guarding import build_guarding
from frechetproj.metrics import distance_matrix, discrete_frechet
from frechetproj.montecarlo import pair_directions
from frechetproj.geom import project_curves


def workloads(size, rng):
    P = np.cumsum(rng.normal(size=(size, 2)), axis=0)
    Q = np.cumsum(rng.normal(size=(size, 2)), axis=0)
    D = distance_matrix(P, Q)
    U = pair_directions(0, 0, 250, 2)
    pp, qq = project_curves(P, U), project_curves(Q, U)
    gs = build_guarding(D, discrete_frechet(P, Q).value)
    S = kernels.NUMPY_KERNELS["reach"](np.ascontiguousarray(~gs.mask))
    member = np.full(gs.mask.shape, -1, dtype=np.int64)
    mi, mj = np.nonzero(gs.mask)
    member[mi, mj] = np.arange(mi.size)
    small = P[: max(2, size // 4)]
    return {
        "table": (D, kernels.FRECHET),
        "batch_1d": (pp, qq, kernels.FRECHET),
        "reach": (np.ascontiguousarray(D < np.median(D)),),
        "avoidable_flags": (S, member, int(mi.size)),
        "ball_lengths": (P, P[size // 2].copy(), np.linspace(0.1, 10.0, 64)),
        "ball_scan": (small, np.ascontiguousarray(small), 1e-9),
    }


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b, equal_nan=True)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=200, help="curve length")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", help="also write the timings here")
    args = ap.parse_args(argv)

    if not kernels.JIT_KERNELS["table"]:
        print("numba is not installed; nothing to compare", file=sys.stderr)
        return 1
    work = workloads(args.size, np.random.default_rng(args.seed))
    rows = []
    print(f"{'kernel':<16}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, call_args in work.items():
        fast, slow = kernels.JIT_KERNELS[name], kernels.NUMPY_KERNELS[name]
        if not same(fast(*call_args), slow(*call_args)):
            print(f"{name}: backends disagree", file=sys.stderr)
            return 2
        t_jit = min(timeit.repeat(lambda: fast(*call_args), number=1, repeat=args.repeat))
        t_np = min(timeit.repeat(lambda: slow(*call_args), number=1, repeat=args.repeat))
        rows.append({"kernel": name, "numba_s": t_jit, "numpy_s": t_np})
        print(f"{name:<16}{1e3 * t_jit:>12.3f}{1e3 * t_np:>12.3f}{t_np / t_jit:>9.1f}x")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({"size": args.size, "repeat": args.repeat, "rows": rows}, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
