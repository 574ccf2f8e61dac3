"""Compare the compiled and pure-Python run loops.

Two timings per family:

* kernel: the batched run loop alone, on pre-built random streams;
* end-to-end: ``run_batch`` including stream construction.

Both backends must produce identical step counts; the script checks this.

    python3 benchmarks/bench_backends.py --replications 20000 --r-max 64
"""
import argparse
import math
import time

import numpy as np

from unimodal_astar import _pykernel
from unimodal_astar.measures import make_family
from unimodal_astar.rng import RandomStream
from unimodal_astar.sampler import available_backends, default_max_steps, run_batch

try:
    from unimodal_astar import _ckernel
except ImportError:
    _ckernel = None

FAMILIES = ["worst-case", "triangle", "truncated-gaussian", "staircase"]
GRID = np.log([0.1, 0.5, 0.9])


def kernel_time(target, n, seed, backend):
    streams = RandomStream(seed).spawn(n)
    thr = GRID + target.log_r_max
    out = (
        np.zeros(n, np.int64), np.zeros(n), np.zeros(n, np.int8),
        np.zeros((n, len(thr)), np.int64), np.zeros((n, 0)),
    )
    steps = default_max_steps(target)
    t0 = time.perf_counter()
    if backend == "cython":
        code, params = target.kernel_spec()
        _ckernel.run_replicas(code, np.asarray(params, float), target.log_r_max, target.mode,
                              [s.bit_generator for s in streams], thr, steps, 0, *out)
    else:
        _pykernel.run_replicas(target.log_ratio, target.log_r_max, target.mode, streams, thr, steps, 0, *out)
    return time.perf_counter() - t0, out[0]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replications", type=int, default=20_000)
    ap.add_argument("--r-max", type=float, default=64.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = available_backends()
    print(f"backends: {', '.join(backends)}; R={args.replications}, r_max={args.r_max:g}, best of {args.repeat}")
    print(f"{'family':<20}{'mean T':>8}" + "".join(f"{b + ' kernel':>16}{b + ' total':>16}" for b in backends) + f"{'speedup':>10}")
    for name in FAMILIES:
        target = make_family(name, r_max=args.r_max)
        kern, total, Ts = {}, {}, {}
        for b in backends:
            kern[b] = min(kernel_time(target, args.replications, args.seed, b)[0] for _ in range(args.repeat))
            Ts[b] = kernel_time(target, args.replications, args.seed, b)[1]
            best = math.inf
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                run_batch(target, args.replications, args.seed, backend=b)
                best = min(best, time.perf_counter() - t0)
            total[b] = best
        if len(backends) == 2:
            assert np.array_equal(Ts["cython"], Ts["python"]), "backends disagree"
        speed = kern["python"] / kern["cython"] if "cython" in kern else float("nan")
        cells = "".join(f"{kern[b]:>15.3f}s{total[b]:>15.3f}s" for b in backends)
        print(f"{name:<20}{Ts['python'].mean():>8.2f}{cells}{speed:>9.1f}x")


if __name__ == "__main__":
    main()
