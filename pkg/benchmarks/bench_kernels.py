"""Compare the compiled and numpy categorical sampling kernels.

Usage::

    python benchmarks/bench_kernels.py [--replications R] [--size N] [--repeat K]

Both backends produce bit-identical counts; the script checks that before timing.
"""
import argparse
import time

import numpy as np

from phidiv import _kernels_py
from phidiv.pmf import derive_seed, sampling_cdf

try:
    from phidiv import _kernels as _compiled
except ImportError:
    _compiled = None


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replications", type=int, default=2000)
    ap.add_argument("--size", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    seeds = np.array([derive_seed(1, "bench", k) for k in range(args.replications)], dtype=np.uint64)
    draws = args.replications * args.size
    print(f"{args.replications} replications x {args.size} draws = {draws:.2e} draws per call")
    print(f"{'support':>8} {'backend':>8} {'seconds':>9} {'ns/draw':>8} {'speedup':>8}")
    for r in (3, 10, 40):
        cdf = sampling_cdf(np.full(r, 1.0 / r))
        backends = [("numpy", _kernels_py.categorical_counts)]
        if _compiled is not None:
            backends.insert(0, ("cython", _compiled.categorical_counts))
            small = seeds[:20]
            assert np.array_equal(_compiled.categorical_counts(small, 1000, cdf),
                                  _kernels_py.categorical_counts(small, 1000, cdf))
        times = {name: _best(lambda f=f: f(seeds, args.size, cdf), args.repeat) for name, f in backends}
        for name, t in times.items():
            speedup = times["numpy"] / t
            print(f"{r:>8} {name:>8} {t:>9.3f} {t / draws * 1e9:>8.2f} {speedup:>7.1f}x")
    if _compiled is None:
        print("compiled kernels not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
