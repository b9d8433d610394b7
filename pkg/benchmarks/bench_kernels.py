"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both variants are imported side by side from pskrx.kernels (the env flag
only picks the default), so one process measures both. The first numba
call is treated as warm-up and reported separately as compile/load time.
"""
import argparse
import time

import numpy as np

from pskrx import PskAlphabet, kernels
from pskrx._jit import NUMBA_AVAILABLE
from pskrx.optimizer import random_start


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    for m, n in ((4, 2), (4, 5), (8, 8), (4, 14)):
        a = PskAlphabet(m, 0.9)
        theta = random_start(rng, n, a.alpha)
        yield f"objective m={m} n={n}", "objective", (theta, n, a.states, np.asarray(a.priors), 0.66, 2.5e-3, 1.0)
    for n in (3, 5):
        a = PskAlphabet(4, 0.8)
        theta = random_start(rng, n, a.alpha)
        args = (theta, 0.1, n, a.states, np.asarray(a.priors), 1.0, 0.0, 1.0, 4000, 1e-9, 1e-12)
        yield f"local_search n={n}", "local_search", args


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    ns = parser.parse_args()
    if not NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed")

    rng = np.random.default_rng(1)
    print(f"{'case':<24}{'numpy s':>12}{'numba s':>12}{'speedup':>10}{'warm-up s':>12}")
    for label, name, args in cases(rng):
        fast = getattr(kernels, f"{name}_jit")
        slow = getattr(kernels, f"{name}_numpy")
        t0 = time.perf_counter()
        a = fast(*args)
        warm = time.perf_counter() - t0
        b = slow(*args)
        va = a if np.isscalar(a) else a[1]
        vb = b if np.isscalar(b) else b[1]
        assert abs(va - vb) < 1e-8, (label, va, vb)
        t_fast = best_of(lambda: fast(*args), ns.repeat)
        t_slow = best_of(lambda: slow(*args), max(1, ns.repeat // 2))
        print(f"{label:<24}{t_slow:>12.5f}{t_fast:>12.5f}{t_slow / t_fast:>10.1f}{warm:>12.3f}")


if __name__ == "__main__":
    main()
