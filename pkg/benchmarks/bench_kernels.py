"""Time the numba and pure-numpy paths of every kernel on the same inputs.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from roundelim import _kernels
from roundelim.graphs import generate_regular_graph


def _inputs(rng):
    g = generate_regular_graph(200, 6, 1)
    nbr, rev = g.nbr_array, g.rev_array
    trials, n, d, b = 2000, 50, 10, 3
    h = generate_regular_graph(n, d, 2)
    perms = np.argsort(rng.random((trials, n, d)), axis=2)
    sel = np.stack([rng.choice(d, b, replace=False) for _ in range(trials * n)]).reshape(trials, n, b)
    labels = (rng.random(nbr.shape) < 0.3).astype(np.int64)
    return {
        "pb_pmf": (rng.random(400),),
        "mean_abs_signed_sum": (rng.random(16),),
        "min_sum_margins": (rng.random((100_000, 32)), 4),
        "zero_round_matches": (sel, perms, h.nbr_array, h.rev_array),
        "girth": (nbr,),
        "edge_classes": (labels, nbr, rev),
    }


def _time(fn, args, repeat):
    fn(*args)  # warm up (jit compile or cache load)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        print("numba not installed; only the numpy path is available")
    inputs = _inputs(np.random.default_rng(0))
    print(f"{'kernel':<22}{'numba [ms]':>12}{'numpy [ms]':>12}{'ratio':>8}")
    for name, kargs in inputs.items():
        fast = _kernels.numba_impl[name]
        slow = _kernels.numpy_impl[name]
        a = np.asarray(fast(*kargs))
        c = np.asarray(slow(*kargs))
        assert np.allclose(a, c), name
        tf = _time(fast, kargs, args.repeat) * 1e3
        ts = _time(slow, kargs, args.repeat) * 1e3
        print(f"{name:<22}{tf:>12.3f}{ts:>12.3f}{ts / tf:>8.1f}")


if __name__ == "__main__":
    main()
