"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends are called directly on the same inputs, and every pair of
results is checked for bit equality before timings are reported.
"""
import argparse
import sys
import time

import numpy as np

from lift_spectra import _pykernels, kernels
from lift_spectra._rng import edge_key
from lift_spectra.graphs import catalog, cycle
from lift_spectra.lift import random_lift


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def same(a, b):
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def cases():
    yield "permutation n=10^5", lambda k: k.permutation(edge_key(1, 0), 100_000)
    yield "permutation n=10^6", lambda k: k.permutation(edge_key(1, 0), 1_000_000)

    for name, n in (("petersen", 1000), ("k4", 25_000)):
        h = random_lift(catalog(name), n, 3)
        src, dst = h.endpoints
        x = np.random.default_rng(0).standard_normal(h.order)
        X = np.random.default_rng(0).standard_normal((h.order, 4))
        yield f"apply {name} N={h.order}", lambda k, s=src, d=dst, x=x: k.adjacency_apply(s, d, x)
        yield f"apply {name} N={h.order} block=4", lambda k, s=src, d=dst, X=X: k.adjacency_apply(s, d, X)

    for g in (catalog("petersen"), catalog("dodecahedral"), cycle(22)):
        eu = np.array([u for u, v in g.edges if u != v], dtype=np.int64)
        ev = np.array([v for u, v in g.edges if u != v], dtype=np.int64)
        yield f"cheeger {g.name} m={g.m}", lambda k, g=g, eu=eu, ev=ev: k.cheeger_min(g.m, eu, ev)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    compiled = kernels.compiled_backend
    if compiled is None:
        print("compiled extension not available; only the fallback is timed", file=sys.stderr)
    print(f"{'kernel':40s} {'python ms':>11s} {'compiled ms':>12s} {'speedup':>8s}")
    for label, call in cases():
        tp, rp = best_of(lambda: call(_pykernels), args.repeat)
        if compiled is None:
            print(f"{label:40s} {tp * 1e3:11.2f} {'-':>12s} {'-':>8s}")
            continue
        tc, rc = best_of(lambda: call(compiled), args.repeat)
        if not same(rp, rc):
            raise SystemExit(f"backends disagree on {label}")
        print(f"{label:40s} {tp * 1e3:11.2f} {tc * 1e3:12.2f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
