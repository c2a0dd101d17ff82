"""Compare the compiled and pure-numpy pair-sum kernels.

Usage: python3 benchmarks/bench_kernels.py [--radius 25] [--queries 20] [--repeat 3]
"""

import argparse
import time

import numpy as np

from quatell import _fallback
from quatell.lattice import lipschitz

try:
    from quatell import _kernels
except ImportError:  # extension not built
    _kernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radius", type=float, default=25.0)
    ap.add_argument("--queries", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    pts = np.concatenate(list(lipschitz().half_chunks(args.radius)))
    rng = np.random.default_rng(0)
    qs = rng.uniform(-0.5, 0.5, size=(args.queries, 4))
    print(f"{len(pts)} half-lattice points x {len(qs)} queries")
    print(f"{'kernel':<22}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}{'max diff':>12}")
    cases = [("taylor=1", dict(taylor=1)), ("taylor=3", dict(taylor=3)),
             ("taylor=1 + gradient", dict(taylor=1, grad=True))]
    for label, kw in cases:
        tp, ref = best_of(lambda: _fallback.pair_sum(pts, qs, **kw), args.repeat)
        if _kernels is None:
            print(f"{label:<22}{tp:>12.3f}{'n/a':>12}")
            continue
        tc, got = best_of(lambda: _kernels.pair_sum(pts, qs, **kw), args.repeat)
        diff = np.abs(got[0] - ref[0]).max()
        if kw.get("grad"):
            diff = max(diff, np.abs(got[1] - ref[1]).max())
        print(f"{label:<22}{tp:>12.3f}{tc:>12.3f}{tp / tc:>10.1f}{diff:>12.1e}")


if __name__ == "__main__":
    main()
