"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from maintvar import _pykernels, kernels, rfimpact
from maintvar.rng import stream

try:
    from maintvar import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def split_case():
    g = stream(0, "bench-split")
    X = np.ascontiguousarray((g.random((2000, 12)) < 0.2).astype(float))
    y = g.standard_normal(2000)
    idx = np.arange(2000, dtype=np.int64)
    feats = np.arange(12, dtype=np.int64)
    yc = y - y.mean()
    return lambda mod: mod.best_split(X, yc, idx, feats, 2)


def forecast_case():
    g = stream(0, "bench-fc")
    k, p = 6, 8
    alpha = g.standard_normal(k)
    beta = np.ascontiguousarray(g.normal(0, 0.05, (p, k, k)))
    hist = np.ascontiguousarray(g.standard_normal((p, k)))
    return lambda mod: mod.forecast_recursive(alpha, beta, hist, 365)


def forest_case():
    g = stream(0, "bench-forest")
    X = (g.random((1500, 12)) < 0.2).astype(float)
    y = 4000 - 300 * X[:, 0] + 50 * g.standard_normal(1500)
    cfg = rfimpact.RFConfig(n_trees=20)

    def run(mod):
        saved = kernels.best_split, kernels.predict_tree
        kernels.best_split, kernels.predict_tree = mod.best_split, mod.predict_tree
        try:
            rfimpact.fit_random_forest(X, y, cfg)
        finally:
            kernels.best_split, kernels.predict_tree = saved

    return run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation`")
        return
    print(f"{'kernel':<24}{'python (s)':>12}{'cython (s)':>12}{'speedup':>10}")
    for name, make in [("best_split 2000x12", split_case), ("forecast 365 steps", forecast_case),
                       ("forest fit 20 trees", forest_case)]:
        case = make()
        py = best_of(lambda: case(_pykernels), args.repeat)
        cy = best_of(lambda: case(_ckernels), args.repeat)
        print(f"{name:<24}{py:>12.4f}{cy:>12.4f}{py / cy:>9.1f}x")


if __name__ == "__main__":
    main()
