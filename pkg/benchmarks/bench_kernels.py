"""Throughput comparison: compiled kernels vs the pure-NumPy fallback.

Run as `python benchmarks/bench_kernels.py`. Covers the two hot loops:
batch minimum-distance detection (Monte Carlo inner loop) and the
penalized packing objective with gradient (optimizer inner loop).
"""

import time

import numpy as np

from conepack import _ref, catalog
from conepack.optimizer import _initial_points

try:
    from conepack import _core
except ImportError:
    _core = None


def time_call(fn, *args, repeats=5, min_time=0.2):
    best = float("inf")
    for _ in range(repeats):
        n = 0
        t0 = time.perf_counter()
        while time.perf_counter() - t0 < min_time:
            fn(*args)
            n += 1
        best = min(best, (time.perf_counter() - t0) / n)
    return best


def bench_detect(batch=500_000):
    pts = np.ascontiguousarray(catalog.get("c-pe-8").constellation.points)
    rng = np.random.default_rng(0)
    labels = rng.integers(0, pts.shape[0], batch)
    y = pts[labels] + 0.15 * rng.standard_normal((batch, 3))
    rows = []
    for name, mod in (("numpy", _ref), ("cython", _core)):
        if mod is None:
            continue
        dt = time_call(mod.detect, y, pts)
        rows.append((f"detect[{name}]", batch / dt / 1e6, "Msym/s"))
        assert np.array_equal(mod.detect(y, pts), _ref.detect(y, pts))
    return rows


def bench_penalty(m=8, evals=2000):
    rng = np.random.Generator(np.random.Philox(seed=[0, 0]))
    x = _initial_points(rng, m, 1.0).ravel()

    def run(mod):
        for _ in range(evals):
            mod.penalty_value_grad(x, m, 1e4, 0, 1.0)

    rows = []
    for name, mod in (("numpy", _ref), ("cython", _core)):
        if mod is None:
            continue
        dt = time_call(run, mod)
        rows.append((f"penalty_grad[{name}]", evals / dt / 1e3, "keval/s"))
    v_ref, g_ref = _ref.penalty_value_grad(x, m, 1e4, 0, 1.0)
    if _core is not None:
        v, g = _core.penalty_value_grad(x, m, 1e4, 0, 1.0)
        assert abs(v - v_ref) <= 1e-12 * max(1.0, abs(v_ref))
        assert np.allclose(g, g_ref, rtol=1e-12, atol=1e-12)
    return rows


def main():
    if _core is None:
        print("compiled extension not available; benchmarking fallback only")
    rows = bench_detect() + bench_penalty()
    width = max(len(r[0]) for r in rows)
    for name, rate, unit in rows:
        print(f"{name:{width}s}  {rate:10.2f} {unit}")
    by_kernel = {}
    for name, rate, _ in rows:
        kernel, backend = name[:-1].split("[")
        by_kernel.setdefault(kernel, {})[backend] = rate
    for kernel, rates in by_kernel.items():
        if {"numpy", "cython"} <= rates.keys():
            print(f"{kernel}: cython is {rates['cython'] / rates['numpy']:.1f}x numpy")


if __name__ == "__main__":
    main()
