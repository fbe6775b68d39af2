#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Times the per-trial reductions on deployment sizes matching the hardening
experiments and one end-to-end hardening run. Run after an editable install:

    python benchmarks/bench_kernels.py
"""

import time
from dataclasses import replace

import numpy as np

from cfmimo import _kernels_py
from cfmimo import backend
from cfmimo.harness import preset, run

try:
    from cfmimo import _kernels as _compiled
except ImportError:
    _compiled = None


def time_fn(fn, *args, repeat=5, inner=20):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / inner)
    return best


def bench_reductions():
    rng = np.random.default_rng(0)
    rows = []
    for n_aps in (80, 800, 80_000):
        r = rng.uniform(0.0, 500.0, n_aps)
        bk = rng.uniform(1e-9, 1.0, n_aps)
        bj = rng.uniform(1e-9, 1.0, n_aps)
        cases = [
            ("singleslope_sums", (r, 3.76)),
            ("threeslope_sums", (r, 10.0, 50.0, 1.0)),
            ("cross_sums", (bk, bj)),
            ("weighted_gain", (bk, bj)),
        ]
        for name, args in cases:
            t_py = time_fn(getattr(_kernels_py, name), *args)
            if _compiled is None:
                rows.append((name, n_aps, t_py, None))
            else:
                t_cy = time_fn(getattr(_compiled, name), *args)
                rows.append((name, n_aps, t_py, t_cy))
    print(f"{'kernel':20s} {'APs':>8s} {'numpy':>12s} {'cython':>12s} {'speedup':>8s}")
    for name, n_aps, t_py, t_cy in rows:
        cy = f"{t_cy * 1e6:10.1f} us" if t_cy else "        n/a"
        speed = f"{t_py / t_cy:7.1f}x" if t_cy else "     n/a"
        print(f"{name:20s} {n_aps:8d} {t_py * 1e6:10.1f} us {cy} {speed}")


def bench_end_to_end():
    import os

    cfg = preset("fig5", seed=1).with_overrides({"trials": 2000})
    cfg = replace(cfg, param_sets=cfg.param_sets[:1])
    results = {}
    for name in ("numpy", "cython"):
        if name == "cython" and _compiled is None:
            continue
        os.environ["CFMIMO_BACKEND"] = name
        import importlib

        import cfmimo.backend

        importlib.reload(cfmimo.backend)
        import cfmimo.harness

        importlib.reload(cfmimo.harness)
        t0 = time.perf_counter()
        cfmimo.harness.run(cfg)
        results[name] = time.perf_counter() - t0
    os.environ.pop("CFMIMO_BACKEND", None)
    print("\nend-to-end hardening run (2000 trials, E[L]=785):")
    for name, dt in results.items():
        print(f"  {name:8s} {dt:6.2f} s")
    if len(results) == 2:
        print(f"  speedup  {results['numpy'] / results['cython']:.2f}x")


if __name__ == "__main__":
    print(f"active backend: {backend.BACKEND}\n")
    bench_reductions()
    bench_end_to_end()
