"""Benchmark the numpy and numba simulation backends on one workload.

Usage::

    python3 benchmarks/bench_kernels.py [--seeds 16] [--horizon 20000]

Runs the same momentum ensemble (heavy-tail MLE, cosine schedule, minibatch
oracle) through both backends, reports wall time per backend and the maximum
relative disagreement of the seed-averaged squared distances.  The numpy
backend batches all seeds through one vectorized kernel; the numba backend
compiles a per-seed kernel and fans seeds out across threads.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from sgdbounds.backend import BACKEND_ENV, have_numba  # noqa: E402
from sgdbounds.optimize import OptimizerConfig, run_ensemble  # noqa: E402
from sgdbounds.problems import synth_heavy_tail  # noqa: E402
from sgdbounds.schedules import ScheduleSpec  # noqa: E402


def bench(seeds: int, horizon: int) -> int:
    problem = synth_heavy_tail(n=100, d=10, lam=1.0, seed=3)
    spec = ScheduleSpec(
        family="Cosine", horizon=horizon, eta_max=0.008, eta_min=0.0005
    )
    config = OptimizerConfig(
        method="Momentum",
        batch_size=8,
        horizon=horizon,
        seed=2024,
        x1=np.full(problem.dim, 3.0),
        beta=0.9,
        override_cap=True,
    )
    idx = list(range(seeds))

    results = {}
    for backend in ("numpy", "numba"):
        if backend == "numba" and not have_numba():
            print("numba unavailable; skipping")
            continue
        os.environ[BACKEND_ENV] = "1" if backend == "numba" else "0"
        if backend == "numba":
            # Warm-up: exclude JIT compilation from the timed run.
            run_ensemble(problem, spec, config, [0, 1])
        t0 = time.perf_counter()
        ens = run_ensemble(problem, spec, config, idx)
        dt = time.perf_counter() - t0
        results[backend] = (dt, ens)
        steps = seeds * horizon
        print(
            f"{backend:>6}: {dt:8.3f}s  ({steps / dt / 1e6:.2f} M steps/s, "
            f"sup mean dist2 = {ens.sup_mean_dist2:.6g})"
        )

    if len(results) == 2:
        a = results["numpy"][1].mean_dist2[1:]
        b = results["numba"][1].mean_dist2[1:]
        rel = float(np.nanmax(np.abs(a - b) / np.maximum(1.0, np.abs(a))))
        agree = rel < 1e-9
        print(f"agreement: max relative difference {rel:.3e} ({'ok' if agree else 'DISAGREE'})")
        speed = results["numpy"][0] / results["numba"][0]
        print(f"speedup numba vs numpy: {speed:.2f}x")
        return 0 if agree else 1
    return 0


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=16)
    ap.add_argument("--horizon", type=int, default=20_000)
    args = ap.parse_args()
    return bench(args.seeds, args.horizon)


if __name__ == "__main__":
    raise SystemExit(main())
