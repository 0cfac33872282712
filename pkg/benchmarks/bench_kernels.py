"""Benchmark: compiled kernels vs the numpy fallback.

Times the per-step trajectory kernels on a realistic block shape and the
full occupation-measure pipeline, and verifies on the way that both
backends produce bit-identical output.

Run:  python3 benchmarks/bench_kernels.py [--steps 2e7]
"""

import argparse
import time

import numpy as np

from critsds._kernels import get_backend
from critsds import engine, maps, measure
from critsds.maps import Dist


def time_kernel(kern, name, nargs, k=4096, n=256, reps=5):
    rng = np.random.default_rng(7)
    params = [np.ascontiguousarray(np.abs(rng.normal(1.0, 0.3, (k, n))) + 0.05)
              for _ in range(nargs)]
    out = np.empty((k, n))
    best = np.inf
    for _ in range(reps):
        x = np.abs(rng.normal(1.0, 1.0, n))
        t0 = time.perf_counter()
        getattr(kern, name)(x, *params, out)
        best = min(best, time.perf_counter() - t0)
    return k * n / best


def pipeline_throughput(backend_name, total_steps, chains=256):
    fam = maps.AffineFamily(Dist.normal(0, 0.5), Dist.lognormal(0, 0.5), 1.0)
    cfg = engine.TrajectoryConfig(seed=11, steps=int(total_steps) // chains,
                                  n_chains=chains, initial=1.0)
    t0 = time.perf_counter()
    m = measure.LogBinnedMeasure(measure.BinLayout())
    for _, vals in engine.iter_value_blocks(fam, cfg, backend_name=backend_name):
        m.add_values(vals)
    dt = time.perf_counter() - t0
    return m, cfg.steps * chains / dt


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=float, default=2e7,
                    help="total steps for the pipeline benchmark")
    args = ap.parse_args()

    backends = {}
    for name in ("compiled", "python"):
        try:
            backends[name] = get_backend(name)
        except ImportError:
            print(f"[{name}] not available")
    if len(backends) < 2:
        print("only one backend present; timing it alone")

    kernels = [("affine_block", 2), ("goldie_max_block", 3),
               ("goldie_sqrt_block", 3), ("reflected_block", 1)]
    print(f"{'kernel':20s} " + " ".join(f"{b:>14s}" for b in backends) + "   ratio")
    for kname, nargs in kernels:
        rates = {b: time_kernel(k, kname, nargs) for b, k in backends.items()}
        row = " ".join(f"{rates[b]/1e6:11.1f} M/s" for b in backends)
        ratio = (rates.get("compiled", np.nan) / rates.get("python", np.nan)
                 if len(rates) == 2 else float("nan"))
        print(f"{kname:20s} {row}   {ratio:5.1f}x")

    print(f"\nfull pipeline (affine + binning), {args.steps:.0f} steps:")
    results = {}
    for b in backends:
        m, rate = pipeline_throughput(b, args.steps)
        results[b] = (m, rate)
        print(f"  {b:10s} {rate/1e6:8.1f} M steps/s")
    if len(results) == 2:
        mc, mp = results["compiled"][0], results["python"][0]
        same = np.array_equal(mc.counts, mp.counts)
        print(f"  measures bit-identical across backends: {same}")
        if not same:
            raise SystemExit("BACKEND MISMATCH")


if __name__ == "__main__":
    main()
