"""Benchmark the compiled kernels against the pure-Python fallback.

Runs the serial min-cut and a full distributed solve on synthetic
two-region instances of growing size, once per backend, and prints a
timing table.  Both backends produce identical labelings (asserted here
and in the test suite); only speed differs.

    python benchmarks/bench_backends.py [--sizes 32,48,64] [--iters 3]
"""

import argparse
import time

import numpy as np

import dope.maxflow
import dope.solvers
from dope import _core_py
from dope.admm import AdmmConfig, run
from dope.energy import EnergyModel, build_potts_weights
from dope.grid import GridImage, GridShape
from dope.maxflow import solve_binary
from dope.partition import make_partition

try:
    from dope import _core
except ImportError:
    _core = None


def instance(size, seed=0):
    rng = np.random.default_rng(seed)
    yy, xx = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    fg = ((yy - size / 2) ** 2 + (xx - size / 2) ** 2) < (size / 3) ** 2
    vals = np.where(fg, 0.72, 0.28) + rng.normal(0, 0.1, (size, size))
    img = GridImage(GridShape((size, size)), np.clip(vals, 0, 1).ravel())
    u = (0.5 - img.data[:, 0]) * 14.0
    w = build_potts_weights(img, 3, sigma=0.25, contrast=True)
    return img, EnergyModel(u, w, lam=1.0)


def use_backend(mod):
    dope.maxflow.bk_maxflow = mod.bk_maxflow
    dope.solvers._icm_sweep_kernel = mod.icm_sweep


def bench(fn, repeat=3):
    best = np.inf
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--sizes", default="32,48,64")
    ap.add_argument("--iters", type=int, default=3, help="distributed iterations")
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _core is None:
        print("compiled core unavailable; nothing to compare")
        return

    backends = [("compiled", _core), ("python", _core_py)]
    print(f"{'task':<28}{'n':>8}{'compiled':>12}{'python':>12}{'speedup':>10}")
    for size in sizes:
        img, model = instance(size)
        times = {}
        labels = {}
        for name, mod in backends:
            use_backend(mod)
            times[name], labels[name] = bench(
                lambda: solve_binary(model.unary, model.weights, model.lam))
        assert np.array_equal(labels["compiled"][0], labels["python"][0])
        print(f"{'serial min-cut':<28}{model.n:>8}{times['compiled']:>11.4f}s"
              f"{times['python']:>11.4f}s{times['python'] / times['compiled']:>9.1f}x")

        part = make_partition(img.shape, (4, 4), 25)
        cfg = AdmmConfig(max_iters=args.iters)
        for name, mod in backends:
            use_backend(mod)
            times[name], labels[name] = bench(lambda: run(model, part, cfg), repeat=1)
        assert np.array_equal(labels["compiled"][0], labels["python"][0])
        print(f"{'distributed ({} iters)'.format(args.iters):<28}{model.n:>8}"
              f"{times['compiled']:>11.4f}s{times['python']:>11.4f}s"
              f"{times['python'] / times['compiled']:>9.1f}x")
    use_backend(_core)


if __name__ == "__main__":
    main()
