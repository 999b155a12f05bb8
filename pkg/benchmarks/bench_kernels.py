"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--scenario crossing]

Times each kernel at a few input sizes, then a full scenario run with each
backend swapped in.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from stereofollow import kernels
from stereofollow.sim import load_scenario, run_scenario


def _best(fn, repeat: int) -> float:
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 4
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def _hist_case(n: int, rng):
    hue = rng.uniform(0, 360, n)
    hue[rng.random(n) < 0.05] = np.nan
    sat = rng.random(n)
    return lambda b: b.hue_bin_counts(hue, sat, 0.1, 36)


def _ray_case(n: int, rng):
    pts = np.ascontiguousarray(rng.uniform(-5, 5, (n, 2)))
    centers = np.ascontiguousarray(rng.uniform(-5, 5, (3, 2)))
    return lambda b: b.segments_blocked(0.0, 0.0, pts, centers, 0.25)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scenario", default="crossing")
    args = ap.parse_args(argv)

    backends = {"python": kernels.python_backend}
    if kernels.compiled_backend is not None:
        backends["cython"] = kernels.compiled_backend
    else:
        print("compiled backend not built; timing the numpy fallback only")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}{'n':>8}" + "".join(f"{name:>14}" for name in backends) + f"{'speedup':>10}")
    for label, make in (("hue_bin_counts", _hist_case), ("segments_blocked", _ray_case)):
        for n in (18, 500, 50_000):
            case = make(n, rng)
            times = {name: _best(lambda b=b: case(b), args.repeat) for name, b in backends.items()}
            row = f"{label:<18}{n:>8}" + "".join(f"{t * 1e6:>12.1f}us" for t in times.values())
            if len(times) == 2:
                row += f"{times['python'] / times['cython']:>9.1f}x"
            print(row)

    sc = load_scenario(args.scenario)
    saved = kernels.backend
    try:
        for name, b in backends.items():
            kernels.backend = b
            t = min(timeit.repeat(lambda: run_scenario(sc), number=1, repeat=max(1, args.repeat // 2)))
            print(f"run_scenario({args.scenario}, {sc.n_frames} frames) with {name}: {t:.3f} s")
    finally:
        kernels.backend = saved


if __name__ == "__main__":
    main()
