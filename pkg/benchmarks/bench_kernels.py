"""Compare the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from mesocollapse import kernels


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    impls = kernels.backends()
    if "compiled" not in impls:
        print("compiled extension not built; only the numpy fallback is available")

    rng = np.random.default_rng(0)
    dW = rng.standard_normal((4096, 256)) / 16
    a = np.array([-0.05 - 0.5j, -0.01 + 0.5j])
    b = np.array([0.3, -0.3])
    incr = rng.standard_normal((2000, 1000)) * 0.03
    cases = {
        "iterated_sums 4096x256": lambda m: m.iterated_sums(dW, 0.5),
        "evolve exact 2000x1000": lambda m: m.evolve_diagonal([0.7071, 0.7071], a, b, incr, 1e-3, 10, 0),
        "evolve heun  2000x1000": lambda m: m.evolve_diagonal([0.7071, 0.7071], a, b, incr, 1e-3, 10, 1),
        "evolve kicks 2000x1000": lambda m: m.evolve_diagonal([0.7071, 0.7071], a, b, incr, 1e-3, 10, 2),
    }
    print(f"{'kernel':26s} {'numpy [ms]':>11s} {'compiled [ms]':>14s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, fn in cases.items():
        t_py, out_py = best_of(lambda: fn(impls["python"]), args.repeat)
        if "compiled" in impls:
            t_c, out_c = best_of(lambda: fn(impls["compiled"]), args.repeat)
            diff = np.max(np.abs(out_py - out_c))
            print(f"{name:26s} {1e3 * t_py:11.2f} {1e3 * t_c:14.2f} {t_py / t_c:8.1f} {diff:11.2e}")
        else:
            print(f"{name:26s} {1e3 * t_py:11.2f} {'-':>14s} {'-':>8s} {'-':>11s}")


if __name__ == "__main__":
    main()
