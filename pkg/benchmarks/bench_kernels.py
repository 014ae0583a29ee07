"""Compare the compiled and numpy kernel backends on representative calls.

Run from the repository root:

    python benchmarks/bench_kernels.py [--repeat 20]

Each case reports the median wall time per call for every importable
backend, the speedup of the compiled one, and the largest relative
difference between their results.
"""
import argparse
import statistics
import time

import numpy as np

from ccball._core import available_backends

EE = ((1, 1.0, 2.0), (1, 2.0, 2.0))       # f = exp(-1/x^2), g = exp(-2/x^2)
TOL = (1e-300, 1e-12, 40)


def _cases():
    fc, gc = EE
    nodes, weights = np.polynomial.legendre.leggauss(32)

    def moments(k):
        return k.moments(fc, gc, 0.5, 0.5, 0.0, 0.8, -1.0, *TOL, 6)[0]

    def near_turning(k):
        xs = k.turning_point(fc, gc, 1.0, 1.0, 5.0)
        return k.moments(fc, gc, 1.0, 1.0, 0.0, xs * (1 - 1e-9), xs, *TOL, 6)[0]

    def x_of_r(k):
        xs = k.turning_point(fc, gc, 1.0, 1.0, 5.0)
        return (k.x_of_r(fc, gc, 1.0, 1.0, 1.0, xs, 5.0, *TOL, 1e-12),)

    def column(k):
        xs = k.turning_point(fc, gc, 1.0, 1.0, 5.0)
        return (k.volume_column(fc, gc, 1.0, 1.0, xs, xs, nodes, weights, 1e-300, 1e-10, 40),)

    return {"moments": moments, "moments near x*": near_turning, "x_of_r": x_of_r,
            "volume_column": column}


def _time(fn, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return statistics.median(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    backends = available_backends()
    names = sorted(backends)
    print(f"backends: {', '.join(names)}")
    header = f"{'case':<18}" + "".join(f"{n + ' [ms]':>16}" for n in names)
    print(header + f"{'speedup':>10}{'max rel diff':>14}")
    for case, fn in _cases().items():
        times, results = {}, {}
        for name in names:
            k = backends[name]
            results[name] = np.asarray(fn(k), dtype=float)
            times[name] = _time(lambda: fn(k), args.repeat)
        line = f"{case:<18}" + "".join(f"{1e3 * times[n]:>16.3f}" for n in names)
        if len(names) == 2:
            speed = times["python"] / times["cython"]
            a, b = results["cython"], results["python"]
            diff = np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))
            line += f"{speed:>10.1f}{diff:>14.2e}"
        print(line)


if __name__ == "__main__":
    main()
