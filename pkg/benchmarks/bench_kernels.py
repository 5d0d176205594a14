"""Compare the compiled and NumPy kernel backends on identical inputs.

Run with ``python3 benchmarks/bench_kernels.py [--points N] [--repeat R]``.
"""
import argparse
import timeit

import numpy as np

from heisplane import _kernels_py, kernels

try:
    from heisplane import _ckernels
except ImportError:  # compiled core not built
    _ckernels = None


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    Y = np.ascontiguousarray(rng.normal(size=(args.points, 4)))
    W = np.ascontiguousarray(rng.random(args.points))
    C = kernels.C_GAMMA
    center = np.array([0.6, 0.1, -0.2, 0.3])
    cases = {
        "axis_kernels": lambda m: m.axis_kernels(Y, 0.8, C),
        "bump_sums": lambda m: m.bump_sums(Y, W, 0.8, C, center, 1.0, 1.0),
    }
    backends = {"python": _kernels_py}
    if _ckernels is not None:
        backends["cython"] = _ckernels

    print(f"points={args.points} repeat={args.repeat}")
    for name, fn in cases.items():
        times = {}
        for label, mod in backends.items():
            times[label] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        line = "  ".join(f"{k}={v * 1e3:8.2f} ms" for k, v in times.items())
        if "cython" in times:
            ref, out = fn(_kernels_py), fn(_ckernels)
            diff = float(np.max(np.abs(ref - out)) / max(np.max(np.abs(ref)), 1e-300))
            line += f"  speedup={times['python'] / times['cython']:5.2f}x  max_rel_diff={diff:.1e}"
        print(f"{name:13s} {line}")


if __name__ == "__main__":
    main()
