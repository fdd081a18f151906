"""Time the compiled kernels against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--sizes 41,81,321]

Both backends are imported directly, so the environment variable that forces
the fallback has no effect here. Prints one row per (kernel, size) with the
best time of each backend and the speedup.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from fpsg import _core_py

try:
    from fpsg import _core
except ImportError:  # pragma: no cover
    _core = None


def cases(n, m=6, nq=32, seed=0):
    rng = np.random.default_rng(seed)
    v = np.linspace(-1.0, 1.0, n)
    dv = v[1] - v[0]
    b = rng.standard_normal((nq, n))
    d = rng.random((nq, n)) + 0.1
    f = rng.random((nq, n))
    eye = np.eye(m)
    lower = 0.1 * rng.standard_normal((n, m, m))
    upper = 0.1 * rng.standard_normal((n, m, m))
    diag = lower * 0 + 4 * eye + 0.1 * rng.standard_normal((n, m, m))
    rhs = rng.standard_normal((n, m))
    delta = 1.0 + 0.5 * rng.random(nq)
    return {
        "fp_apply": lambda k: k.fp_apply(b, d, f, dv),
        "fp_tridiag": lambda k: k.fp_tridiag(b, d, dv),
        "block_tridiag_factor": lambda k: k.block_tridiag_factor(lower, diag, upper),
        "block_tridiag_solve": (
            lambda k, fac={}: k.block_tridiag_solve(
                fac.setdefault(k.__name__, k.block_tridiag_factor(lower, diag, upper)), rhs
            )
        ),
        "bc_drift_sharp": lambda k: k.bc_drift_sharp(f, v, delta),
    }


def best(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--sizes", default="41,81,321")
    args = parser.parse_args(argv)
    if _core is None:
        print("compiled extension not built; only the numpy fallback is available")
        return 1
    print(f"{'kernel':<22}{'N':>6}{'cython [ms]':>14}{'numpy [ms]':>14}{'speedup':>10}")
    for n in (int(s) for s in args.sizes.split(",")):
        for name, call in cases(n).items():
            tc = best(lambda: call(_core), args.repeat)
            tp = best(lambda: call(_core_py), args.repeat)
            print(f"{name:<22}{n:>6}{1e3 * tc:>14.4f}{1e3 * tp:>14.4f}{tp / tc:>10.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
