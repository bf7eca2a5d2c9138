"""Time the compiled search kernels against the numpy fallback.

Run with ``python benchmarks/bench_kernels.py``.  Each kernel is checked for
identical output before timing.
"""

import argparse
import timeit

import numpy as np

from mcamsim import kernels
from mcamsim.kernels import _fallback

try:
    from mcamsim.kernels import _native
except ImportError:
    _native = None


def cases(n_q, n_r, width, states, rng):
    lut = rng.random((states, states))
    q = rng.integers(0, states, (n_q, width))
    r = rng.integers(0, states, (n_r, width))
    tables = rng.random((n_r, width, states))
    qb = kernels.pack_bits(rng.integers(0, 2, (n_q, 256)))
    rb = kernels.pack_bits(rng.integers(0, 2, (n_r, 256)))
    scores = rng.random((n_q, n_r))
    return {
        "lut_scores": lambda impl: kernels.lut_scores(lut, q, r, impl),
        "table_scores": lambda impl: kernels.table_scores(tables, q, impl),
        "hamming_scores": lambda impl: kernels.hamming_scores(qb, rb, impl),
        "first_argmin": lambda impl: kernels.first_argmin(scores, impl),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--queries", type=int, default=200)
    ap.add_argument("--rows", type=int, default=1000)
    ap.add_argument("--width", type=int, default=32)
    ap.add_argument("--bits", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _native is None:
        print("compiled kernels not built; only the fallback is available")
    impls = [("python", _fallback)] + ([("native", _native)] if _native else [])
    work = cases(args.queries, args.rows, args.width, 2 ** args.bits, np.random.default_rng(0))
    print(f"{'kernel':<16}" + "".join(f"{n + ' ms':>12}" for n, _ in impls) + f"{'speedup':>10}")
    for name, fn in work.items():
        if _native is not None:
            assert np.array_equal(fn(_fallback), fn(_native)), name
        ms = [1e3 * min(timeit.repeat(lambda: fn(m), number=1, repeat=args.repeat)) for _, m in impls]
        speed = f"{ms[0] / ms[1]:>9.1f}x" if len(ms) == 2 else ""
        print(f"{name:<16}" + "".join(f"{t:>12.2f}" for t in ms) + speed)


if __name__ == "__main__":
    main()
