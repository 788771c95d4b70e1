"""Throughput comparison of the compiled and pure-numpy metric kernels.

Both implementations live side by side in ``entrank.kernels``; at import time
the package picks one based on numba availability and ENTRANK_NO_NUMBA. This
script times both twins in the same process and checks they agree bitwise
where determinism is guaranteed (everything except the Monte-Carlo sampler,
whose two paths draw from different RNG streams).

Usage:
    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --docs 200000 --rankings 400 --repeats 7
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from entrank import kernels


def _best_ms(func, repeats: int) -> float:
    return min(timeit.repeat(func, number=1, repeat=repeats)) * 1000.0


def _relevance(n: int, n_pos: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    rel = np.zeros(n, dtype=np.uint8)
    rel[rng.choice(n, size=n_pos, replace=False)] = 1
    return rel


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--docs", type=int, default=100_000,
                        help="ranking length for the single-AP benchmark")
    parser.add_argument("--rankings", type=int, default=200,
                        help="rows in the batched-AP benchmark")
    parser.add_argument("--trials", type=int, default=2_000,
                        help="permutations in the Monte-Carlo benchmark")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats; the minimum is reported")
    args = parser.parse_args(argv)

    if not kernels.HAVE_NUMBA:
        print("numba is not importable here; only the numpy path can be timed.")
        print("Install the 'fast' extra (pip install entrank[fast]) to compare.")

    rel = _relevance(args.docs, max(1, args.docs // 20), seed=11)
    mat = np.stack([_relevance(args.docs // 20, args.docs // 400 + 1, seed=s)
                    for s in range(args.rankings)])
    mc = (2_000, 150, args.trials, 3)

    cases = []
    cases.append(("ap", f"{args.docs:,} docs",
                  lambda: kernels._ap_numpy(rel),
                  (lambda: kernels._ap_jit(rel)) if kernels.HAVE_NUMBA else None))

    def _batch_jit():
        out = np.empty(mat.shape[0], dtype=np.float64)
        kernels._ap_batch_jit(mat, out)
        return out

    cases.append(("ap_batch", f"{mat.shape[0]} x {mat.shape[1]:,}",
                  lambda: kernels._ap_batch_numpy(mat),
                  _batch_jit if kernels.HAVE_NUMBA else None))
    cases.append(("random_ap_samples", f"n=2,000 trials={args.trials:,}",
                  lambda: kernels._random_ap_samples_numpy(*mc),
                  (lambda: kernels._random_ap_samples_jit(*mc)) if kernels.HAVE_NUMBA else None))

    print(f"{'kernel':<20} {'input':<24} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for name, shape, numpy_fn, jit_fn in cases:
        if jit_fn is not None:
            jit_fn()  # compile outside the timed region
            if name != "random_ap_samples":
                got_np, got_jit = numpy_fn(), jit_fn()
                if not np.array_equal(np.atleast_1d(got_np), np.atleast_1d(got_jit)):
                    raise SystemExit(f"{name}: paths disagree; benchmark aborted")
        numpy_ms = _best_ms(numpy_fn, args.repeats)
        if jit_fn is None:
            print(f"{name:<20} {shape:<24} {numpy_ms:>10.3f} {'-':>10} {'-':>8}")
        else:
            jit_ms = _best_ms(jit_fn, args.repeats)
            print(f"{name:<20} {shape:<24} {numpy_ms:>10.3f} {jit_ms:>10.3f} "
                  f"{numpy_ms / jit_ms:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
