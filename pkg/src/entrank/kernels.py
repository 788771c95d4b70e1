"""Numeric kernels for ranking metrics.

The hot loops (average precision over long rankings, batched evaluation of
many rankings, Monte-Carlo estimates over random permutations) are compiled
with numba when it is importable. A pure-numpy twin of every kernel is kept
alongside; setting ``ENTRANK_NO_NUMBA=1`` (or numba being absent) selects it.

Both paths accumulate precision terms sequentially in float64, so they return
bitwise-identical values for identical inputs. ``benchmarks/bench_kernels.py``
compares their throughput.
"""

from __future__ import annotations

import os

import numpy as np


def _numba_disabled_by_env() -> bool:
    return os.environ.get("ENTRANK_NO_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


try:
    if _numba_disabled_by_env():
        raise ImportError("numba disabled via ENTRANK_NO_NUMBA")
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap

    prange = range

USING_NUMBA = HAVE_NUMBA and not _numba_disabled_by_env()


def _as_rel(rel) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(rel, dtype=np.uint8))


# --- average precision ----------------------------------------------------
#
# AP = (1/P) * sum over positive ranks k of (positives in top k) / k.
# Returns -1.0 when the ranking holds no positive (callers raise).


def _ap_seq(rel):
    hits = 0
    total = 0.0
    for k in range(rel.shape[0]):
        if rel[k]:
            hits += 1
            total += hits / (k + 1)
    if hits == 0:
        return -1.0
    return total / hits


_ap_jit = njit(cache=True)(_ap_seq)


def _ap_numpy(rel: np.ndarray) -> float:
    ranks = np.flatnonzero(rel) + 1
    if ranks.size == 0:
        return -1.0
    prec = np.arange(1, ranks.size + 1, dtype=np.float64) / ranks
    total = 0.0
    for v in prec:  # sequential reduce keeps bitwise parity with the jit path
        total += v
    return total / ranks.size


def ap(rel) -> float:
    """Average precision of a binary relevance vector in rank order."""
    r = _as_rel(rel)
    if USING_NUMBA:
        return float(_ap_jit(r))
    return float(_ap_numpy(r))


# --- batched average precision ---------------------------------------------


@njit(cache=True, parallel=True)
def _ap_batch_jit(mat, out):  # pragma: no cover - exercised via ap_batch
    for i in prange(mat.shape[0]):
        out[i] = _ap_jit(mat[i])


def _ap_batch_numpy(mat: np.ndarray) -> np.ndarray:
    out = np.empty(mat.shape[0], dtype=np.float64)
    for i in range(mat.shape[0]):
        out[i] = _ap_numpy(mat[i])
    return out


def ap_batch(rel_matrix) -> np.ndarray:
    """Average precision per row of a (n_rankings, n_docs) relevance matrix."""
    mat = np.ascontiguousarray(np.asarray(rel_matrix, dtype=np.uint8))
    if mat.ndim != 2:
        raise ValueError("rel_matrix must be 2-D")
    if USING_NUMBA:
        out = np.empty(mat.shape[0], dtype=np.float64)
        _ap_batch_jit(mat, out)
        return out
    return _ap_batch_numpy(mat)


# --- cumulative hits (recall support) ---------------------------------------


def cumulative_hits(rel) -> np.ndarray:
    """Positives found within each prefix of the ranking, as int64."""
    return np.cumsum(_as_rel(rel), dtype=np.int64)


# --- Monte-Carlo estimate of E[AP] under random ranking ----------------------


@njit(cache=True)
def _random_ap_samples_jit(n, n_pos, trials, seed):  # pragma: no cover
    np.random.seed(seed)
    base = np.zeros(n, dtype=np.uint8)
    base[:n_pos] = 1
    out = np.empty(trials, dtype=np.float64)
    for t in range(trials):
        perm = np.random.permutation(n)
        rel = base[perm]
        out[t] = _ap_jit(rel)
    return out


def _random_ap_samples_numpy(n: int, n_pos: int, trials: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    base = np.zeros(n, dtype=np.uint8)
    base[:n_pos] = 1
    out = np.empty(trials, dtype=np.float64)
    for t in range(trials):
        out[t] = _ap_numpy(base[rng.permutation(n)])
    return out


def random_ap_samples(n: int, n_pos: int, trials: int, seed: int = 0) -> np.ndarray:
    """AP of ``trials`` uniformly random rankings of n docs with n_pos positives.

    The two paths use different RNG streams; use this as an estimator, not for
    cross-path bitwise comparison.
    """
    if not 1 <= n_pos <= n:
        raise ValueError("need 1 <= n_pos <= n")
    if USING_NUMBA:
        return _random_ap_samples_jit(n, n_pos, trials, seed)
    return _random_ap_samples_numpy(n, n_pos, trials, seed)


def expected_random_ap(n: int, n_pos: int, trials: int = 2000, seed: int = 0) -> float:
    """Monte-Carlo estimate of the expected AP of a random ranking."""
    return float(random_ap_samples(n, n_pos, trials, seed).mean())
