"""Ranking-quality metrics: average precision and recall at read proportions.

The low-level functions consume a relevance vector (gold labels in ranked
order, best first); the ranking-level wrappers take a Ranking plus a gold
label mapping and enforce exact corpus coverage. Recall-at-proportion
answers "after reading the top p of the collection, how much of the positive
class has been seen"; average precision rewards concentrating positives near
the top. Heavy lifting is delegated to the compiled kernels so large sweeps
stay fast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .errors import ConfigError, DataError
from .ranker import Ranking, RankingConfig

# Guards m = ceil(p * n) against float grid points like 50 * (1/100) landing
# a hair above the integer they name.
_CEIL_EPS = 1e-9


def _as_relevance(relevance: Sequence[int] | Sequence[bool] | np.ndarray) -> np.ndarray:
    arr = np.asarray(relevance)
    if arr.ndim != 1 or arr.size == 0:
        raise DataError("relevance vector must be one-dimensional and non-empty")
    if not np.isin(arr, (0, 1)).all():
        raise DataError("relevance vector entries must be 0/1 or booleans")
    return arr.astype(np.int64)


def average_precision(relevance: Sequence[int] | Sequence[bool] | np.ndarray) -> float:
    """Mean of precision-at-k over the ranks k that hold positives.

    >>> round(average_precision([1, 0, 1]), 10)
    0.8333333333
    >>> average_precision([0, 1])
    0.5
    """
    rel = _as_relevance(relevance)
    value = kernels.ap(rel)
    if value < 0.0:
        raise DataError("average precision is undefined for a ranking with no positives")
    return float(value)


def average_precision_batch(rel_matrix: np.ndarray) -> np.ndarray:
    """Row-wise average precision; every row needs at least one positive."""
    mat = np.asarray(rel_matrix)
    if mat.ndim != 2:
        raise DataError("expected a 2-d matrix of relevance rows")
    out = kernels.ap_batch(mat.astype(np.int64))
    if (out < 0.0).any():
        bad = int(np.flatnonzero(out < 0.0)[0])
        raise DataError(f"row {bad} has no positives; average precision is undefined")
    return out


def reading_cutoff(proportion: float, n: int) -> int:
    """Documents read at a proportion: ceil(p * n), at least 1, at most n."""
    if not 0.0 < proportion <= 1.0:
        raise ConfigError(f"proportion must be in (0, 1], got {proportion}")
    if n < 1:
        raise DataError(f"collection size must be >= 1, got {n}")
    return min(n, max(1, math.ceil(proportion * n - _CEIL_EPS)))


def recall_at(relevance: Sequence[int] | Sequence[bool] | np.ndarray, proportion: float) -> float:
    """Share of all positives found in the top ceil(p * n) ranks.

    >>> recall_at([1, 0, 1, 0], 0.5)
    0.5
    >>> recall_at([0, 1, 1, 0], 1.0)
    1.0
    """
    rel = _as_relevance(relevance)
    positives = int(rel.sum())
    if positives == 0:
        raise DataError("recall is undefined for a ranking with no positives")
    m = reading_cutoff(proportion, rel.size)
    return float(rel[:m].sum()) / positives


def proportion_grid(n_points: int = 100) -> tuple[float, ...]:
    """Evenly spaced proportions ending at 1.0; the default is 1% steps."""
    if n_points < 1:
        raise ConfigError(f"n_points must be >= 1, got {n_points}")
    return tuple(k / n_points for k in range(1, n_points + 1))


def _validated_grid(grid: Sequence[float] | None) -> tuple[float, ...]:
    points = tuple(grid) if grid is not None else proportion_grid()
    if not points:
        raise ConfigError("proportion grid is empty")
    for p in points:
        if not 0.0 < p <= 1.0:
            raise ConfigError(f"grid proportions must be in (0, 1], got {p}")
    if any(b <= a for a, b in zip(points, points[1:])):
        raise ConfigError("proportion grid must be strictly ascending")
    return points


def recall_curve(
    relevance: Sequence[int] | Sequence[bool] | np.ndarray,
    grid: Sequence[float] | None = None,
) -> tuple[tuple[float, float], ...]:
    """(proportion, recall) pairs over a grid, from one cumulative pass."""
    rel = _as_relevance(relevance)
    positives = int(rel.sum())
    if positives == 0:
        raise DataError("recall is undefined for a ranking with no positives")
    points = _validated_grid(grid)
    hits = kernels.cumulative_hits(rel)
    return tuple((p, float(hits[reading_cutoff(p, rel.size) - 1]) / positives) for p in points)


def mean_average_precision(aps: Sequence[float]) -> float:
    """Arithmetic mean over a non-empty set of per-ranking average precisions."""
    if len(aps) == 0:
        raise DataError("cannot average an empty set of average precisions")
    return float(sum(aps) / len(aps))


def expected_random_ap(n: int, n_pos: int, trials: int = 2000, seed: int = 7) -> float:
    """Monte Carlo estimate of average precision under uniformly random ranking."""
    if not 0 < n_pos <= n:
        raise DataError(f"need 0 < n_pos <= n, got n_pos={n_pos}, n={n}")
    return kernels.expected_random_ap(n, n_pos, trials, seed)


@dataclass(frozen=True)
class EvaluationRow:
    """AP plus a recall curve for one ranking, keyed by what produced it."""

    dataset: str
    task: str
    qtype: str
    granularity: str
    backend: str
    ap: float
    recalls: tuple[tuple[float, float], ...]
    n_docs: int
    n_positives: int

    def recall_at(self, proportion: float) -> float:
        for p, r in self.recalls:
            if math.isclose(p, proportion, rel_tol=0.0, abs_tol=1e-12):
                return r
        raise DataError(f"proportion {proportion} is not on this row's grid")


def relevance_vector(ranked_ids: Sequence[str], labels: Mapping[str, bool]) -> np.ndarray:
    """Gold labels in ranked order; the ranking must cover the corpus exactly."""
    ranked = set(ranked_ids)
    if len(ranked) != len(ranked_ids):
        raise DataError("ranked ids contain duplicates")
    missing = set(labels) - ranked
    extra = ranked - set(labels)
    if extra:
        raise DataError(f"ranking contains unlabeled document(s): {sorted(extra)[:5]}")
    if missing:
        raise DataError(f"ranking is missing labeled document(s): {sorted(missing)[:5]}")
    return np.array([1 if labels[d] else 0 for d in ranked_ids], dtype=np.int64)


def ranking_recall_at(ranking: Ranking, labels: Mapping[str, bool], proportion: float) -> float:
    return recall_at(relevance_vector(ranking.ranked_ids, labels), proportion)


def ranking_average_precision(ranking: Ranking, labels: Mapping[str, bool]) -> float:
    return average_precision(relevance_vector(ranking.ranked_ids, labels))


def evaluate_ranking(
    ranking: Ranking,
    labels: Mapping[str, bool],
    grid: Sequence[float] | None = None,
) -> EvaluationRow:
    """AP and the recall curve for one ranking against gold labels."""
    rel = relevance_vector(ranking.ranked_ids, labels)
    cfg: RankingConfig = ranking.config
    return EvaluationRow(
        dataset=cfg.dataset,
        task=cfg.task,
        qtype=cfg.qtype,
        granularity=cfg.granularity,
        backend=cfg.backend_id,
        ap=average_precision(rel),
        recalls=recall_curve(rel, grid),
        n_docs=int(rel.size),
        n_positives=int(rel.sum()),
    )


def grouped_mean_ap(rows: Sequence[EvaluationRow], group_by: Sequence[str]) -> dict[tuple, float]:
    """Mean AP per group, keyed by the named EvaluationRow fields.

    The published summary numbers group by (backend, granularity), averaging
    over tasks and query types.
    """
    if not rows:
        raise DataError("no evaluation rows to group")
    valid = {"dataset", "task", "qtype", "granularity", "backend"}
    bad = [g for g in group_by if g not in valid]
    if bad:
        raise DataError(f"unknown group_by field(s): {', '.join(bad)}")
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        key = tuple(getattr(row, g) for g in group_by)
        groups.setdefault(key, []).append(row.ap)
    return {key: mean_average_precision(aps) for key, aps in groups.items()}
