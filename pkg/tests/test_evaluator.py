"""Average precision, recall-at-proportion, and grouped summaries."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entrank.errors import ConfigError, DataError
from entrank.evaluator import (
    EvaluationRow,
    average_precision,
    average_precision_batch,
    evaluate_ranking,
    expected_random_ap,
    grouped_mean_ap,
    mean_average_precision,
    proportion_grid,
    ranking_average_precision,
    ranking_recall_at,
    reading_cutoff,
    recall_at,
    recall_curve,
    relevance_vector,
)
from entrank.ranker import DocScore, Ranking, RankingConfig

CONFIG = RankingConfig("protestnews", "protest", "declarative", "sentence", "b")

relevance_lists = st.lists(st.integers(min_value=0, max_value=1), min_size=1, max_size=80).filter(
    lambda xs: any(xs)
)


# --- average precision -----------------------------------------------------------


def test_ap_known_values():
    assert average_precision([1, 0, 1, 0]) == pytest.approx((1.0 + 2.0 / 3.0) / 2.0)
    assert average_precision([0, 1]) == 0.5
    assert average_precision([1, 1, 1]) == 1.0
    assert average_precision([0, 0, 1]) == pytest.approx(1.0 / 3.0)


def test_ap_requires_a_positive():
    with pytest.raises(DataError, match="positive"):
        average_precision([0, 0, 0])


def test_ap_batch_matches_scalar():
    rng = np.random.default_rng(0)
    mat = (rng.random((20, 15)) < 0.3).astype(np.int64)
    mat[:, 0] = 1  # guarantee a positive per row
    batch = average_precision_batch(mat)
    for i in range(mat.shape[0]):
        assert batch[i] == average_precision(mat[i])


# --- reading cutoffs ---------------------------------------------------------------


def test_reading_cutoff_examples():
    assert reading_cutoff(0.5, 4) == 2
    assert reading_cutoff(0.25, 4) == 1
    assert reading_cutoff(1.0, 4) == 4
    assert reading_cutoff(0.001, 10) == 1  # clamped to at least one document
    assert reading_cutoff(0.01, 1257) == 13


def test_reading_cutoff_float_robustness():
    # 0.3 * 10 is 2.9999... in floats; the epsilon guard keeps the cutoff at 3
    assert reading_cutoff(0.3, 10) == 3
    for k in range(1, 100):
        assert reading_cutoff(k / 100.0, 100) == k


def test_reading_cutoff_validation():
    with pytest.raises(ConfigError, match="proportion"):
        reading_cutoff(0.0, 10)
    with pytest.raises(ConfigError, match="proportion"):
        reading_cutoff(1.1, 10)
    with pytest.raises(DataError, match="collection size"):
        reading_cutoff(0.5, 0)


# --- recall at a proportion -----------------------------------------------------------


def test_recall_examples():
    assert recall_at([1, 0, 1, 0], 0.5) == 0.5
    assert recall_at([0, 1], 0.5) == 0.0
    assert recall_at([0, 1], 1.0) == 1.0


def test_recall_curve_example():
    grid = (0.25, 0.5, 0.75, 1.0)
    curve = recall_curve([1, 0, 1, 0], grid)
    assert curve == ((0.25, 0.5), (0.5, 0.5), (0.75, 1.0), (1.0, 1.0))


def test_recall_curve_worst_case():
    # positives ranked last: recall stays zero until they come into view
    curve = dict(recall_curve([0, 0, 1, 1], (0.25, 0.5, 0.75, 1.0)))
    assert curve[0.25] == 0.0 and curve[0.5] == 0.0
    assert curve[0.75] == 0.5 and curve[1.0] == 1.0


@settings(max_examples=200, deadline=None)
@given(relevance=relevance_lists)
def test_recall_curve_monotone_and_complete(relevance):
    curve = recall_curve(relevance, proportion_grid())
    values = [r for _, r in curve]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[-1] == 1.0  # reading everything finds everything
    assert all(0.0 <= v <= 1.0 for v in values)


@settings(max_examples=200, deadline=None)
@given(relevance=relevance_lists, k=st.integers(min_value=1, max_value=100))
def test_recall_matches_bruteforce(relevance, k):
    p = k / 100.0
    m = reading_cutoff(p, len(relevance))
    expected = sum(relevance[:m]) / sum(relevance)
    assert recall_at(relevance, p) == pytest.approx(expected)


def test_proportion_grid_default():
    grid = proportion_grid()
    assert len(grid) == 100
    assert grid[0] == pytest.approx(0.01)
    assert grid[-1] == 1.0
    assert all(b > a for a, b in zip(grid, grid[1:]))


def test_grid_validation():
    with pytest.raises(ConfigError, match="empty"):
        recall_curve([1], ())
    with pytest.raises(ConfigError, match="ascending"):
        recall_curve([1], (0.5, 0.25))
    with pytest.raises(ConfigError, match=r"in \(0, 1\]"):
        recall_curve([1], (0.0, 0.5))
    with pytest.raises(ConfigError, match=r"in \(0, 1\]"):
        recall_curve([1], (0.5, 1.5))


# --- aggregate metrics -------------------------------------------------------------


def test_mean_average_precision():
    assert mean_average_precision([0.5, 1.0]) == 0.75
    with pytest.raises(DataError, match="empty"):
        mean_average_precision([])


def test_expected_random_ap_sanity():
    # tiny case has a closed form: mean AP over the 2 placements of 1 positive
    est = expected_random_ap(2, 1, trials=4000, seed=3)
    assert est == pytest.approx(0.75, abs=0.02)
    assert expected_random_ap(5, 5) == 1.0


# --- ranking-level helpers ------------------------------------------------------------


def _ranking(ids_scores):
    entries = tuple(DocScore(d, s, 0, 1) for d, s in ids_scores)
    return Ranking(CONFIG, entries)


def test_relevance_vector_checks_coverage():
    labels = {"a": True, "b": False}
    assert relevance_vector(["b", "a"], labels).tolist() == [0, 1]
    with pytest.raises(DataError, match="unlabeled"):
        relevance_vector(["a", "b", "c"], labels)
    with pytest.raises(DataError, match="missing labeled"):
        relevance_vector(["a"], labels)
    with pytest.raises(DataError, match="duplicates"):
        relevance_vector(["a", "a"], {"a": True})


def test_ranking_metric_helpers():
    ranking = _ranking([("a", 0.9), ("b", 0.5), ("c", 0.1), ("d", 0.05)])
    labels = {"a": True, "b": False, "c": True, "d": False}
    assert ranking_average_precision(ranking, labels) == pytest.approx((1.0 + 2.0 / 3.0) / 2.0)
    assert ranking_recall_at(ranking, labels, 0.5) == 0.5


def test_evaluate_ranking_row():
    ranking = _ranking([("a", 0.9), ("b", 0.5), ("c", 0.1), ("d", 0.05)])
    labels = {"a": True, "b": False, "c": True, "d": False}
    row = evaluate_ranking(ranking, labels, grid=(0.25, 0.5, 0.75, 1.0))
    assert (row.dataset, row.task, row.qtype) == ("protestnews", "protest", "declarative")
    assert (row.granularity, row.backend) == ("sentence", "b")
    assert row.n_docs == 4 and row.n_positives == 2
    assert row.ap == pytest.approx((1.0 + 2.0 / 3.0) / 2.0)
    assert row.recall_at(0.5) == 0.5
    assert row.recall_at(1.0) == 1.0
    with pytest.raises(DataError, match="grid"):
        row.recall_at(0.33)


def test_recall_at_tolerates_float_grid_noise():
    row = EvaluationRow("d", "t", "q", "sentence", "b", 1.0,
                        ((0.01 + 1e-13, 1.0),), 1, 1)
    assert row.recall_at(0.01) == 1.0


# --- grouped summaries ------------------------------------------------------------------


def _row(task, qtype, backend, granularity, ap):
    return EvaluationRow("india", task, qtype, granularity, backend, ap, ((1.0, 1.0),), 10, 5)


def test_grouped_mean_ap():
    rows = [
        _row("kill", "declarative", "dlm", "sentence", 0.8),
        _row("arrest", "declarative", "dlm", "sentence", 0.6),
        _row("kill", "declarative", "rlm", "sentence", 0.4),
        _row("kill", "declarative", "dlm", "document", 0.2),
    ]
    got = grouped_mean_ap(rows, ("backend", "granularity"))
    assert got[("dlm", "sentence")] == pytest.approx(0.7)
    assert got[("rlm", "sentence")] == 0.4
    assert got[("dlm", "document")] == 0.2


def test_grouped_mean_ap_validation():
    with pytest.raises(DataError, match="no evaluation rows"):
        grouped_mean_ap([], ("backend",))
    with pytest.raises(DataError, match="unknown group_by"):
        grouped_mean_ap([_row("kill", "declarative", "dlm", "sentence", 1.0)], ("model",))


def test_group_averages_match_row_means():
    # averaging grouped results reproduces a hand computation over mixed rows
    rows = [
        _row("kill", q, b, g, ap)
        for (q, b, g, ap) in [
            ("declarative", "dlm", "sentence", 1.0),
            ("definitional", "dlm", "sentence", 0.0),
            ("declarative", "rlm", "document", 0.25),
            ("definitional", "rlm", "document", 0.75),
        ]
    ]
    got = grouped_mean_ap(rows, ("backend",))
    assert got[("dlm",)] == 0.5
    assert got[("rlm",)] == 0.5
    assert grouped_mean_ap(rows, ("qtype",))[("declarative",)] == pytest.approx(0.625)
