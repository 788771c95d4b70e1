"""Mock backend contracts, batching invariances, and the score cache."""

from __future__ import annotations

import json
import random

import numpy as np
import pytest

from entrank.errors import BackendError, ConfigError, DataError
from entrank.queries import Query
from entrank.scorer import (
    BackendConfig,
    MarkerBackend,
    OracleBackend,
    RandomBackend,
    UnitScore,
    filter_scores,
    load_scores,
    make_backend,
    save_scores,
    score_pair,
    score_units,
)
from entrank.segmenter import ScoringUnit

QUERY = Query("protestnews", "protest", "declarative", "There is a protest.")


def _unit(doc_id, idx, text):
    return ScoringUnit(doc_id, idx, text, "sentence", len(text.split()))


def _units(n, stem="doc"):
    return [_unit(f"{stem}{i}", 0, f"unique text number {i}") for i in range(n)]


# --- backend construction ------------------------------------------------------


def test_config_validation():
    with pytest.raises(ConfigError, match="backend_id"):
        BackendConfig(backend_id="")
    with pytest.raises(ConfigError, match="label_order"):
        BackendConfig(backend_id="b", label_order=("entailment", "neutral", "neutral"))
    with pytest.raises(ConfigError, match="batch_size"):
        BackendConfig(backend_id="b", batch_size=0)
    with pytest.raises(ConfigError, match="parallelism"):
        BackendConfig(backend_id="b", parallelism=0)
    with pytest.raises(ConfigError, match="probability_mode"):
        BackendConfig(backend_id="b", probability_mode="entail_only")
    with pytest.raises(ConfigError, match="mock_rule"):
        BackendConfig(backend_id="b", mock_rule="coinflip")


def test_make_backend_mocks():
    assert isinstance(make_backend(BackendConfig("m", mock_rule="marker")), MarkerBackend)
    assert isinstance(
        make_backend(BackendConfig("o", mock_rule="oracle"), labels={"d": True}), OracleBackend
    )
    assert isinstance(make_backend(BackendConfig("r", mock_rule="random", seed=1)), RandomBackend)
    with pytest.raises(ConfigError, match="gold labels"):
        make_backend(BackendConfig("o", mock_rule="oracle"))


# --- mock scoring rules ---------------------------------------------------------


def test_marker_rule():
    backend = MarkerBackend(marker="PROTEST_MARKER")
    units = [_unit("a", 0, "crowds marched PROTEST_MARKER downtown"), _unit("b", 0, "quiet day")]
    assert backend.score(units, "anything").tolist() == [1.0, 0.0]


def test_marker_custom_substring():
    backend = MarkerBackend(marker="XYZ")
    assert score_pair("has XYZ inside", "h", backend) == 1.0
    assert score_pair("does not", "h", backend) == 0.0


def test_oracle_rule():
    backend = OracleBackend({"a": True, "b": False})
    units = [_unit("a", 0, "x"), _unit("b", 0, "y")]
    assert backend.score(units, "h").tolist() == [1.0, 0.0]
    with pytest.raises(BackendError, match="no gold label.*'c'"):
        backend.score([_unit("c", 0, "z")], "h")


def test_random_rule_is_pair_deterministic():
    a = RandomBackend(seed=7)
    b = RandomBackend(seed=7)
    c = RandomBackend(seed=8)
    assert score_pair("premise", "hyp", a) == score_pair("premise", "hyp", b)
    assert score_pair("premise", "hyp", a) != score_pair("premise", "hyp", c)
    assert score_pair("premise", "hyp", a) != score_pair("premise two", "hyp", a)
    assert score_pair("premise", "hyp", a) != score_pair("premise", "hyp two", a)


def test_random_rule_range_and_spread():
    backend = RandomBackend(seed=0)
    scores = backend.score(_units(500), "h")
    assert ((scores >= 0.0) & (scores < 1.0)).all()
    assert 0.4 < scores.mean() < 0.6  # crude uniformity check
    assert len(np.unique(scores)) == 500


# --- score_units invariances -----------------------------------------------------


def test_score_units_fields_and_order():
    units = [_unit("a", 0, "PROTEST_MARKER here"), _unit("a", 1, "nothing"), _unit("b", 0, "x")]
    records = score_units(units, QUERY, MarkerBackend())
    assert [(r.doc_id, r.unit_index) for r in records] == [("a", 0), ("a", 1), ("b", 0)]
    assert [r.probability for r in records] == [1.0, 0.0, 0.0]
    assert all(r.task == "protest" and r.qtype == "declarative" for r in records)
    assert all(r.backend_id == "mock-marker" for r in records)


def test_score_units_batch_size_invariance():
    units = _units(23)
    backend = RandomBackend(seed=3)
    base = [r.probability for r in score_units(units, QUERY, backend, batch_size=32)]
    for bs in (1, 2, 7, 23, 100):
        got = [r.probability for r in score_units(units, QUERY, backend, batch_size=bs)]
        assert got == base


def test_score_units_parallelism_invariance():
    units = _units(40)
    backend = RandomBackend(seed=5)
    base = [r.probability for r in score_units(units, QUERY, backend, batch_size=4, parallelism=1)]
    for workers in (2, 4, 8):
        got = [
            r.probability
            for r in score_units(units, QUERY, backend, batch_size=4, parallelism=workers)
        ]
        assert got == base


def test_score_units_permutation_invariance():
    units = _units(17)
    backend = RandomBackend(seed=9)
    by_key = {
        (r.doc_id, r.unit_index): r.probability for r in score_units(units, QUERY, backend)
    }
    shuffled = list(units)
    random.Random(0).shuffle(shuffled)
    for rec in score_units(shuffled, QUERY, backend):
        assert rec.probability == by_key[(rec.doc_id, rec.unit_index)]


def test_score_units_rejects_empty():
    with pytest.raises(DataError, match="no scoring units"):
        score_units([], QUERY, MarkerBackend())


def test_unit_score_probability_bounds():
    with pytest.raises(DataError, match="outside"):
        UnitScore("d", 0, "t", "q", "b", 1.5)
    with pytest.raises(DataError, match="outside"):
        UnitScore("d", 0, "t", "q", "b", -0.1)


# --- cache round-trip -------------------------------------------------------------


def test_cache_round_trip_exact(tmp_path):
    backend = RandomBackend(seed=11)
    records = score_units(_units(50), QUERY, backend)
    path = tmp_path / "scores.jsonl"
    save_scores(records, path)
    loaded = load_scores(path)
    assert loaded == records  # frozen dataclasses compare by value, bit-exact floats


def test_cache_file_has_exactly_six_fields(tmp_path):
    path = tmp_path / "scores.jsonl"
    save_scores(score_units(_units(2), QUERY, MarkerBackend()), path)
    for line in path.read_text(encoding="utf-8").splitlines():
        obj = json.loads(line)
        assert sorted(obj) == [
            "backend_id", "doc_id", "probability", "qtype", "task", "unit_index",
        ]
        assert isinstance(obj["probability"], str)  # repr string round-trips bits


def test_cache_duplicate_rejected_on_save(tmp_path):
    rec = UnitScore("d", 0, "t", "q", "b", 0.5)
    with pytest.raises(DataError, match="duplicate"):
        save_scores([rec, rec], tmp_path / "x.jsonl")


def test_cache_load_errors_carry_location(tmp_path):
    path = tmp_path / "bad.jsonl"
    good = json.dumps(
        {"doc_id": "d", "unit_index": 0, "task": "t", "qtype": "q", "backend_id": "b",
         "probability": "0.5"}
    )
    path.write_text(good + "\n{broken\n", encoding="utf-8")
    with pytest.raises(DataError, match=r"bad\.jsonl:2.*malformed"):
        load_scores(path)

    path.write_text(good + "\n" + good + "\n", encoding="utf-8")
    with pytest.raises(DataError, match=r"bad\.jsonl:2.*duplicate"):
        load_scores(path)

    missing = json.dumps({"doc_id": "d", "unit_index": 0})
    path.write_text(missing + "\n", encoding="utf-8")
    with pytest.raises(DataError, match=r"bad\.jsonl:1.*missing field"):
        load_scores(path)

    extra = json.loads(good)
    extra["granularity"] = "sentence"
    path.write_text(json.dumps(extra) + "\n", encoding="utf-8")
    with pytest.raises(DataError, match=r"bad\.jsonl:1.*unknown field.*granularity"):
        load_scores(path)

    bad_prob = json.loads(good)
    bad_prob["probability"] = "1.5"
    path.write_text(json.dumps(bad_prob) + "\n", encoding="utf-8")
    with pytest.raises(DataError, match=r"bad\.jsonl:1.*outside"):
        load_scores(path)


def test_cache_load_missing_file(tmp_path):
    with pytest.raises(DataError, match="not found"):
        load_scores(tmp_path / "absent.jsonl")


def test_filter_scores():
    recs = [
        UnitScore("d", 0, "kill", "declarative", "b1", 0.1),
        UnitScore("d", 0, "kill", "definitional", "b1", 0.2),
        UnitScore("d", 0, "arrest", "declarative", "b2", 0.3),
    ]
    assert filter_scores(recs, task="kill") == recs[:2]
    assert filter_scores(recs, qtype="declarative", backend_id="b2") == [recs[2]]
    assert filter_scores(recs) == recs
