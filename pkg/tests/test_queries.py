"""Query registry contents and extended-query composition."""

from __future__ import annotations

import pytest

from entrank.errors import ConfigError
from entrank.queries import (
    EXTENSION_NAMES,
    RANKING_QTYPES,
    REFERENCE_QTYPES,
    Query,
    compose_extended,
    datasets,
    get_extension,
    get_query,
    queries_for,
    tasks,
)


def _fixture_queries(query_fixture):
    for dataset, per_task in query_fixture.items():
        if dataset.startswith("_"):
            continue
        for task, per_qtype in per_task.items():
            for qtype, text in per_qtype.items():
                yield dataset, task, qtype, text


def test_registry_matches_fixture(query_fixture):
    for dataset, task, qtype, text in _fixture_queries(query_fixture):
        assert get_query(dataset, task, qtype).text == text, (dataset, task, qtype)


def test_extensions_match_fixture(query_fixture):
    # the appended-definition variants are definitional + " " + extension text
    base = query_fixture["protestnews"]["protest"]["definitional"]
    for name in EXTENSION_NAMES:
        full = query_fixture["protestnews"]["protest"][f"extended_{name}"]
        assert full.startswith(base + " ")
        ext = get_extension(name)
        assert ext.text == full.removeprefix(base + " ")
        assert ext.qtype == name


def test_registry_is_complete(query_fixture):
    # every fixture entry exists and nothing else does
    fixture_count = sum(1 for _ in _fixture_queries(query_fixture))
    registry_count = sum(
        len(queries_for(d, t, include_reference=True)) for d in datasets() for t in tasks(d)
    )
    assert fixture_count == registry_count == 22
    ranked_count = sum(len(queries_for(d, t)) for d in datasets() for t in tasks(d))
    assert ranked_count == 17  # question forms rank nothing


def test_dataset_and_task_listing():
    assert datasets() == ("india", "protestnews")
    assert tasks("india") == ("any_action", "arrest", "fail", "force", "kill")
    assert tasks("protestnews") == ("protest",)
    with pytest.raises(ConfigError, match="unknown dataset"):
        tasks("weather")


def test_queries_for_excludes_reference_forms():
    ranked = queries_for("india", "kill")
    assert all(q.qtype not in REFERENCE_QTYPES for q in ranked)
    with_ref = queries_for("india", "kill", include_reference=True)
    assert {q.qtype for q in with_ref} - {q.qtype for q in ranked} == {"question"}


def test_get_query_unknown_lists_available():
    with pytest.raises(ConfigError, match="available qtypes: declarative"):
        get_query("india", "kill", "poetic")
    with pytest.raises(ConfigError, match="riot"):
        get_query("india", "riot", "declarative")


def test_get_extension_unknown():
    with pytest.raises(ConfigError, match="opposition"):
        get_extension("negation")


def test_query_validation():
    with pytest.raises(ConfigError, match="empty"):
        Query("d", "t", "declarative", "  ")
    with pytest.raises(ConfigError, match="single"):
        Query("d", "t", "declarative", "two\nlines")


# --- composition --------------------------------------------------------------


def test_compose_identity():
    base = get_query("india", "kill", "definitional")
    assert compose_extended(base, "") is base


def test_compose_keyword_prefix():
    base = get_query("india", "kill", "definitional")
    out = compose_extended(base, "opposition")
    assert out.qtype == "extended_keyword"
    assert out.text == "opposition, police caused someone or something to die."
    assert out.task == base.task and out.dataset == base.dataset


def test_compose_appended_definition():
    base = get_query("protestnews", "protest", "definitional")
    for name in EXTENSION_NAMES:
        ext = get_extension(name)
        out = compose_extended(base, ext)
        assert out.qtype == f"extended_{name}"
        assert out.text == f"{base.text} {ext.text}"


def test_composed_forms_are_registered():
    # the registry's extended entries byte-match fresh composition
    for dataset in datasets():
        for task in tasks(dataset):
            base = get_query(dataset, task, "definitional")
            for qtype in ("extended_keyword", "extended_opposition", "extended_disapproval"):
                try:
                    stored = get_query(dataset, task, qtype)
                except ConfigError:
                    continue
                if qtype == "extended_keyword":
                    keyword = stored.text.split(",", 1)[0]
                    rebuilt = compose_extended(base, keyword)
                else:
                    rebuilt = compose_extended(base, get_extension(qtype.removeprefix("extended_")))
                assert stored.text == rebuilt.text, (dataset, task, qtype)


def test_compose_requires_definitional_base():
    base = get_query("india", "kill", "declarative")
    with pytest.raises(ConfigError, match="definitional"):
        compose_extended(base, "opposition")


def test_compose_rejects_non_extension_query():
    base = get_query("india", "kill", "definitional")
    other = get_query("india", "arrest", "declarative")
    with pytest.raises(ConfigError, match="extension"):
        compose_extended(base, other)


def test_ranking_qtypes_exclude_reference():
    assert set(RANKING_QTYPES).isdisjoint(REFERENCE_QTYPES)
