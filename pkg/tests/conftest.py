"""Shared fixtures and the acceptance-criteria summary hook."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

from entrank.corpus import Corpus, Document

FIXTURES = Path(__file__).parent / "fixtures"


def load_fixture(name: str) -> dict:
    return json.loads((FIXTURES / name).read_text("utf-8"))


@pytest.fixture(scope="session")
def query_fixture() -> dict:
    return load_fixture("query_strings.json")


@pytest.fixture(scope="session")
def published() -> dict:
    return load_fixture("published_metrics.json")


def make_corpus(labels_by_doc: dict[str, bool], task: str = "protest", name: str = "tiny",
                text_by_doc: dict[str, str] | None = None) -> Corpus:
    """Corpus from a {doc_id: gold} mapping, default one-sentence bodies."""
    docs = []
    for doc_id, gold in labels_by_doc.items():
        text = (text_by_doc or {}).get(doc_id, f"Body of {doc_id}. Second sentence of {doc_id}.")
        docs.append(Document(doc_id=doc_id, text=text, labels={task: gold}))
    return Corpus(name=name, tasks=(task,), documents=tuple(docs))


@pytest.fixture
def tiny_corpus() -> Corpus:
    return make_corpus(
        {"d1": False, "d2": True, "d3": False, "d4": True},
        text_by_doc={
            "d1": "Quiet morning in town. Weather was mild.",
            "d2": "Crowds gathered downtown. PROTEST_MARKER chants filled the air.",
            "d3": "Market prices rose. Farmers worried.",
            "d4": "A PROTEST_MARKER march blocked the highway. Police watched.",
        },
    )


def write_generic_jsonl(path: Path, docs: list[dict]) -> Path:
    with path.open("w", encoding="utf-8") as fh:
        for d in docs:
            fh.write(json.dumps(d) + "\n")
    return path


@pytest.fixture
def generic_file(tmp_path, tiny_corpus) -> Path:
    docs = [
        {"doc_id": d.doc_id, "text": d.text, "labels": dict(d.labels)}
        for d in tiny_corpus.documents
    ]
    return write_generic_jsonl(tmp_path / "corpus.jsonl", docs)


def write_india_layout(root: Path, docs: list[dict]) -> Path:
    """Synthetic dataset directory in the documented layout.

    ``docs``: [{"doc_id": ..., "sentences": [(text, {task: bool})...]}]
    """
    root.mkdir(parents=True, exist_ok=True)
    tasks = ("kill", "arrest", "fail", "force", "any_action")
    with (root / "sents.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id", "sent_id", "text", *tasks])
        for doc in docs:
            for i, (text, labels) in enumerate(doc["sentences"]):
                writer.writerow([doc["doc_id"], i, text, *[int(labels.get(t, False)) for t in tasks]])
    with (root / "docs.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id", "text"])
        for doc in docs:
            writer.writerow([doc["doc_id"], " ".join(t for t, _ in doc["sentences"])])
    return root


@pytest.fixture
def india_dir(tmp_path) -> Path:
    docs = [
        {"doc_id": "a1", "sentences": [
            ("Police arrested three men.", {"arrest": True, "any_action": True}),
            ("The market reopened later.", {}),
        ]},
        {"doc_id": "a2", "sentences": [
            ("Officers fired into the crowd.", {"force": True, "any_action": True}),
            ("Two people died on the spot.", {"kill": True, "any_action": True}),
        ]},
        {"doc_id": "a3", "sentences": [
            ("Shops stayed shut all day.", {}),
        ]},
    ]
    return write_india_layout(tmp_path / "india", docs)


# --- acceptance summary -------------------------------------------------------

_ACCEPTANCE_RESULTS: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): marks a test as one acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    relevant = report.when == "call" or (report.when == "setup" and not report.passed)
    if not relevant:
        return
    if report.passed:
        status = "PASS"
    elif report.skipped:
        status = "SKIP"
    else:
        status = "FAIL"
    reason = ""
    if report.skipped and isinstance(report.longrepr, tuple):
        reason = report.longrepr[2]
        if reason.startswith("Skipped: "):
            reason = reason[len("Skipped: "):]
    _ACCEPTANCE_RESULTS.append((marker.args[0], status, reason))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, status, reason in _ACCEPTANCE_RESULTS:
        line = f"[acceptance] {status}: {name}"
        if reason:
            line += f" -- {reason}"
        terminalreporter.write_line(line)
