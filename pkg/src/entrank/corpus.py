"""Labeled document collections and their ingestion.

Three loaders feed one validation path: the generic line-delimited JSON
format, plus adapters that normalize the two supported public datasets
(India police events, protest news) into generic records before building
the corpus. Text is stored exactly as released; no normalization happens
at ingestion.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError

INDIA_TASKS = ("kill", "arrest", "fail", "force", "any_action")
PROTEST_TASKS = ("protest",)

# Published corpus statistics, used by verify_stats to flag drift.
# Fractions are stored as published even where they disagree slightly with
# positives/total; matching is decided on the exact positive counts.
INDIA_EXPECTED_STATS = {
    "kill": (50, 0.0398),
    "arrest": (128, 0.1017),
    "fail": (114, 0.0905),
    "force": (90, 0.0715),
    "any_action": (457, 0.3624),
}
PROTEST_EXPECTED_STATS = {"protest": (1912, 0.2051)}

_TRUE_STRINGS = {"1", "true", "yes", "y", "t"}
_FALSE_STRINGS = {"0", "false", "no", "n", "f", ""}


@dataclass(frozen=True)
class Document:
    """One news article with gold labels per task."""

    doc_id: str
    text: str
    labels: Mapping[str, bool]
    sentences: tuple[str, ...] | None = None

    @property
    def n_sentences(self) -> int:
        return len(self.sentences) if self.sentences is not None else 0


@dataclass(frozen=True)
class Corpus:
    """An immutable, validated document collection."""

    name: str
    tasks: tuple[str, ...]
    documents: tuple[Document, ...]
    expected_stats: Mapping[str, tuple[int, float]] | None = None

    def __post_init__(self):
        if not self.documents:
            raise DataError(f"corpus {self.name!r} has no documents")
        if not self.tasks:
            raise DataError(f"corpus {self.name!r} has no tasks")

    @property
    def n_sentences(self) -> int:
        return sum(d.n_sentences for d in self.documents)

    def task_labels(self, task: str) -> dict[str, bool]:
        """Gold label per doc_id for one task."""
        if task not in self.tasks:
            raise ConfigError(f"unknown task {task!r}; corpus tasks: {', '.join(self.tasks)}")
        return {d.doc_id: d.labels[task] for d in self.documents}

    def document(self, doc_id: str) -> Document:
        for d in self.documents:
            if d.doc_id == doc_id:
                return d
        raise DataError(f"no document with id {doc_id!r}")


@dataclass(frozen=True)
class TaskLabelSummary:
    """Positive-label statistics for one task."""

    task: str
    positives: int
    total: int
    fraction: float
    expected_positives: int | None = None
    expected_fraction: float | None = None

    @property
    def matches_expected(self) -> bool:
        """True when there is no expectation or the positive count matches it."""
        return self.expected_positives is None or self.positives == self.expected_positives


DEFAULT_FIELDS = {"doc_id": "doc_id", "text": "text", "sentences": "sentences", "labels": "labels"}


def _coerce_bool(value, where: str) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, np.integer)) and value in (0, 1):
        return bool(value)
    if isinstance(value, str):
        v = value.strip().lower()
        if v in _TRUE_STRINGS:
            return True
        if v in _FALSE_STRINGS:
            return False
    raise DataError(f"{where}: cannot interpret {value!r} as a boolean label")


def _build_corpus(
    records: Iterable[tuple[str, dict]],
    name: str,
    tasks: Sequence[str] | None = None,
    expected_stats: Mapping[str, tuple[int, float]] | None = None,
) -> Corpus:
    """Validate normalized records (location, record) into a Corpus.

    The task registry is the explicit ``tasks`` list when given, otherwise the
    label keys of the first record; every record must carry a label for every
    registered task.
    """
    documents: list[Document] = []
    seen: set[str] = set()
    registry: tuple[str, ...] | None = tuple(tasks) if tasks else None

    for where, rec in records:
        doc_id = rec.get("doc_id")
        if doc_id is None or str(doc_id) == "":
            raise DataError(f"{where}: missing required field 'doc_id'")
        doc_id = str(doc_id)
        if doc_id in seen:
            raise DataError(f"{where}: duplicate doc_id {doc_id!r}")
        seen.add(doc_id)

        raw_labels = rec.get("labels")
        if raw_labels is None:
            raise DataError(f"{where}: missing required field 'labels'")
        if not isinstance(raw_labels, Mapping):
            raise DataError(f"{where}: 'labels' must be an object mapping task to bool")
        labels = {str(k): _coerce_bool(v, where) for k, v in raw_labels.items()}

        if registry is None:
            registry = tuple(sorted(labels))
        missing = [t for t in registry if t not in labels]
        if missing:
            raise DataError(f"{where}: document {doc_id!r} missing label for task(s): {', '.join(missing)}")

        sentences = rec.get("sentences")
        if sentences is not None:
            if not isinstance(sentences, (list, tuple)) or not all(isinstance(s, str) for s in sentences):
                raise DataError(f"{where}: 'sentences' must be an array of strings")
            sentences = tuple(sentences)

        text = rec.get("text")
        if text is None:
            if sentences:
                text = " ".join(sentences)
            else:
                raise DataError(f"{where}: missing required field 'text'")
        if not isinstance(text, str):
            raise DataError(f"{where}: 'text' must be a string")

        documents.append(Document(doc_id=doc_id, text=text, labels=labels, sentences=sentences))

    if registry is None:
        raise DataError(f"corpus {name!r} has no documents")
    return Corpus(name=name, tasks=registry, documents=tuple(documents), expected_stats=expected_stats)


def ingest_generic(
    path: str | Path,
    format_config: Mapping[str, str] | None = None,
    name: str | None = None,
    tasks: Sequence[str] | None = None,
) -> Corpus:
    """Load a corpus from line-delimited JSON records.

    Each line is an object with ``doc_id``, ``text``, optional ``sentences``
    (array of strings), and ``labels`` (object task -> bool). ``format_config``
    remaps those canonical field names onto the file's actual ones, e.g.
    ``{"doc_id": "id"}``.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"corpus file not found: {path}")
    fields = dict(DEFAULT_FIELDS)
    if format_config:
        unknown = set(format_config) - set(DEFAULT_FIELDS)
        if unknown:
            raise ConfigError(f"format_config has unknown keys: {', '.join(sorted(unknown))}")
        fields.update(format_config)

    def records():
        with path.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                where = f"{path}:{lineno}"
                try:
                    raw = json.loads(line)
                except json.JSONDecodeError as e:
                    raise DataError(f"{where}: malformed record: {e.msg}") from e
                if not isinstance(raw, dict):
                    raise DataError(f"{where}: record must be a JSON object")
                rec = {canon: raw.get(actual) for canon, actual in fields.items()}
                yield where, rec

    return _build_corpus(records(), name=name or path.stem, tasks=tasks)


# --- India police events adapter --------------------------------------------

_ID_COLUMNS = ("doc_id", "docid", "document_id", "doc", "id", "article_id")
_ORDER_COLUMNS = ("sent_id", "sentence_id", "sent_index", "sentence_index", "sent_num", "sentence_num")
_TEXT_COLUMNS = ("text", "sentence", "sent_text", "sentence_text")
_LABEL_LIST_COLUMNS = ("labels", "events", "classes")


def _norm_column(col: str) -> str:
    return col.strip().lower().replace(" ", "_").lstrip("﻿")


def _find_file(root: Path, stem_hint: str) -> Path | None:
    candidates = [
        p
        for p in sorted(root.rglob("*"))
        if p.is_file() and p.suffix.lower() in (".csv", ".jsonl", ".json") and stem_hint in p.name.lower()
    ]
    return candidates[0] if candidates else None


def _read_rows(path: Path) -> list[dict]:
    if path.suffix.lower() == ".csv":
        with path.open("r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            return [{_norm_column(k): v for k, v in row.items() if k is not None} for row in reader]
    rows = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"{path}:{lineno}: malformed record: {e.msg}") from e
            rows.append({_norm_column(k): v for k, v in raw.items()})
    return rows


def _pick(row_keys: set[str], candidates: Sequence[str], what: str, path: Path) -> str:
    for c in candidates:
        if c in row_keys:
            return c
    raise DataError(f"{path}: layout mismatch: no {what} column among {', '.join(candidates)}")


def _row_task_labels(row: dict, columns: Mapping[str, str], list_column: str | None, where: str) -> dict[str, bool]:
    if list_column is not None:
        raw = row.get(list_column) or ""
        if isinstance(raw, str):
            present = {_norm_column(x) for x in raw.replace(";", ",").split(",") if x.strip()}
        elif isinstance(raw, (list, tuple)):
            present = {_norm_column(str(x)) for x in raw}
        else:
            raise DataError(f"{where}: cannot interpret label list {raw!r}")
        return {task: task in present for task in INDIA_TASKS}
    return {task: _coerce_bool(row[col], where) for task, col in columns.items()}


def ingest_india_police(path: str | Path) -> Corpus:
    """Load the India police events release from its published directory layout.

    Expects a sentence-level file (name containing "sent", CSV or JSONL) with a
    document id, an optional sentence-order column, sentence text, and the five
    event labels either as one column per task or as a delimited label list.
    A doc-level file (name containing "doc") is used for document text when
    present and cross-checked against the OR of the sentence labels.
    """
    root = Path(path)
    if not root.is_dir():
        raise DataError(f"dataset directory not found: {root}")
    sent_path = _find_file(root, "sent")
    if sent_path is None:
        raise DataError(f"{root}: layout mismatch: no sentence-level file (expected a *sent*.csv or *sent*.jsonl)")
    doc_path = _find_file(root, "doc")

    sent_rows = _read_rows(sent_path)
    if not sent_rows:
        raise DataError(f"{sent_path}: no sentence records")
    keys = set(sent_rows[0])
    id_col = _pick(keys, _ID_COLUMNS, "document id", sent_path)
    text_col = _pick(keys, _TEXT_COLUMNS, "sentence text", sent_path)
    order_col = next((c for c in _ORDER_COLUMNS if c in keys), None)
    label_cols = {task: col for task in INDIA_TASKS for col in (task, f"label_{task}") if col in keys}
    list_col = None
    if len(label_cols) < len(INDIA_TASKS):
        list_col = next((c for c in _LABEL_LIST_COLUMNS if c in keys), None)
        if list_col is None:
            raise DataError(
                f"{sent_path}: layout mismatch: need columns for tasks {', '.join(INDIA_TASKS)} "
                f"or a label-list column among {', '.join(_LABEL_LIST_COLUMNS)}"
            )

    # Doc-level file: enumerates valid ids, may carry text and doc labels.
    doc_text: dict[str, str] = {}
    doc_file_labels: dict[str, dict[str, bool]] = {}
    doc_order: list[str] = []
    if doc_path is not None:
        doc_rows = _read_rows(doc_path)
        dkeys = set(doc_rows[0]) if doc_rows else set()
        d_id_col = _pick(dkeys, _ID_COLUMNS, "document id", doc_path)
        d_text_col = next((c for c in _TEXT_COLUMNS if c in dkeys), None)
        d_label_cols = {task: col for task in INDIA_TASKS for col in (task, f"label_{task}") if col in dkeys}
        d_list_col = next((c for c in _LABEL_LIST_COLUMNS if c in dkeys), None) if len(d_label_cols) < len(INDIA_TASKS) else None
        for i, row in enumerate(doc_rows, start=1):
            where = f"{doc_path}:{i}"
            doc_id = str(row[d_id_col])
            if doc_id in doc_text or doc_id in set(doc_order):
                raise DataError(f"{where}: duplicate doc_id {doc_id!r}")
            doc_order.append(doc_id)
            if d_text_col is not None and row.get(d_text_col):
                doc_text[doc_id] = str(row[d_text_col])
            if len(d_label_cols) == len(INDIA_TASKS) or d_list_col is not None:
                doc_file_labels[doc_id] = _row_task_labels(row, d_label_cols, d_list_col, where)

    known_ids = set(doc_order) if doc_order else None
    sentences: dict[str, list[tuple[float, int, str]]] = {}
    sent_labels: dict[str, dict[str, bool]] = {}
    for i, row in enumerate(sent_rows, start=1):
        where = f"{sent_path}:{i}"
        doc_id = str(row[id_col])
        if known_ids is not None and doc_id not in known_ids:
            raise DataError(f"{where}: sentence references unknown document {doc_id!r}")
        order_key = float(row[order_col]) if order_col and row.get(order_col) not in (None, "") else float(i)
        sentences.setdefault(doc_id, []).append((order_key, i, str(row[text_col])))
        labels = _row_task_labels(row, label_cols, list_col, where)
        acc = sent_labels.setdefault(doc_id, {task: False for task in INDIA_TASKS})
        for task in INDIA_TASKS:
            acc[task] = acc[task] or labels[task]

    ordered_ids = doc_order if doc_order else list(sentences)
    records = []
    for doc_id in ordered_ids:
        if doc_id not in sentences:
            raise DataError(f"{doc_path}: document {doc_id!r} has no sentences in {sent_path.name}")
        sents = [text for _, _, text in sorted(sentences[doc_id], key=lambda t: (t[0], t[1]))]
        derived = sent_labels[doc_id]
        if doc_id in doc_file_labels and doc_file_labels[doc_id] != derived:
            diffs = [t for t in INDIA_TASKS if doc_file_labels[doc_id][t] != derived[t]]
            raise DataError(
                f"{doc_path}: document {doc_id!r} labels disagree with OR over its sentences for: {', '.join(diffs)}"
            )
        records.append(
            (
                f"{sent_path}(doc {doc_id})",
                {
                    "doc_id": doc_id,
                    "text": doc_text.get(doc_id, " ".join(sents)),
                    "sentences": sents,
                    "labels": derived,
                },
            )
        )
    return _build_corpus(records, name="india", tasks=INDIA_TASKS, expected_stats=INDIA_EXPECTED_STATS)


# --- Protest news adapter ----------------------------------------------------

_PROTEST_ID_FIELDS = ("id", "doc_id", "article_id", "docid")
_PROTEST_TEXT_FIELDS = ("text", "article", "body")
_PROTEST_LABEL_FIELDS = ("label", "labels", "protest", "class")


def ingest_protestnews(path: str | Path, subset_size: int | None = None, seed: int | None = None) -> Corpus:
    """Load the protest news document-level file (line-delimited JSON).

    Each record carries a document id, the article text, and a binary protest
    label. ``subset_size`` draws that many documents without replacement using
    numpy's seeded PCG64 generator; the sample keeps the original file order
    and is identical for identical (file, seed).
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"corpus file not found: {path}")

    raw_records: list[tuple[str, dict]] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}"
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"{where}: malformed record: {e.msg}") from e
            doc_id = next((raw[f] for f in _PROTEST_ID_FIELDS if f in raw), None)
            text = next((raw[f] for f in _PROTEST_TEXT_FIELDS if f in raw), None)
            label = next((raw[f] for f in _PROTEST_LABEL_FIELDS if f in raw), None)
            if doc_id is None or text is None or label is None:
                raise DataError(f"{where}: record needs an id, text, and a binary protest label")
            raw_records.append(
                (where, {"doc_id": str(doc_id), "text": text, "labels": {"protest": _coerce_bool(label, where)}})
            )

    n = len(raw_records)
    expected = PROTEST_EXPECTED_STATS if subset_size is None else None
    if subset_size is not None:
        if subset_size > n:
            raise DataError(f"subset_size {subset_size} exceeds available documents ({n})")
        if subset_size < 1:
            raise ConfigError("subset_size must be >= 1")
        if seed is None:
            raise ConfigError("a seed is required when sampling a subset")
        rng = np.random.default_rng(seed)
        idx = np.sort(rng.choice(n, size=subset_size, replace=False))
        raw_records = [raw_records[i] for i in idx]

    return _build_corpus(raw_records, name="protestnews", tasks=PROTEST_TASKS, expected_stats=expected)


def verify_stats(corpus: Corpus) -> list[TaskLabelSummary]:
    """Per-task positive counts and fractions, flagged against expected stats.

    A mismatch is reported through ``matches_expected``, never raised.
    """
    total = len(corpus.documents)
    summaries = []
    for task in corpus.tasks:
        positives = sum(1 for d in corpus.documents if d.labels[task])
        exp = (corpus.expected_stats or {}).get(task)
        summaries.append(
            TaskLabelSummary(
                task=task,
                positives=positives,
                total=total,
                fraction=positives / total,
                expected_positives=exp[0] if exp else None,
                expected_fraction=exp[1] if exp else None,
            )
        )
    return summaries
