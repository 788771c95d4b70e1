"""Turning unit scores into an ordered reading list.

A document's score is the maximum over its units' entailment probabilities:
one strongly entailing passage is enough to surface the document. Ranking
is by descending score with ascending doc_id as the tie-break, which makes
the order total and therefore reproducible across runs, shuffles, and
parallelism settings.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import Corpus
from .errors import DataError
from .scorer import UnitScore
from .segmenter import DOC_GRANULARITIES


@dataclass(frozen=True)
class RankingConfig:
    """Identifies which (dataset, task, query, granularity, backend) a ranking is for."""

    dataset: str
    task: str
    qtype: str
    granularity: str
    backend_id: str

    def __post_init__(self):
        if self.granularity not in DOC_GRANULARITIES:
            raise DataError(
                f"granularity must be one of {', '.join(DOC_GRANULARITIES)}; got {self.granularity!r}"
            )


@dataclass(frozen=True)
class DocScore:
    """One document's aggregated score.

    ``argmax_unit`` is the smallest unit index attaining the maximum, so the
    reader is pointed at the earliest best passage.
    """

    doc_id: str
    score: float
    argmax_unit: int
    n_units: int


def aggregate(unit_scores: Sequence[UnitScore], corpus: Corpus | None = None) -> list[DocScore]:
    """Max-over-units per document, in first-seen document order.

    All scores must come from one (task, qtype, backend_id) slice; mixing
    slices in one aggregation is almost always a caching mistake, so it is
    rejected. With a corpus given, every corpus document must have at least
    one unit score and no score may reference an unknown document.
    """
    if not unit_scores:
        raise DataError("no unit scores to aggregate")
    slice_key = (unit_scores[0].task, unit_scores[0].qtype, unit_scores[0].backend_id)
    for rec in unit_scores:
        key = (rec.task, rec.qtype, rec.backend_id)
        if key != slice_key:
            raise DataError(f"mixed score slices in one aggregation: {slice_key} vs {key}")

    seen: set[tuple[str, int]] = set()
    best: dict[str, tuple[float, int, int]] = {}
    for rec in unit_scores:
        unit_key = (rec.doc_id, rec.unit_index)
        if unit_key in seen:
            raise DataError(f"duplicate unit score for {unit_key}")
        seen.add(unit_key)
        prev = best.get(rec.doc_id)
        if prev is None:
            best[rec.doc_id] = (rec.probability, rec.unit_index, 1)
            continue
        score, arg, n = prev
        if rec.probability > score or (rec.probability == score and rec.unit_index < arg):
            score, arg = rec.probability, rec.unit_index
        best[rec.doc_id] = (score, arg, n + 1)

    if corpus is not None:
        corpus_ids = {d.doc_id for d in corpus.documents}
        unknown = set(best) - corpus_ids
        if unknown:
            raise DataError(f"unit scores reference document(s) not in the corpus: {sorted(unknown)[:5]}")
        uncovered = corpus_ids - set(best)
        if uncovered:
            raise DataError(f"corpus document(s) have no unit scores: {sorted(uncovered)[:5]}")

    return [DocScore(doc_id, score, arg, n) for doc_id, (score, arg, n) in best.items()]


@dataclass(frozen=True)
class Ranking:
    config: RankingConfig
    entries: tuple[DocScore, ...]

    def __post_init__(self):
        for earlier, later in zip(self.entries, self.entries[1:]):
            if later.score > earlier.score:
                raise DataError("ranking entries are not in descending score order")

    @property
    def ranked_ids(self) -> list[str]:
        return [e.doc_id for e in self.entries]

    def entry(self, doc_id: str) -> DocScore:
        for e in self.entries:
            if e.doc_id == doc_id:
                return e
        raise DataError(f"no ranking entry for document {doc_id!r}")


def rank(doc_scores: Sequence[DocScore], config: RankingConfig) -> Ranking:
    """Descending score, ties broken by ascending doc_id."""
    ids = [d.doc_id for d in doc_scores]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise DataError(f"duplicate doc_id in document scores: {dupes[:5]}")
    entries = tuple(sorted(doc_scores, key=lambda d: (-d.score, d.doc_id)))
    return Ranking(config=config, entries=entries)


def build_ranking(unit_scores: Sequence[UnitScore], config: RankingConfig,
                  corpus: Corpus | None = None) -> Ranking:
    """Aggregate, order, and label one slice of unit scores."""
    if unit_scores:
        rec = unit_scores[0]
        found = (rec.task, rec.qtype, rec.backend_id)
        wanted = (config.task, config.qtype, config.backend_id)
        if found != wanted:
            raise DataError(f"unit scores are for {found}, ranking config says {wanted}")
    return rank(aggregate(unit_scores, corpus), config)


RANKING_COLUMNS = ("rank", "doc_id", "score", "argmax_unit")


def save_ranking(ranking: Ranking, path: str | Path) -> None:
    """Tab-separated export, best document first, scores as repr strings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        fh.write("\t".join(RANKING_COLUMNS) + "\n")
        for i, e in enumerate(ranking.entries, start=1):
            fh.write(f"{i}\t{e.doc_id}\t{e.score!r}\t{e.argmax_unit}\n")


def load_ranking(path: str | Path, config: RankingConfig) -> Ranking:
    path = Path(path)
    if not path.exists():
        raise DataError(f"ranking file not found: {path}")
    entries: list[DocScore] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header.split("\t") != list(RANKING_COLUMNS):
            raise DataError(f"{path}:1: expected header columns {RANKING_COLUMNS}")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise DataError(f"{path}:{lineno}: expected 4 tab-separated fields, got {len(parts)}")
            rank_str, doc_id, score_str, arg_str = parts
            try:
                position, score, arg = int(rank_str), float(score_str), int(arg_str)
            except ValueError as e:
                raise DataError(f"{path}:{lineno}: {e}") from None
            if position != len(entries) + 1:
                raise DataError(f"{path}:{lineno}: rank {position} out of sequence")
            if doc_id in seen:
                raise DataError(f"{path}:{lineno}: duplicate doc_id {doc_id!r}")
            seen.add(doc_id)
            entries.append(DocScore(doc_id, score, arg, n_units=0))
    return Ranking(config=config, entries=tuple(entries))
