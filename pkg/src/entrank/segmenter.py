"""Splitting documents into scoring units that respect the model's input cap.

Scoring units come in two unit granularities: "sentence" (one unit per
sentence) and "chunk" (greedily packed runs of consecutive sentences). At
the run level the same choice is called "sentence" or "document"; document
mode scores chunk units. Either way every emitted unit must fit the premise
budget: the model's sequence cap minus the hypothesis tokens and the special
tokens the pair encoding inserts. A sentence longer than the budget on its
own is truncated to a prefix, never dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Mapping, Protocol, Sequence

from .corpus import Corpus, Document
from .errors import ConfigError, DataError

UNIT_GRANULARITIES = ("sentence", "chunk")
DOC_GRANULARITIES = ("sentence", "document")


def unit_granularity(doc_granularity: str) -> str:
    """Map the run-level granularity name to the unit-level one."""
    if doc_granularity not in DOC_GRANULARITIES:
        raise ConfigError(
            f"granularity must be one of {', '.join(DOC_GRANULARITIES)}; got {doc_granularity!r}"
        )
    return "sentence" if doc_granularity == "sentence" else "chunk"


def _load_abbreviations() -> frozenset[str]:
    text = resources.files("entrank.data").joinpath("abbreviations.txt").read_text("utf-8")
    return frozenset(line.strip().lower() for line in text.splitlines() if line.strip() and not line.startswith("#"))


ABBREVIATIONS = _load_abbreviations()

_TERMINAL = re.compile(r"([.!?]+[\"'”’)\]]*)(\s+)")
_WORD_BEFORE = re.compile(r"([A-Za-z][A-Za-z.&-]*\.)$")


def split_sentences(text: str, abbreviations: frozenset[str] = ABBREVIATIONS) -> list[str]:
    """Rule-based sentence splitting on terminal punctuation.

    Splits after runs of ``.!?`` (plus trailing close quotes/brackets) that
    are followed by whitespace, except when the token ending at the period is
    a known abbreviation or a single-letter initial, or the point sits inside
    an open double quote. Whitespace-only pieces are dropped; kept pieces are
    verbatim slices of the input.
    """
    text = text.strip()
    if not text:
        return []
    sentences: list[str] = []
    start = 0
    straight_open = False
    curly_depth = 0
    scanned = 0

    def advance(upto: int) -> None:
        nonlocal straight_open, curly_depth, scanned
        for ch in text[scanned:upto]:
            if ch == '"':
                straight_open = not straight_open
            elif ch == "“":
                curly_depth += 1
            elif ch == "”":
                curly_depth = max(0, curly_depth - 1)
        scanned = upto

    for m in _TERMINAL.finditer(text):
        end = m.end(1)
        advance(end)
        if straight_open or curly_depth > 0:
            continue
        candidate = text[start:end]
        word = _WORD_BEFORE.search(candidate.rstrip("\"'”’)]"))
        if word is not None:
            token = word.group(1).lower()
            bare = token.rstrip(".")
            if token in abbreviations or (len(bare) == 1 and bare.isalpha()):
                continue
        if candidate.strip():
            sentences.append(candidate.strip())
        start = m.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


class TokenCounter(Protocol):
    """Counting and prefix-truncation in the unit the budget is stated in."""

    def count(self, text: str) -> int: ...

    def truncate(self, text: str, max_tokens: int) -> str: ...


class WhitespaceTokenizer:
    """Whitespace word counting; the model-free stand-in for a real tokenizer."""

    def count(self, text: str) -> int:
        return len(text.split())

    def truncate(self, text: str, max_tokens: int) -> str:
        words = text.split()
        return " ".join(words[:max_tokens])


def count_tokens(text: str, counter: TokenCounter) -> int:
    """Token count under the active counter; must match what the scorer sees."""
    return counter.count(text)


@dataclass(frozen=True)
class TokenBudget:
    """How many premise tokens fit beside a given hypothesis.

    ``model_limit`` is the encoder's hard sequence cap and counts everything:
    premise, hypothesis, and the special tokens the pair template adds.
    """

    hypothesis_tokens: int
    special_tokens: int
    model_limit: int = 512

    def __post_init__(self):
        if self.hypothesis_tokens < 0 or self.special_tokens < 0:
            raise ConfigError("token counts cannot be negative")
        if self.model_limit < 1:
            raise ConfigError(f"model_limit must be >= 1, got {self.model_limit}")
        if self.premise_budget < 1:
            raise ConfigError(
                f"hypothesis ({self.hypothesis_tokens}) plus specials ({self.special_tokens}) "
                f"leave no room for a premise under the {self.model_limit}-token cap"
            )

    @property
    def premise_budget(self) -> int:
        return self.model_limit - self.hypothesis_tokens - self.special_tokens


@dataclass(frozen=True)
class ScoringUnit:
    """One premise to score: a sentence or a packed chunk of sentences."""

    doc_id: str
    unit_index: int
    text: str
    granularity: str
    token_count: int

    def __post_init__(self):
        if self.granularity not in UNIT_GRANULARITIES:
            raise DataError(
                f"unit granularity must be one of {', '.join(UNIT_GRANULARITIES)}; got {self.granularity!r}"
            )


def _sentences_of(doc: Document, abbreviations: frozenset[str]) -> list[str]:
    if doc.sentences is not None:
        kept = [s for s in doc.sentences if s.strip()]
    else:
        kept = split_sentences(doc.text, abbreviations)
    if not kept:
        raise DataError(f"document {doc.doc_id!r} has no non-empty text to segment")
    return kept


def _fit(text: str, budget: TokenBudget, counter: TokenCounter) -> tuple[str, int]:
    n = counter.count(text)
    if n <= budget.premise_budget:
        return text, n
    truncated = counter.truncate(text, budget.premise_budget)
    return truncated, counter.count(truncated)


def segment_sentences(
    doc: Document,
    budget: TokenBudget,
    counter: TokenCounter,
    abbreviations: frozenset[str] = ABBREVIATIONS,
) -> list[ScoringUnit]:
    """One unit per sentence, dataset-provided sentences used verbatim.

    Sentences over the premise budget are truncated to a prefix so the unit
    still scores.
    """
    units = []
    for i, sent in enumerate(_sentences_of(doc, abbreviations)):
        text, n = _fit(sent, budget, counter)
        units.append(ScoringUnit(doc.doc_id, i, text, "sentence", n))
    return units


def chunk_document(
    doc: Document,
    budget: TokenBudget,
    counter: TokenCounter,
    abbreviations: frozenset[str] = ABBREVIATIONS,
) -> list[ScoringUnit]:
    """Greedy sentence packing into budget-sized chunks, order preserved.

    A sentence joins the open chunk while the joined text still fits the
    premise budget; otherwise it starts a new chunk. A sentence that alone
    exceeds the budget becomes its own truncated unit. Every sentence lands
    in exactly one chunk.
    """
    sentences = _sentences_of(doc, abbreviations)
    units: list[ScoringUnit] = []
    open_chunk: str | None = None
    for sent in sentences:
        if open_chunk is None:
            open_chunk, _ = _fit(sent, budget, counter)
            continue
        joined = f"{open_chunk} {sent}"
        if counter.count(joined) <= budget.premise_budget:
            open_chunk = joined
        else:
            units.append(ScoringUnit(doc.doc_id, len(units), open_chunk, "chunk", counter.count(open_chunk)))
            open_chunk, _ = _fit(sent, budget, counter)
    units.append(ScoringUnit(doc.doc_id, len(units), open_chunk, "chunk", counter.count(open_chunk)))
    return units


def segment_document(
    doc: Document,
    granularity: str,
    budget: TokenBudget,
    counter: TokenCounter,
    abbreviations: frozenset[str] = ABBREVIATIONS,
) -> list[ScoringUnit]:
    """Segment one document at a run-level granularity (sentence or document)."""
    if unit_granularity(granularity) == "sentence":
        return segment_sentences(doc, budget, counter, abbreviations)
    return chunk_document(doc, budget, counter, abbreviations)


def segment_corpus(
    corpus: Corpus,
    granularity: str,
    budget: TokenBudget,
    counter: TokenCounter,
    abbreviations: frozenset[str] = ABBREVIATIONS,
) -> dict[str, list[ScoringUnit]]:
    """Segment every document; documents stay in corpus order."""
    out: dict[str, list[ScoringUnit]] = {}
    for doc in corpus.documents:
        out[doc.doc_id] = segment_document(doc, granularity, budget, counter, abbreviations)
    return out


def iter_units(segmented: Mapping[str, Sequence[ScoringUnit]]) -> Iterable[ScoringUnit]:
    for units in segmented.values():
        yield from units
