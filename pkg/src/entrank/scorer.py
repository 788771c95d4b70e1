"""Scoring engines and the on-disk score cache.

A backend maps (premise unit, hypothesis) pairs to the probability that the
premise entails the hypothesis. Three model-free backends ship for testing
and plumbing work: a marker-substring rule, a gold-label oracle, and a
seeded-random scorer. The transformer-backed engine lives in
``entrank.neural`` and is loaded lazily so the core package works without
torch installed.

Every backend is deterministic per (premise, hypothesis) pair, so scores do
not depend on batch size, unit order, or worker count.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import BackendError, ConfigError, DataError
from .queries import Query
from .segmenter import ScoringUnit

NLI_LABELS = ("contradiction", "neutral", "entailment")
PROBABILITY_MODES = ("three_class", "entail_contra")
MOCK_RULES = ("marker", "oracle", "random")
DEFAULT_MARKER = "PROTEST_MARKER"


@dataclass(frozen=True)
class BackendConfig:
    """Everything needed to construct a scoring backend.

    ``label_order`` states which output position carries which class and must
    be a permutation of the canonical three labels; the two public MNLI
    checkpoints disagree on it, so it is never assumed. ``probability_mode``
    selects the normalization: softmax over all three classes (default), or
    over the entailment/contradiction pair only.
    """

    backend_id: str
    model_path: str | None = None
    label_order: tuple[str, str, str] = NLI_LABELS
    max_tokens: int = 512
    batch_size: int = 32
    parallelism: int = 1
    probability_mode: str = "three_class"
    mock_rule: str | None = None
    mock_marker: str = DEFAULT_MARKER
    seed: int = 0

    def __post_init__(self):
        if not self.backend_id:
            raise ConfigError("backend_id cannot be empty")
        if sorted(self.label_order) != sorted(NLI_LABELS):
            raise ConfigError(
                f"label_order must be a permutation of {NLI_LABELS}, got {self.label_order}"
            )
        if self.max_tokens < 1:
            raise ConfigError(f"max_tokens must be >= 1, got {self.max_tokens}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.parallelism < 1:
            raise ConfigError(f"parallelism must be >= 1, got {self.parallelism}")
        if self.probability_mode not in PROBABILITY_MODES:
            raise ConfigError(
                f"probability_mode must be one of {', '.join(PROBABILITY_MODES)}; got {self.probability_mode!r}"
            )
        if self.mock_rule is not None and self.mock_rule not in MOCK_RULES:
            raise ConfigError(f"mock_rule must be one of {', '.join(MOCK_RULES)}; got {self.mock_rule!r}")


class Backend:
    """Interface: score a batch of units against one hypothesis."""

    backend_id: str

    def score(self, units: Sequence[ScoringUnit], hypothesis: str) -> np.ndarray:
        raise NotImplementedError


class MarkerBackend(Backend):
    """Probability 1.0 iff a marker substring occurs in the premise, else 0.0."""

    def __init__(self, backend_id: str = "mock-marker", marker: str = DEFAULT_MARKER):
        self.backend_id = backend_id
        self.marker = marker

    def score(self, units: Sequence[ScoringUnit], hypothesis: str) -> np.ndarray:
        return np.array([1.0 if self.marker in u.text else 0.0 for u in units], dtype=np.float64)


class OracleBackend(Backend):
    """Scores straight from gold document labels; upper-bounds every metric."""

    def __init__(self, labels: Mapping[str, bool], backend_id: str = "mock-oracle"):
        self.backend_id = backend_id
        self.labels = dict(labels)

    def score(self, units: Sequence[ScoringUnit], hypothesis: str) -> np.ndarray:
        out = np.empty(len(units), dtype=np.float64)
        for i, u in enumerate(units):
            if u.doc_id not in self.labels:
                raise BackendError(f"oracle backend has no gold label for document {u.doc_id!r}")
            out[i] = 1.0 if self.labels[u.doc_id] else 0.0
        return out


class RandomBackend(Backend):
    """Uniform pseudo-random scores hashed from (seed, premise, hypothesis).

    Hashing the pair content instead of drawing from a stream makes the score
    a pure function of the pair, so shuffling, batching, and parallelism
    cannot change it.
    """

    def __init__(self, seed: int = 0, backend_id: str = "mock-random"):
        self.backend_id = backend_id
        self.seed = seed

    def _probability(self, premise: str, hypothesis: str) -> float:
        payload = f"{self.seed}\x1f{premise}\x1f{hypothesis}".encode("utf-8")
        digest = hashlib.sha256(payload).digest()
        return int.from_bytes(digest[:8], "big") / 2.0**64

    def score(self, units: Sequence[ScoringUnit], hypothesis: str) -> np.ndarray:
        return np.array([self._probability(u.text, hypothesis) for u in units], dtype=np.float64)


def make_backend(config: BackendConfig, labels: Mapping[str, bool] | None = None) -> Backend:
    """Build the backend a config describes; transformer backends load lazily."""
    if config.mock_rule == "marker":
        return MarkerBackend(config.backend_id, marker=config.mock_marker)
    if config.mock_rule == "oracle":
        if labels is None:
            raise ConfigError("the oracle backend needs gold labels")
        return OracleBackend(labels, config.backend_id)
    if config.mock_rule == "random":
        return RandomBackend(config.seed, config.backend_id)
    from . import neural

    return neural.load_backend(config)


@dataclass(frozen=True)
class UnitScore:
    """One scored (unit, query) pair, the cache's unit of storage."""

    doc_id: str
    unit_index: int
    task: str
    qtype: str
    backend_id: str
    probability: float

    def key(self) -> tuple:
        return (self.doc_id, self.unit_index, self.task, self.qtype, self.backend_id)

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise DataError(
                f"probability for ({self.doc_id}, unit {self.unit_index}) is {self.probability}, outside [0, 1]"
            )


def score_pair(premise: str, hypothesis: str, backend: Backend) -> float:
    """Entailment probability for one premise/hypothesis pair."""
    unit = ScoringUnit(doc_id="_pair", unit_index=0, text=premise, granularity="sentence",
                       token_count=len(premise.split()))
    return float(backend.score([unit], hypothesis)[0])


def score_units(
    units: Sequence[ScoringUnit],
    query: Query,
    backend: Backend,
    batch_size: int = 32,
    parallelism: int = 1,
) -> list[UnitScore]:
    """Score units against one query, batched and optionally threaded.

    ``executor.map`` yields results in submission order, so the output always
    lines up with the input regardless of worker count.
    """
    if batch_size < 1 or parallelism < 1:
        raise ConfigError("batch_size and parallelism must be >= 1")
    if not units:
        raise DataError("no scoring units given")
    batches = [units[i : i + batch_size] for i in range(0, len(units), batch_size)]
    if parallelism == 1 or len(batches) == 1:
        parts = [backend.score(b, query.text) for b in batches]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            parts = list(pool.map(lambda b: backend.score(b, query.text), batches))
    probs = np.concatenate(parts)
    if probs.shape != (len(units),):
        raise BackendError(
            f"backend {backend.backend_id!r} returned {probs.shape[0]} scores for {len(units)} units"
        )
    return [
        UnitScore(
            doc_id=u.doc_id,
            unit_index=u.unit_index,
            task=query.task,
            qtype=query.qtype,
            backend_id=backend.backend_id,
            probability=float(p),
        )
        for u, p in zip(units, probs)
    ]


# --- score cache -------------------------------------------------------------

_CACHE_FIELDS = ("doc_id", "unit_index", "task", "qtype", "backend_id", "probability")


def save_scores(records: Sequence[UnitScore], path: str | Path) -> None:
    """Write records as line-delimited JSON.

    The probability is stored as its repr string, which round-trips the float
    bit for bit; see load_scores.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    seen: set[tuple] = set()
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            key = rec.key()
            if key in seen:
                raise DataError(f"duplicate score record for {key}")
            seen.add(key)
            obj = {f: getattr(rec, f) for f in _CACHE_FIELDS}
            obj["probability"] = repr(rec.probability)
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def load_scores(path: str | Path) -> list[UnitScore]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"score cache not found: {path}")
    records: list[UnitScore] = []
    seen: set[tuple] = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"{where}: malformed record: {e.msg}") from e
            missing = [f for f in _CACHE_FIELDS if f not in obj]
            if missing:
                raise DataError(f"{where}: missing field(s): {', '.join(missing)}")
            unknown = [f for f in obj if f not in _CACHE_FIELDS]
            if unknown:
                raise DataError(f"{where}: unknown field(s): {', '.join(unknown)}")
            try:
                prob = float(obj["probability"])
            except (TypeError, ValueError):
                raise DataError(f"{where}: probability {obj['probability']!r} is not a number") from None
            try:
                rec = UnitScore(
                    doc_id=str(obj["doc_id"]),
                    unit_index=int(obj["unit_index"]),
                    task=str(obj["task"]),
                    qtype=str(obj["qtype"]),
                    backend_id=str(obj["backend_id"]),
                    probability=prob,
                )
            except DataError as e:
                raise DataError(f"{where}: {e}") from None
            if rec.key() in seen:
                raise DataError(f"{where}: duplicate score record for {rec.key()}")
            seen.add(rec.key())
            records.append(rec)
    return records


def filter_scores(records: Sequence[UnitScore], task: str | None = None, qtype: str | None = None,
                  backend_id: str | None = None) -> list[UnitScore]:
    """Select one cache slice; eval and rank work on exactly one slice."""
    out = [
        r for r in records
        if (task is None or r.task == task)
        and (qtype is None or r.qtype == qtype)
        and (backend_id is None or r.backend_id == backend_id)
    ]
    return out
