"""Zero-shot document triage: rank documents by query entailment probability.

Pipeline: ingest a labeled corpus, segment documents into premise units that
fit the model's token budget, score each unit against class-describing
queries with an NLI backend, aggregate per document by max, rank, and
evaluate with recall-at-proportion-read curves and average precision.
"""

from .corpus import (
    Corpus,
    Document,
    TaskLabelSummary,
    ingest_generic,
    ingest_india_police,
    ingest_protestnews,
    verify_stats,
)
from .errors import BackendError, ConfigError, DataError, EntrankError
from .evaluator import (
    EvaluationRow,
    average_precision,
    evaluate_ranking,
    grouped_mean_ap,
    mean_average_precision,
    proportion_grid,
    recall_at,
    recall_curve,
)
from .queries import Query, compose_extended, get_query, queries_for
from .ranker import DocScore, Ranking, RankingConfig, aggregate, build_ranking, rank
from .scorer import (
    BackendConfig,
    MarkerBackend,
    OracleBackend,
    RandomBackend,
    UnitScore,
    load_scores,
    make_backend,
    save_scores,
    score_pair,
    score_units,
)
from .segmenter import (
    ScoringUnit,
    TokenBudget,
    WhitespaceTokenizer,
    chunk_document,
    segment_corpus,
    segment_document,
    segment_sentences,
    split_sentences,
)

__version__ = "0.1.0"

__all__ = [
    "BackendConfig",
    "BackendError",
    "ConfigError",
    "Corpus",
    "DataError",
    "DocScore",
    "Document",
    "EntrankError",
    "EvaluationRow",
    "MarkerBackend",
    "OracleBackend",
    "Query",
    "RandomBackend",
    "Ranking",
    "RankingConfig",
    "ScoringUnit",
    "TaskLabelSummary",
    "TokenBudget",
    "UnitScore",
    "WhitespaceTokenizer",
    "aggregate",
    "average_precision",
    "build_ranking",
    "chunk_document",
    "compose_extended",
    "evaluate_ranking",
    "get_query",
    "grouped_mean_ap",
    "ingest_generic",
    "ingest_india_police",
    "ingest_protestnews",
    "load_scores",
    "make_backend",
    "mean_average_precision",
    "proportion_grid",
    "queries_for",
    "rank",
    "recall_at",
    "recall_curve",
    "save_scores",
    "score_pair",
    "score_units",
    "segment_corpus",
    "segment_document",
    "segment_sentences",
    "split_sentences",
    "verify_stats",
    "__version__",
]
