"""Command-line pipeline: ingest -> segment -> score -> rank -> evaluate -> report.

Subcommands are separable stages communicating through documented files (the
score cache, ranking exports, metric CSVs), because scoring with a real model
is hours-scale while evaluation is seconds-scale. ``run`` chains everything.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 backend error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import queries as queries_mod
from .errors import BackendError, ConfigError, DataError, EntrankError
from .evaluator import EvaluationRow, _validated_grid, evaluate_ranking, proportion_grid
from .neural import MODEL_DIR_ENV
from .ranker import RankingConfig, build_ranking, save_ranking
from .reporter import (
    DEFAULT_CHECKPOINTS,
    emit_reading_list,
    emit_task_plots,
    emit_tables,
    round2,
)
from .scorer import (
    MOCK_RULES,
    NLI_LABELS,
    PROBABILITY_MODES,
    BackendConfig,
    filter_scores,
    load_scores,
    make_backend,
    save_scores,
    score_units,
)
from .segmenter import DOC_GRANULARITIES, TokenBudget, WhitespaceTokenizer, segment_corpus

ADAPTERS = ("generic", "india", "protestnews")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage problems; these are config errors (exit 1)."""

    def error(self, message):
        raise ConfigError(message)


def _exit_code(err: EntrankError) -> int:
    if isinstance(err, ConfigError):
        return 1
    if isinstance(err, DataError):
        return 2
    if isinstance(err, BackendError):
        return 3
    return 1


# --- shared argument groups ----------------------------------------------


def _add_corpus_args(p: _Parser) -> None:
    p.add_argument("--data", required=True, help="corpus file (generic/protestnews) or dataset directory (india)")
    p.add_argument("--adapter", choices=ADAPTERS, default="generic", help="input layout")
    p.add_argument("--dataset-name", default=None, help="dataset name for generic inputs (default: file stem)")
    p.add_argument("--format-config", default=None,
                   help="JSON object remapping generic field names, e.g. '{\"doc_id\": \"id\"}'")
    p.add_argument("--subset-size", type=int, default=None, help="sample this many documents (protestnews)")
    p.add_argument("--seed", type=int, default=None, help="seed for sampling and the random mock backend")


def _add_backend_args(p: _Parser) -> None:
    p.add_argument("--backend", required=True, help="backend id; names a model directory unless --mock is given")
    p.add_argument("--mock", choices=MOCK_RULES, default=None, help="use a model-free backend rule")
    p.add_argument("--marker", default="PROTEST_MARKER", help="substring for the marker mock")
    p.add_argument("--model-path", default=None,
                   help=f"model directory (default: ${MODEL_DIR_ENV}/<backend>)")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--probability-mode", choices=PROBABILITY_MODES, default="three_class")
    p.add_argument("--label-order", default=None,
                   help="comma-separated output class order, e.g. contradiction,neutral,entailment")
    p.add_argument("--max-tokens", type=int, default=512)


def _add_slice_args(p: _Parser, multi: bool = False) -> None:
    if multi:
        p.add_argument("--tasks", default=None, help="comma-separated tasks (default: all for the dataset)")
        p.add_argument("--query-types", default=None,
                       help="comma-separated query types (default: all registered for each task)")
    else:
        p.add_argument("--task", required=True)
        p.add_argument("--query-type", required=True)
    p.add_argument("--granularity", choices=DOC_GRANULARITIES, default="sentence")


def _add_grid_arg(p: _Parser) -> None:
    p.add_argument("--grid", default=None,
                   help="comma-separated read percentages for recall curves (default: 1..100)")


def _load_corpus(args) -> corpus_mod.Corpus:
    if args.adapter == "india":
        return corpus_mod.ingest_india_police(args.data)
    if args.adapter == "protestnews":
        return corpus_mod.ingest_protestnews(args.data, subset_size=args.subset_size, seed=args.seed)
    format_config = json.loads(args.format_config) if args.format_config else None
    return corpus_mod.ingest_generic(args.data, format_config=format_config, name=args.dataset_name)


def _dataset_name(args, corpus) -> str:
    if args.adapter in ("india", "protestnews"):
        return args.adapter
    return corpus.name


def _backend_config(args) -> BackendConfig:
    label_order = tuple(args.label_order.split(",")) if args.label_order else NLI_LABELS
    if args.mock == "random" and args.seed is None:
        raise ConfigError("the random mock backend needs --seed")
    return BackendConfig(
        backend_id=args.backend,
        model_path=args.model_path,
        label_order=label_order,  # type: ignore[arg-type]
        max_tokens=args.max_tokens,
        batch_size=args.batch_size,
        parallelism=args.parallelism,
        probability_mode=args.probability_mode,
        mock_rule=args.mock,
        mock_marker=args.marker,
        seed=args.seed if args.seed is not None else 0,
    )


def _parse_grid(args) -> tuple[float, ...] | None:
    if args.grid is None:
        return None
    try:
        percents = [float(x) for x in args.grid.split(",") if x.strip()]
    except ValueError as e:
        raise ConfigError(f"--grid must be comma-separated numbers: {e}") from None
    return _validated_grid(tuple(p / 100.0 for p in percents))


def _checkpoints(grid: tuple[float, ...] | None) -> tuple[float, ...]:
    if grid is None:
        return DEFAULT_CHECKPOINTS
    on_grid = tuple(p for p in DEFAULT_CHECKPOINTS if any(abs(p - g) < 1e-12 for g in grid))
    return on_grid or grid


def _make_backend_for_task(config: BackendConfig, corpus, task: str):
    labels = corpus.task_labels(task) if config.mock_rule == "oracle" else None
    return make_backend(config, labels=labels)


def _segmentation_tools(backend, config: BackendConfig, query_text: str):
    """Token counter and budget consistent with what the backend will consume."""
    if hasattr(backend, "budget_for") and hasattr(backend, "token_counter"):
        return backend.token_counter(), backend.budget_for(query_text)
    counter = WhitespaceTokenizer()
    budget = TokenBudget(
        hypothesis_tokens=counter.count(query_text),
        special_tokens=0,
        model_limit=config.max_tokens,
    )
    return counter, budget


def _slice_pairs(args, corpus, dataset: str) -> list[tuple[str, str]]:
    """(task, qtype) pairs a multi-slice command should cover."""
    if getattr(args, "task", None) is not None:
        return [(args.task, args.query_type)]
    tasks = args.tasks.split(",") if args.tasks else list(corpus.tasks)
    qtypes = args.query_types.split(",") if args.query_types else None
    pairs = []
    for task in tasks:
        if qtypes is None:
            pairs.extend((q.task, q.qtype) for q in queries_mod.queries_for(dataset, task))
        else:
            pairs.extend((task, qt) for qt in qtypes)
    return pairs


def _score_slice(corpus, dataset, task, qtype, granularity, backend, config):
    query = queries_mod.get_query(dataset, task, qtype)
    counter, budget = _segmentation_tools(backend, config, query.text)
    segmented = segment_corpus(corpus, granularity, budget, counter)
    flat = [u for units in segmented.values() for u in units]
    return score_units(flat, query, backend, batch_size=config.batch_size, parallelism=config.parallelism)


# --- subcommands -----------------------------------------------------------


def cmd_validate(args) -> int:
    """Diagnose a configuration without mutating anything."""
    problems = 0

    def ok(msg):
        print(f"ok: {msg}")

    def problem(msg):
        nonlocal problems
        problems += 1
        print(f"problem: {msg}")

    if not Path(args.data).exists():
        problem(f"data path does not exist: {args.data}")
        corpus = None
    else:
        try:
            corpus = _load_corpus(args)
        except EntrankError as e:
            problem(str(e))
            corpus = None
    if corpus is not None:
        summaries = corpus_mod.verify_stats(corpus)
        checked = [s for s in summaries if s.expected_positives is not None]
        if checked and all(s.matches_expected for s in checked):
            ok(f"{len(corpus.documents)} documents, stats match")
        elif checked:
            for s in checked:
                if not s.matches_expected:
                    problem(
                        f"task {s.task}: {s.positives} positives, expected {s.expected_positives}"
                    )
        else:
            sentences = f" ({corpus.n_sentences} sentences)" if corpus.n_sentences else ""
            ok(f"{len(corpus.documents)} documents{sentences}, no published stats to check")
        dataset = _dataset_name(args, corpus)
        try:
            pairs = _slice_pairs(args, corpus, dataset)
        except EntrankError as e:
            problem(str(e))
            pairs = []
        for task, qtype in pairs:
            try:
                queries_mod.get_query(dataset, task, qtype)
                ok(f"query resolves: ({dataset}, {task}, {qtype})")
            except EntrankError as e:
                problem(str(e))
    if args.out_dir:
        out = Path(args.out_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
            probe = out / ".write_probe"
            probe.write_text("", encoding="utf-8")
            probe.unlink()
            ok(f"out-dir writable: {out}")
        except OSError as e:
            problem(f"out-dir not writable: {e}")
    print(f"{problems} problem(s) found")
    return 0


def cmd_score(args) -> int:
    corpus = _load_corpus(args)
    dataset = _dataset_name(args, corpus)
    config = _backend_config(args)
    records = []
    for task, qtype in _slice_pairs(args, corpus, dataset):
        backend = _make_backend_for_task(config, corpus, task)
        records.extend(_score_slice(corpus, dataset, task, qtype, args.granularity, backend, config))
    save_scores(records, args.cache_out)
    print(f"scored {len(records)} units -> {args.cache_out}")
    return 0


def cmd_rank(args) -> int:
    corpus = _load_corpus(args)
    dataset = _dataset_name(args, corpus)
    records = filter_scores(load_scores(args.cache_in), task=args.task, qtype=args.query_type,
                            backend_id=args.backend)
    if not records:
        raise DataError(
            f"score cache {args.cache_in} has no records for "
            f"(task={args.task}, qtype={args.query_type}, backend={args.backend})"
        )
    config = RankingConfig(dataset, args.task, args.query_type, args.granularity, args.backend)
    ranking = build_ranking(records, config, corpus)
    save_ranking(ranking, args.out)
    print(f"ranked {len(ranking.entries)} documents -> {args.out}")
    return 0


def _evaluate_slices(args, corpus, dataset, records, pairs, grid) -> list[EvaluationRow]:
    rows = []
    for task, qtype in pairs:
        subset = filter_scores(records, task=task, qtype=qtype, backend_id=args.backend)
        if not subset:
            raise DataError(f"score cache has no records for (task={task}, qtype={qtype}, backend={args.backend})")
        config = RankingConfig(dataset, task, qtype, args.granularity, args.backend)
        ranking = build_ranking(subset, config, corpus)
        rows.append(evaluate_ranking(ranking, corpus.task_labels(task), grid))
    return rows


def cmd_eval(args) -> int:
    corpus = _load_corpus(args)
    dataset = _dataset_name(args, corpus)
    grid = _parse_grid(args)
    records = load_scores(args.cache_in)
    pairs = _slice_pairs(args, corpus, dataset)
    rows = _evaluate_slices(args, corpus, dataset, records, pairs, grid)
    emit_tables(rows, args.out_dir, checkpoints=_checkpoints(grid))
    for row in rows:
        print(f"task={row.task} qtype={row.qtype} granularity={row.granularity} "
              f"backend={row.backend} ap={round2(row.ap)}")
    print(f"metrics -> {Path(args.out_dir) / 'metrics.csv'}")
    return 0


def cmd_report(args) -> int:
    corpus = _load_corpus(args)
    dataset = _dataset_name(args, corpus)
    grid = _parse_grid(args)
    records = load_scores(args.cache_in)
    pairs = _slice_pairs(args, corpus, dataset)
    rows = _evaluate_slices(args, corpus, dataset, records, pairs, grid)
    out_dir = Path(args.out_dir)
    written = emit_tables(rows, out_dir, checkpoints=_checkpoints(grid))
    written += emit_task_plots(rows, out_dir)

    # Reading lists need unit texts; re-segment with the whitespace counter,
    # which reproduces the scored units exactly for mock runs. Real-model runs
    # should regenerate lists via `run`, where the live tokenizer is in hand.
    counter = WhitespaceTokenizer()
    for task, qtype in pairs:
        subset = filter_scores(records, task=task, qtype=qtype, backend_id=args.backend)
        config = RankingConfig(dataset, task, qtype, args.granularity, args.backend)
        ranking = build_ranking(subset, config, corpus)
        query = queries_mod.get_query(dataset, task, qtype)
        budget = TokenBudget(hypothesis_tokens=counter.count(query.text), special_tokens=0,
                             model_limit=args.max_tokens)
        segmented = segment_corpus(corpus, args.granularity, budget, counter)
        list_path = out_dir / f"reading_list_{dataset}_{task}_{qtype}.tsv"
        emit_reading_list(ranking, args.proportion, list_path, segmented, corpus)
        written.append(list_path)
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_run(args) -> int:
    corpus = _load_corpus(args)
    dataset = _dataset_name(args, corpus)
    config = _backend_config(args)
    grid = _parse_grid(args)
    pairs = _slice_pairs(args, corpus, dataset)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    cached = load_scores(args.cache_in) if args.cache_in else None
    all_records = []
    rows = []
    for task, qtype in pairs:
        if cached is not None:
            records = filter_scores(cached, task=task, qtype=qtype, backend_id=args.backend)
            if not records:
                raise DataError(f"score cache has no records for (task={task}, qtype={qtype}, backend={args.backend})")
        else:
            backend = _make_backend_for_task(config, corpus, task)
            records = _score_slice(corpus, dataset, task, qtype, args.granularity, backend, config)
            all_records.extend(records)
        ranking_config = RankingConfig(dataset, task, qtype, args.granularity, args.backend)
        ranking = build_ranking(records, ranking_config, corpus)
        save_ranking(ranking, out_dir / "rankings" / f"{dataset}_{task}_{qtype}_{args.granularity}.tsv")
        rows.append(evaluate_ranking(ranking, corpus.task_labels(task), grid))

    if args.cache_out and cached is None:
        save_scores(all_records, args.cache_out)
    emit_tables(rows, out_dir, checkpoints=_checkpoints(grid))
    emit_task_plots(rows, out_dir)
    for row in rows:
        print(f"task={row.task} qtype={row.qtype} granularity={row.granularity} "
              f"backend={row.backend} ap={round2(row.ap)}")
    print(f"artifacts -> {out_dir}")
    return 0


# --- parser ------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="entrank", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a configuration and report diagnostics")
    _add_corpus_args(p)
    _add_slice_args(p, multi=True)
    p.add_argument("--out-dir", default=None, help="also probe this directory for writability")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("score", help="score corpus units against queries into a cache file")
    _add_corpus_args(p)
    _add_slice_args(p, multi=True)
    _add_backend_args(p)
    p.add_argument("--cache-out", required=True, help="score cache to write (line-delimited JSON)")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("rank", help="build a ranking export from cached scores")
    _add_corpus_args(p)
    _add_slice_args(p)
    p.add_argument("--backend", required=True, help="backend id the scores were produced with")
    p.add_argument("--cache-in", required=True)
    p.add_argument("--out", required=True, help="ranking file to write (TSV)")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("eval", help="compute AP and recall curves from cached scores")
    _add_corpus_args(p)
    _add_slice_args(p, multi=True)
    p.add_argument("--backend", required=True)
    p.add_argument("--cache-in", required=True)
    _add_grid_arg(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="emit tables, plots, and reading lists from cached scores")
    _add_corpus_args(p)
    _add_slice_args(p, multi=True)
    p.add_argument("--backend", required=True)
    p.add_argument("--cache-in", required=True)
    _add_grid_arg(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--proportion", type=float, default=0.25, help="reading-list depth as a proportion")
    p.add_argument("--max-tokens", type=int, default=512)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("run", help="full pipeline: score, rank, evaluate, report")
    _add_corpus_args(p)
    _add_slice_args(p, multi=True)
    _add_backend_args(p)
    _add_grid_arg(p)
    p.add_argument("--cache-in", default=None, help="reuse scores instead of running a backend")
    p.add_argument("--cache-out", default=None, help="persist produced scores")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except EntrankError as e:
        print(f"error: {e}", file=sys.stderr)
        return _exit_code(e)


if __name__ == "__main__":
    sys.exit(main())
