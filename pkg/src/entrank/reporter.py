"""Human-facing outputs: reading lists, recall-curve plots, and metric tables.

Plots are self-contained SVG with nothing random in them (fixed canvas,
fixed palette, coordinates formatted to two decimals), so identical inputs
produce byte-identical files. Displayed numbers are rounded half to even at
two decimals; the machine-readable companions keep full precision, and
re-ingesting them reproduces the values exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import Corpus
from .errors import DataError
from .evaluator import EvaluationRow, mean_average_precision, reading_cutoff
from .ranker import Ranking
from .segmenter import ScoringUnit

DEFAULT_CHECKPOINTS = (0.05, 0.10, 0.25, 0.50, 0.75, 1.00)


def round2(value: float) -> str:
    """Two-decimal display string, rounding half to even.

    >>> round2(0.774)
    '0.77'
    >>> round2(0.125)
    '0.12'
    >>> round2(0.135)
    '0.14'
    """
    return str(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))


# --- reading lists -----------------------------------------------------------


def build_reading_list(
    ranking: Ranking,
    proportion: float,
    units_by_doc: Mapping[str, Sequence[ScoringUnit]] | None = None,
    corpus: Corpus | None = None,
) -> list[dict]:
    """Top ceil(p * N) ranked documents with their triggering passages.

    The passage is the argmax unit's text when the segmentation is supplied;
    gold labels are attached when the corpus is supplied.
    """
    n = len(ranking.entries)
    if n == 0:
        raise DataError("cannot build a reading list from an empty ranking")
    cutoff = reading_cutoff(proportion, n)
    labels: Mapping[str, bool] | None = None
    if corpus is not None:
        labels = corpus.task_labels(ranking.config.task)
    rows = []
    for i, e in enumerate(ranking.entries[:cutoff], start=1):
        row: dict = {"rank": i, "doc_id": e.doc_id, "score": e.score, "argmax_unit": e.argmax_unit}
        if units_by_doc is not None:
            units = units_by_doc.get(e.doc_id)
            if units is None or e.argmax_unit >= len(units):
                raise DataError(f"no unit {e.argmax_unit} for document {e.doc_id!r} in the segmentation")
            row["passage"] = units[e.argmax_unit].text
        if labels is not None:
            row["gold"] = labels[e.doc_id]
        rows.append(row)
    return rows


def emit_reading_list(
    ranking: Ranking,
    proportion: float,
    path: str | Path,
    units_by_doc: Mapping[str, Sequence[ScoringUnit]] | None = None,
    corpus: Corpus | None = None,
) -> None:
    rows = build_reading_list(ranking, proportion, units_by_doc, corpus)
    cfg = ranking.config
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(
            f"# reading list: dataset={cfg.dataset} task={cfg.task} qtype={cfg.qtype} "
            f"granularity={cfg.granularity} backend={cfg.backend_id}\n"
        )
        fh.write(f"# top {len(rows)} of {len(ranking.entries)} documents (proportion {proportion:g})\n")
        header = ["rank", "doc_id", "score", "argmax_unit"]
        if "passage" in rows[0]:
            header.append("passage")
        if "gold" in rows[0]:
            header.append("gold")
        fh.write("\t".join(header) + "\n")
        for row in rows:
            cells = [str(row["rank"]), row["doc_id"], repr(row["score"]), str(row["argmax_unit"])]
            if "passage" in row:
                cells.append(row["passage"].replace("\t", " ").replace("\n", " "))
            if "gold" in row:
                cells.append("1" if row["gold"] else "0")
            fh.write("\t".join(cells) + "\n")


# --- recall curve plots ------------------------------------------------------

WIDTH, HEIGHT = 720, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 20, 44, 52
PALETTE = ("#1b6ca8", "#d1495b", "#2e933c", "#8a4fff", "#e08e29", "#0e7c7b", "#9e2b25", "#5c5d8d")


def x_pixel(percent_read: float) -> float:
    """Horizontal pixel for a percent-of-collection-read in [0, 100]."""
    return MARGIN_L + (percent_read / 100.0) * (WIDTH - MARGIN_L - MARGIN_R)


def y_pixel(recall: float) -> float:
    """Vertical pixel for a recall in [0, 1]; the SVG y axis grows downward."""
    return HEIGHT - MARGIN_B - recall * (HEIGHT - MARGIN_T - MARGIN_B)


def _polyline(points: Sequence[tuple[float, float]], color: str, dashed: bool = False) -> str:
    coords = " ".join(f"{x_pixel(p * 100.0):.2f},{y_pixel(r):.2f}" for p, r in points)
    dash = ' stroke-dasharray="6,4"' if dashed else ""
    return f'<polyline fill="none" stroke="{color}" stroke-width="2"{dash} points="{coords}"/>'


def curve_svg(curves: Sequence[tuple[str, Sequence[tuple[float, float]]]], title: str) -> str:
    """Recall against percent read, with a dashed random-baseline diagonal.

    Every curve is (label, points) with points as (proportion, recall); all
    curves must share the same proportion grid.
    """
    if not curves:
        raise DataError("no curves to plot")
    first_grid = [p for p, _ in curves[0][1]]
    for label, points in curves[1:]:
        if [p for p, _ in points] != first_grid:
            raise DataError(f"curve {label!r} is on a different proportion grid")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="13">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.2f}" y="24" text-anchor="middle" font-size="16">{title}</text>',
    ]
    for k in range(0, 6):
        pct, rec = 20.0 * k, k / 5
        gx, gy = x_pixel(pct), y_pixel(rec)
        parts.append(
            f'<line x1="{gx:.2f}" y1="{y_pixel(0):.2f}" x2="{gx:.2f}" y2="{y_pixel(1):.2f}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<line x1="{x_pixel(0):.2f}" y1="{gy:.2f}" x2="{x_pixel(100):.2f}" y2="{gy:.2f}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(f'<text x="{gx:.2f}" y="{HEIGHT - MARGIN_B + 18}" text-anchor="middle">{pct:.0f}</text>')
        parts.append(f'<text x="{MARGIN_L - 10}" y="{gy + 4:.2f}" text-anchor="end">{rec:.1f}</text>')
    parts.append(_polyline([(0.0, 0.0), (1.0, 1.0)], "#999999", dashed=True))
    for i, (label, points) in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        parts.append(_polyline(points, color))
        ly = MARGIN_T + 16 + 18 * i
        lx = x_pixel(2.0)
        parts.append(
            f'<line x1="{lx:.2f}" y1="{ly - 4}" x2="{lx + 24:.2f}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(f'<text x="{lx + 30:.2f}" y="{ly}">{label}</text>')
    parts.append(
        f'<text x="{x_pixel(50):.2f}" y="{HEIGHT - 12}" text-anchor="middle">% of collection read</text>'
    )
    parts.append(
        f'<text x="18" y="{y_pixel(0.5):.2f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {y_pixel(0.5):.2f})">recall</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts)


def emit_curve_plot(curves: Sequence[tuple[str, Sequence[tuple[float, float]]]], title: str,
                    path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(curve_svg(curves, title), encoding="utf-8")


def emit_task_plots(rows: Sequence[EvaluationRow], out_dir: str | Path) -> list[Path]:
    """One chart per (dataset, task); legend entries are (backend, qtype)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    by_task: dict[tuple[str, str], list[EvaluationRow]] = {}
    for row in rows:
        by_task.setdefault((row.dataset, row.task), []).append(row)
    for (dataset, task), members in sorted(by_task.items()):
        curves = [
            (f"{m.backend} {m.qtype} ({m.granularity})", m.recalls)
            for m in sorted(members, key=lambda r: (r.backend, r.qtype, r.granularity))
        ]
        path = out_dir / f"recall_{dataset}_{task}.svg"
        emit_curve_plot(curves, f"{dataset} / {task}", path)
        written.append(path)
    return written


# --- metric tables -----------------------------------------------------------


def emit_curves_csv(rows: Sequence[EvaluationRow], path: str | Path) -> None:
    """Long-format curve export: one (config, proportion, recall) per line."""
    if not rows:
        raise DataError("no evaluation rows to write")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        fh.write("dataset,task,qtype,granularity,backend,p,recall\n")
        for row in rows:
            for p, r in row.recalls:
                fh.write(f"{row.dataset},{row.task},{row.qtype},{row.granularity},{row.backend},{p!r},{r!r}\n")


def emit_metrics_csv(rows: Sequence[EvaluationRow], path: str | Path,
                     checkpoints: Sequence[float] = DEFAULT_CHECKPOINTS) -> None:
    """Full-precision long-form CSV, one row per evaluated ranking."""
    if not rows:
        raise DataError("no evaluation rows to write")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ["dataset", "task", "qtype", "granularity", "backend", "ap"]
    header += [f"recall@{int(round(p * 100))}%" for p in checkpoints]
    with path.open("w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = [row.dataset, row.task, row.qtype, row.granularity, row.backend, repr(row.ap)]
            cells += [repr(row.recall_at(p)) for p in checkpoints]
            fh.write(",".join(cells) + "\n")


@dataclass(frozen=True)
class MeanApRow:
    """One display-table row: a (backend, qtype, granularity) slice over tasks."""

    backend: str
    qtype: str
    granularity: str
    per_task: tuple[tuple[str, float], ...]
    mean_ap: float


def mean_ap_rows(rows: Sequence[EvaluationRow]) -> list[MeanApRow]:
    """Group evaluation rows into display rows. All rows must share a dataset."""
    if not rows:
        raise DataError("no evaluation rows to summarize")
    datasets = {r.dataset for r in rows}
    if len(datasets) > 1:
        raise DataError(f"mean-AP table mixes datasets: {sorted(datasets)}")
    groups: dict[tuple[str, str, str], list[EvaluationRow]] = {}
    for r in rows:
        groups.setdefault((r.backend, r.qtype, r.granularity), []).append(r)
    out = []
    for (backend, qtype, granularity), members in groups.items():
        tasks = [m.task for m in members]
        if len(set(tasks)) != len(tasks):
            raise DataError(f"duplicate task in mean-AP group ({backend}, {qtype}, {granularity})")
        per_task = tuple((m.task, m.ap) for m in members)
        out.append(MeanApRow(backend, qtype, granularity, per_task,
                             mean_average_precision([m.ap for m in members])))
    return out


def format_mean_ap_table(rows: Sequence[MeanApRow], dataset: str) -> str:
    """Fixed-width text: rows (backend, qtype-granularity), columns tasks + mAP."""
    if not rows:
        raise DataError("no mean-AP rows to format")
    task_order: list[str] = []
    for row in rows:
        for task, _ in row.per_task:
            if task not in task_order:
                task_order.append(task)
    header = ["backend", "qtype", "granularity"] + task_order + ["mAP"]
    lines = [list(header)]
    for row in sorted(rows, key=lambda r: (r.backend, r.qtype, r.granularity)):
        by_task = dict(row.per_task)
        cells = [row.backend, row.qtype, row.granularity]
        cells += [round2(by_task[t]) if t in by_task else "-" for t in task_order]
        cells.append(round2(row.mean_ap))
        lines.append(cells)
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    rendered = [f"# dataset: {dataset}"]
    for j, line in enumerate(lines):
        rendered.append("  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip())
        if j == 0:
            rendered.append("  ".join("-" * w for w in widths))
    return "\n".join(rendered) + "\n"


def emit_tables(rows: Sequence[EvaluationRow], out_dir: str | Path,
                checkpoints: Sequence[float] = DEFAULT_CHECKPOINTS) -> list[Path]:
    """Machine-readable CSVs plus one aligned display table per dataset."""
    if not rows:
        raise DataError("no evaluation rows to write")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    csv_path = out_dir / "metrics.csv"
    emit_metrics_csv(rows, csv_path, checkpoints)
    written.append(csv_path)
    curves_path = out_dir / "curves.csv"
    emit_curves_csv(rows, curves_path)
    written.append(curves_path)
    for dataset in sorted({r.dataset for r in rows}):
        subset = [r for r in rows if r.dataset == dataset]
        table_path = out_dir / f"map_{dataset}.txt"
        table_path.write_text(format_mean_ap_table(mean_ap_rows(subset), dataset), encoding="utf-8")
        written.append(table_path)
    return written
