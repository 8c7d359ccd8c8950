"""Report artifacts: metric/confusion/histogram CSVs and standalone SVGs.

Everything is rendered by hand with fixed float formatting so repeated runs
produce byte-identical files (no plotting library, no timestamps).
"""

from __future__ import annotations

import json
from pathlib import Path

from .evaluation import AblationRow, ConfidenceHistogram, ConfusionMatrix, EvaluationReport


def metrics_csv(rows: list[AblationRow]) -> str:
    out = ["pipeline,accuracy,precision,recall,f1"]
    for row in rows:
        if row.metrics is None:
            out.append(f"{row.name},,,,")
        else:
            m = row.metrics
            out.append(f"{row.name},{m.accuracy:.4f},{m.weighted_precision:.4f},"
                       f"{m.weighted_recall:.4f},{m.weighted_f1:.4f}")
    return "\n".join(out) + "\n"


def confusion_csv(cm: ConfusionMatrix) -> str:
    header = "label," + ",".join(cm.labels)
    rows = [header]
    for i, label in enumerate(cm.labels):
        rows.append(label + "," + ",".join(str(int(c)) for c in cm.counts[i]))
    return "\n".join(rows) + "\n"


def histogram_csv(hist: ConfidenceHistogram) -> str:
    rows = ["bin_lo,bin_hi,correct,wrong"]
    for i in range(len(hist.correct_counts)):
        rows.append(f"{hist.edges[i]:.2f},{hist.edges[i + 1]:.2f},"
                    f"{int(hist.correct_counts[i])},{int(hist.wrong_counts[i])}")
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# SVG rendering
# ---------------------------------------------------------------------------

def _esc(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def confusion_svg(cm: ConfusionMatrix, title: str = "") -> str:
    cell, left, top = 30, 150, 120
    n = len(cm.labels)
    width, height = left + n * cell + 20, top + n * cell + 20
    max_count = max(1, int(cm.counts.max()))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="monospace" font-size="11">',
        f'<text x="{left}" y="20" font-size="14">{_esc(title or "confusion matrix")}</text>',
        f'<text x="{left}" y="40" fill="#555">rows: gold, columns: predicted</text>',
    ]
    for j, label in enumerate(cm.labels):
        x = left + j * cell + cell // 2
        parts.append(f'<text x="{x}" y="{top - 8}" text-anchor="start" '
                     f'transform="rotate(-45 {x} {top - 8})">{_esc(label)}</text>')
    for i, label in enumerate(cm.labels):
        y = top + i * cell
        parts.append(f'<text x="{left - 8}" y="{y + cell * 2 // 3}" text-anchor="end">{_esc(label)}</text>')
        for j in range(n):
            count = int(cm.counts[i, j])
            shade = 255 - int(round(195 * count / max_count))
            fill = f"rgb({shade},{shade},255)" if count else "rgb(255,255,255)"
            x = left + j * cell
            parts.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                         f'fill="{fill}" stroke="#999"/>')
            if count:
                parts.append(f'<text x="{x + cell // 2}" y="{y + cell * 2 // 3}" '
                             f'text-anchor="middle">{count}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def histogram_svg(hist: ConfidenceHistogram, title: str = "") -> str:
    bins = len(hist.correct_counts)
    bar, gap, left, bottom, height = 14, 6, 60, 40, 220
    width = left + bins * (2 * bar + gap) + 20
    total_height = height + bottom + 60
    peak = max(1, int(max(hist.correct_counts.max(), hist.wrong_counts.max())))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{total_height}" '
        f'font-family="monospace" font-size="10">',
        f'<text x="{left}" y="18" font-size="13">{_esc(title or "confidence histogram")}</text>',
        f'<rect x="{left}" y="26" width="10" height="10" fill="#2a9d4e"/>'
        f'<text x="{left + 14}" y="35">correct</text>',
        f'<rect x="{left + 80}" y="26" width="10" height="10" fill="#d04a3a"/>'
        f'<text x="{left + 94}" y="35">wrong</text>',
        f'<line x1="{left}" y1="{50 + height}" x2="{width - 10}" y2="{50 + height}" stroke="#333"/>',
    ]
    for i in range(bins):
        x = left + i * (2 * bar + gap)
        for k, (counts, color) in enumerate(((hist.correct_counts, "#2a9d4e"),
                                             (hist.wrong_counts, "#d04a3a"))):
            value = int(counts[i])
            h = int(round(height * value / peak)) if value else 0
            parts.append(f'<rect x="{x + k * bar}" y="{50 + height - h}" width="{bar - 1}" '
                         f'height="{h}" fill="{color}"/>')
        if i % 4 == 0:
            parts.append(f'<text x="{x}" y="{50 + height + 14}">{hist.edges[i]:.2f}</text>')
    parts.append(f'<text x="{width - 38}" y="{50 + height + 14}">1.00</text>')
    parts.append(f'<text x="{left - 50}" y="{54}">{peak}</text>')
    parts.append(f'<text x="{left - 50}" y="{50 + height}">0</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# File emission
# ---------------------------------------------------------------------------

def write_report_files(report: EvaluationReport, outdir: str | Path) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = report.pipeline.lower()
    written = []

    def emit(name: str, text: str) -> None:
        path = outdir / name
        path.write_text(text, encoding="utf-8")
        written.append(path)

    row = AblationRow(report.pipeline, report.metrics, report.split_hash)
    emit(f"{stem}_metrics.csv", metrics_csv([row]))
    emit(f"{stem}_confusion.csv", confusion_csv(report.confusion))
    emit(f"{stem}_confusion.svg", confusion_svg(report.confusion, f"{report.pipeline} confusion matrix"))
    emit(f"{stem}_histogram.csv", histogram_csv(report.histogram))
    emit(f"{stem}_histogram.svg", histogram_svg(report.histogram, f"{report.pipeline} intent histogram"))
    return written


def write_ablation_files(rows: list[AblationRow], outdir: str | Path,
                         with_reports: bool = True) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    csv_path = outdir / "ablation.csv"
    csv_path.write_text(metrics_csv(rows), encoding="utf-8")
    written.append(csv_path)
    meta = {
        "rows": [{"pipeline": r.name, "split_hash": r.split_hash, "error": r.error,
                  "entity_metrics": None if not (r.report and r.report.entity_metrics) else {
                      "precision": r.report.entity_metrics.weighted_precision,
                      "recall": r.report.entity_metrics.weighted_recall,
                      "f1": r.report.entity_metrics.weighted_f1,
                  }} for r in rows],
    }
    meta_path = outdir / "ablation_meta.json"
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written.append(meta_path)
    if with_reports:
        for row in rows:
            if row.report is not None:
                written.extend(write_report_files(row.report, outdir))
    return written
