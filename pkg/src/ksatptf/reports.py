"""Serialization of evaluation results: CSV tables, markdown tables and
scatter exports.  Machine CSVs carry shortest round-trip floats; human
tables carry 6 significant digits.
"""

from __future__ import annotations

import csv
import io
from collections import Counter

import numpy as np

from .metrics import COLUMNS, OVERALL, SUMMARY_FIELDS
from .soil import TEXTURE_CLASSES, ternary_xy


def _full(x):
    return "" if x is None else repr(float(x))


def _human(x):
    return "-" if x is None else f"{x:.6g}"


def csv_text(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def metric_table_csv(report, metric, mark_best=False):
    """Wide table: one row per model, one column per texture class plus Overall."""
    rows = [["model", *COLUMNS]]
    for m in report.models:
        row = [m]
        for col in COLUMNS:
            c = report.cells[(m, col)]
            text = _full(getattr(c, metric))
            if mark_best and c.best:
                text += "*"
            row.append(text)
        rows.append(row)
    return csv_text(rows)


def long_table_csv(report):
    rows = [["model", "class", "n", "mle", "rmsle", "best"]]
    for m in report.models:
        for col in COLUMNS:
            c = report.cells[(m, col)]
            rows.append([m, col, c.n, _full(c.mle), _full(c.rmsle), int(c.best)])
    return csv_text(rows)


def overall_csv(report):
    rows = [["model", "reference", "n", "n_not_applicable", "n_invalid_estimate", "mle", "rmsle", "best"]]
    for m in report.models:
        c = report.cells[(m, OVERALL)]
        invalid = report.pairs[m].n_invalid if m in report.pairs else 0
        rows.append(
            [m, report.labels[m], c.n, report.n_samples - c.n - invalid, invalid, _full(c.mle), _full(c.rmsle), int(c.best)]
        )
    return csv_text(rows)


def overall_text(report):
    width = max(len(m) for m in report.models)
    lines = [f"{'model':<{width}}  {'n':>7}  {'MLE':>10}  {'RMSLE':>10}"]
    for m in report.models:
        c = report.cells[(m, OVERALL)]
        mark = " *" if c.best else ""
        lines.append(f"{m:<{width}}  {c.n:>7}  {_human(c.mle):>10}  {_human(c.rmsle):>10}{mark}")
    return "\n".join(lines) + "\n"


def markdown_tables(report):
    out = []
    for title, metric in (("Mean log-transformed error (MLE)", "mle"),
                          ("Root mean square log-transformed error (RMSLE)", "rmsle")):
        out.append(f"## {title}\n")
        out.append("| Model | " + " | ".join(COLUMNS) + " |")
        out.append("|---" * (len(COLUMNS) + 1) + "|")
        for m in report.models:
            cells = []
            for col in COLUMNS:
                c = report.cells[(m, col)]
                text = _human(getattr(c, metric))
                if metric == "rmsle" and c.best:
                    text = f"**{text}**"
                cells.append(text)
            out.append(f"| {report.labels[m]} | " + " | ".join(cells) + " |")
        out.append("")
    out.append("Bold RMSLE values are the smallest in their column.\n")
    out.append("## Sample counts\n")
    out.append("| Model | " + " | ".join(COLUMNS) + " |")
    out.append("|---" * (len(COLUMNS) + 1) + "|")
    for m in report.models:
        out.append(f"| {report.labels[m]} | " + " | ".join(str(report.cells[(m, c)].n) for c in COLUMNS) + " |")
    return "\n".join(out) + "\n"


def scatter_csv(report):
    """Long format: model, class, log10_measured, log10_estimated (input order)."""
    rows = [["model", "class", "log10_measured", "log10_estimated"]]
    for m in report.models:
        p = report.pairs[m]
        for ci, lm, le in zip(p.class_index.tolist(), p.log_measured.tolist(), p.log_estimated.tolist()):
            rows.append([m, TEXTURE_CLASSES[ci].value, repr(lm), repr(le)])
    return csv_text(rows)


def scatter_svg(report, model, size=420, margin=50):
    """Measured vs estimated log10 K_sat with a dashed red 1:1 line."""
    p = report.pairs[model]
    both = np.concatenate([p.log_measured, p.log_estimated]) if p.log_measured.size else np.array([0.0, 1.0])
    lo = float(np.floor(both.min()))
    hi = float(np.ceil(both.max()))
    if hi <= lo:
        hi = lo + 1.0
    span = size - 2 * margin

    def sx(v):
        return margin + (v - lo) / (hi - lo) * span

    def sy(v):
        return size - margin - (v - lo) / (hi - lo) * span

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" fill="none" stroke="black"/>',
    ]
    step = max(1, int(round((hi - lo) / 8)))
    tick = lo
    while tick <= hi:
        out.append(f'<text x="{sx(tick):.2f}" y="{size - margin + 16}" font-size="11" text-anchor="middle">{tick:g}</text>')
        out.append(f'<text x="{margin - 8}" y="{sy(tick) + 4:.2f}" font-size="11" text-anchor="end">{tick:g}</text>')
        tick += step
    out.append(
        f'<text x="{size / 2}" y="{size - 12}" font-size="12" text-anchor="middle">'
        "log10 measured Ksat (cm/day)</text>"
    )
    out.append(
        f'<text x="14" y="{size / 2}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 14 {size / 2})">log10 estimated Ksat (cm/day)</text>'
    )
    out.append(f'<text x="{size / 2}" y="30" font-size="13" text-anchor="middle">{report.labels[model]}</text>')
    out.append('<g fill="steelblue" fill-opacity="0.5">')
    for x, y in zip(p.log_measured.tolist(), p.log_estimated.tolist()):
        out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="1.5"/>')
    out.append("</g>")
    out.append(
        f'<line x1="{sx(lo):.2f}" y1="{sy(lo):.2f}" x2="{sx(hi):.2f}" y2="{sy(hi):.2f}" '
        'stroke="red" stroke-width="1.5" stroke-dasharray="6,4"/>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def summary_stats_csv(stats):
    header = ["group", "n", "singleton"]
    for f in SUMMARY_FIELDS:
        header += [f"{f}_mean", f"{f}_sd"]
    rows = [header]
    for group, g in stats.items():
        row = [group, g.n, int(g.singleton)]
        for f in SUMMARY_FIELDS:
            row += [_full(g.mean[f]), _full(g.sd[f])]
        rows.append(row)
    return csv_text(rows)


def summary_stats_text(stats):
    """Markdown table of mean (sd) per group."""
    short = {"bulk_density": "BD", "sand_pct": "Sand%", "silt_pct": "Silt%", "clay_pct": "Clay%",
             "height": "L (cm)", "diameter": "ID (cm)", "ksat_measured": "Ksat (cm/day)"}
    lines = ["| Group | n | " + " | ".join(short[f] for f in SUMMARY_FIELDS) + " |",
             "|---" * (len(SUMMARY_FIELDS) + 2) + "|"]
    for group, g in stats.items():
        cells = []
        for f in SUMMARY_FIELDS:
            if g.mean[f] is None:
                cells.append("-")
            else:
                cells.append(f"{g.mean[f]:.6g} ({g.sd[f]:.6g})")
        lines.append(f"| {group} | {g.n} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def texture_distribution_csv(class_index):
    counts = Counter(np.asarray(class_index).tolist())
    n = int(np.asarray(class_index).size)
    rows = [["class", "name", "n", "percent"]]
    for i, cls in enumerate(TEXTURE_CLASSES):
        k = counts.get(i, 0)
        rows.append([cls.value, cls.label, k, repr(100.0 * k / n) if n else ""])
    return csv_text(rows)


def texture_points_csv(samples, class_index):
    rows = [["id", "sand_pct", "silt_pct", "clay_pct", "class", "x", "y"]]
    for s, ci in zip(samples, np.asarray(class_index).tolist()):
        x, y = ternary_xy(s.sand_pct, s.silt_pct, s.clay_pct)
        rows.append([s.id, repr(s.sand_pct), repr(s.silt_pct), repr(s.clay_pct), TEXTURE_CLASSES[ci].value, repr(x), repr(y)])
    return csv_text(rows)
