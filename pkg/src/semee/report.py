"""Report writers: canonical JSON, CSV, a paper-style Markdown table, and
matplotlib figures rendered to files next to the delimited output.

Reports must be byte-identical across runs given identical inputs and cached
responses, so everything is written with sorted keys and fixed float
formatting, and figure rendering is pinned to the Agg backend.
"""

from __future__ import annotations

import csv
import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .model import Scores

SCHEMA_VERSION = 1

METHOD_LABELS = {
    "semantic": "Semantic (judge)",
    "exact": "Exact Match",
    "headnoun": "Head Noun",
    "similarity": "Similarity",
}


def pct(x) -> float:
    return round(100.0 * float(x), 2)


def scores_obj(scores: Scores) -> dict:
    return {
        "precision": float(scores.precision),
        "recall": float(scores.recall),
        "f1": float(scores.f1),
        "exact": {
            "precision": str(scores.precision),
            "recall": str(scores.recall),
            "f1": str(scores.f1),
        },
    }


def write_json(report: dict, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report, f, sort_keys=True, indent=2, ensure_ascii=False)
        f.write("\n")


def _method_rows(report: dict) -> list[dict]:
    rows = []
    for method in ("exact", "headnoun", "similarity", "semantic"):
        entry = report["methods"].get(method)
        if entry is None:
            continue
        row = {"method": method}
        if entry.get("status") == "absent":
            row["status"] = entry.get("reason", "absent")
            rows.append(row)
            continue
        if method == "semantic":
            row.update({k: pct(entry["mean"][k]) for k in ("precision", "recall", "f1")})
            row.update({f"{k}_std": pct(entry["std"][k]) for k in ("precision", "recall", "f1")})
            row["trials"] = entry["n"]
        else:
            row.update({k: pct(entry["scores"][k]) for k in ("precision", "recall", "f1")})
        rows.append(row)
    return rows


def write_csv(report: dict, path):
    fields = ["method", "precision", "recall", "f1",
              "precision_std", "recall_std", "f1_std", "trials", "status"]
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fields)
        writer.writeheader()
        for row in _method_rows(report):
            writer.writerow(row)


def _rank_marks(rows, column) -> dict[str, str]:
    """Bold the best value per column, italicize the second best."""
    scored = [(r[column], r["method"]) for r in rows if column in r]
    ranked = sorted(scored, key=lambda t: -t[0])
    marks = {}
    if len(ranked) >= 1:
        marks[ranked[0][1]] = "**"
    if len(ranked) >= 2 and ranked[1][0] != ranked[0][0]:
        marks[ranked[1][1]] = "*"
    return marks


def write_markdown(report: dict, path):
    rows = _method_rows(report)
    marks = {col: _rank_marks(rows, col) for col in ("precision", "recall", "f1")}
    lines = [
        f"# Evaluation report: {report.get('dataset', 'dataset')}",
        "",
        "| Method | p | r | f1 |",
        "| --- | --- | --- | --- |",
    ]
    for row in rows:
        label = METHOD_LABELS.get(row["method"], row["method"])
        if "status" in row:
            lines.append(f"| {label} | absent | absent | absent |")
            continue
        cells = []
        for col in ("precision", "recall", "f1"):
            mark = marks[col].get(row["method"], "")
            value = f"{row[col]:.2f}"
            cell = f"{mark}{value}{mark}"
            if f"{col}_std" in row:
                # trial std rendered as a subscript, like the reference tables
                cell += f"<sub>{row[f'{col}_std']:.2f}</sub>"
            cells.append(cell)
        lines.append(f"| {label} | {cells[0]} | {cells[1]} | {cells[2]} |")
    lines.append("")
    if report.get("cost"):
        c = report["cost"]
        lines.append(
            f"Cost: {c['requests']} requests, {c['input_tokens']}+{c['output_tokens']} tokens, "
            f"${c['dollars']:.4f}, {c['wall_seconds']:.1f}s API wall time.")
        lines.append("")
    unjudged = report.get("unjudged_total")
    if unjudged:
        lines.append(f"Unjudged items (scored as incorrect/unrecalled): {unjudged}")
        lines.append("")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines))


def methods_figure(report: dict, path):
    rows = [r for r in _method_rows(report) if "precision" in r]
    if not rows:
        return
    labels = [METHOD_LABELS.get(r["method"], r["method"]) for r in rows]
    x = range(len(rows))
    width = 0.27
    fig, ax = plt.subplots(figsize=(7, 4))
    for k, (col, shift) in enumerate((("precision", -width), ("recall", 0.0), ("f1", width))):
        ax.bar([i + shift for i in x], [r[col] for r in rows], width, label=col)
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, rotation=15)
    ax.set_ylabel("score (%)")
    ax.set_ylim(0, 100)
    ax.legend()
    ax.set_title("Token-level vs semantic scores")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def outcomes_figure(counts: dict, path):
    order = ["both_correct", "em_wrong_sem_correct", "both_wrong", "em_correct_sem_wrong"]
    values = [counts.get(k, 0) for k in order]
    labels = ["both\ncorrect", "EM wrong /\njudge correct", "both\nwrong", "EM correct /\njudge wrong"]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(labels, values, color=["#2a9d8f", "#e9c46a", "#e76f51", "#8d99ae"])
    ax.set_ylabel("judged mentions")
    ax.set_title("Token-level vs judge outcomes")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def reasons_figure(distribution: dict, side: str, path):
    cats = sorted(distribution)
    values = [distribution[c] for c in cats]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(cats, values, color="#457b9d")
    ax.set_ylabel("share of tags (%)")
    ax.set_ylim(0, 100)
    ax.set_title(f"Reason distribution ({side} side)")
    plt.setp(ax.get_xticklabels(), rotation=20, ha="right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report_files(report: dict, outdir, figures: bool = True) -> list[str]:
    """Write report.json/.csv/.md plus figures; returns the files written."""
    os.makedirs(outdir, exist_ok=True)
    written = []
    for name, writer in (("report.json", write_json), ("report.csv", write_csv),
                         ("report.md", write_markdown)):
        path = os.path.join(outdir, name)
        writer(report, path)
        written.append(path)
    if figures:
        figdir = os.path.join(outdir, "figures")
        os.makedirs(figdir, exist_ok=True)
        fig_path = os.path.join(figdir, "methods.png")
        methods_figure(report, fig_path)
        if os.path.exists(fig_path):
            written.append(fig_path)
        if report.get("outcomes"):
            out_path = os.path.join(figdir, "outcomes.png")
            outcomes_figure(report["outcomes"], out_path)
            written.append(out_path)
    return written
