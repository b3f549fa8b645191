"""Report artifacts: a delimited verdict table plus summary figures.

The JSON report is the single source of truth; this module derives a
verdicts.csv and a couple of matplotlib PNGs from it for CI dashboards.
Figures are rendered with the Agg backend, no display needed.
"""

from __future__ import annotations

import csv
import os

STATUS_ORDER = ["SAFE-up-to-k", "VIOLATION", "UNKNOWN"]
STATUS_COLORS = {"SAFE-up-to-k": "#2a9d48", "VIOLATION": "#c73030",
                 "UNKNOWN": "#d9a441"}


def _verdict_rows(report: dict) -> list:
    rows = []
    for verdict in report.get("verdicts", []):
        rows.append({
            "function": verdict.get("function", report.get("entry", "")),
            "vc_id": verdict.get("vc_id", ""),
            "kind": verdict.get("kind", ""),
            "status": verdict.get("status", ""),
            "encoding": verdict.get("encoding", ""),
            "solver": verdict.get("solver", ""),
            "precision": verdict.get("precision", ""),
            "found_by": verdict.get("found_by", ""),
        })
    return rows


def write_csv(report: dict, path: str) -> None:
    rows = _verdict_rows(report)
    fields = ["function", "vc_id", "kind", "status", "encoding", "solver",
              "precision", "found_by"]
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)


def _setup_matplotlib():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _status_counts(rows: list) -> dict:
    counts = {status: 0 for status in STATUS_ORDER}
    for row in rows:
        counts[row["status"]] = counts.get(row["status"], 0) + 1
    return counts


def plot_status_summary(report: dict, path: str) -> None:
    plt = _setup_matplotlib()
    counts = _status_counts(_verdict_rows(report))
    labels = [s for s in STATUS_ORDER if counts.get(s)] or STATUS_ORDER[:1]
    values = [counts.get(s, 0) for s in labels]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(labels, values, color=[STATUS_COLORS[s] for s in labels])
    ax.set_ylabel("verification conditions")
    ax.set_title("Verdicts")
    for i, v in enumerate(values):
        ax.text(i, v, str(v), ha="center", va="bottom", fontsize=9)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_by_function(report: dict, path: str) -> None:
    plt = _setup_matplotlib()
    rows = _verdict_rows(report)
    functions: dict = {}
    for row in rows:
        per = functions.setdefault(row["function"], {s: 0 for s in STATUS_ORDER})
        per[row["status"]] = per.get(row["status"], 0) + 1
    names = sorted(functions)
    fig, ax = plt.subplots(figsize=(max(5, 0.6 * len(names) + 2), 3.2))
    bottoms = [0] * len(names)
    for status in STATUS_ORDER:
        values = [functions[n].get(status, 0) for n in names]
        ax.bar(names, values, bottom=bottoms, label=status,
               color=STATUS_COLORS[status])
        bottoms = [b + v for b, v in zip(bottoms, values)]
    ax.set_ylabel("verification conditions")
    ax.set_title("Verdicts by function")
    ax.legend(fontsize=8)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    plt.setp(ax.get_xticklabels(), rotation=30, ha="right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_plan_stats(report: dict, path: str) -> None:
    plt = _setup_matplotlib()
    stats = report.get("plan_stats", {})
    labels = ["planned", "executed", "cache_hits"]
    values = [stats.get(k, 0) for k in labels]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(labels, values, color="#3a6ea5")
    ax.set_ylabel("solver instances")
    ax.set_title("Plan statistics")
    for i, v in enumerate(values):
        ax.text(i, v, str(v), ha="center", va="bottom", fontsize=9)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report_artifacts(report: dict, outdir: str) -> list:
    """Render verdicts.csv and the summary figures into outdir; returns the
    paths written."""
    os.makedirs(outdir, exist_ok=True)
    written = []
    csv_path = os.path.join(outdir, "verdicts.csv")
    write_csv(report, csv_path)
    written.append(csv_path)
    summary_path = os.path.join(outdir, "verdict_summary.png")
    plot_status_summary(report, summary_path)
    written.append(summary_path)
    if report.get("verdicts"):
        by_fn_path = os.path.join(outdir, "verdicts_by_function.png")
        plot_by_function(report, by_fn_path)
        written.append(by_fn_path)
    if "plan_stats" in report:
        plan_path = os.path.join(outdir, "plan_stats.png")
        plot_plan_stats(report, plan_path)
        written.append(plan_path)
    return written
