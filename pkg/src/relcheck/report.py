"""Report rendering: delimited results plus an achievable-interval figure.

When the CLI is asked for a report directory it writes `results.csv` with
one line per property and `intervals.png` visualizing, for each decided
property, the aggregated achievable-value intervals against the bound.
"""

from __future__ import annotations

import csv
import os
from fractions import Fraction
from typing import Dict, List


def _as_float(value) -> float:
    return float(Fraction(str(value)))

CSV_FIELDS = [
    "index",
    "property",
    "verdict",
    "fast_path",
    "v_max_lower",
    "v_max_upper",
    "v_min_lower",
    "v_min_upper",
    "bound",
    "epsilon",
    "comparison",
    "time_s",
]


def write_csv(records: List[Dict], path: str) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for rec in records:
            writer.writerow({k: rec.get(k, "") for k in CSV_FIELDS})


def render_intervals(records: List[Dict], path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 1.2 + 0.7 * max(1, len(records))))
    ticks, labels = [], []
    for row, rec in enumerate(records):
        y = len(records) - row
        ticks.append(y)
        labels.append(f"#{rec['index']}: {rec['verdict']}")
        drew = False
        for key, color in (("v_max", "tab:blue"), ("v_min", "tab:orange")):
            lo, hi = rec.get(f"{key}_lower"), rec.get(f"{key}_upper")
            if lo == "" or lo is None:
                continue
            lo, hi = _as_float(lo), _as_float(hi)
            ax.plot([lo, hi], [y, y], color=color, linewidth=4, solid_capstyle="butt")
            ax.plot([lo, hi], [y, y], "|", color=color, markersize=10)
            drew = True
        bound = rec.get("bound")
        if bound not in ("", None):
            ax.plot([_as_float(bound)], [y], "k*", markersize=9)
        if not drew:
            ax.plot([0], [y], ".", color="lightgray")
    ax.set_yticks(ticks)
    ax.set_yticklabels(labels)
    ax.set_xlabel("weighted probability sum (max interval blue, min orange, bound *)")
    ax.set_title("Achievable-value intervals per property")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report(records: List[Dict], directory: str) -> List[str]:
    os.makedirs(directory, exist_ok=True)
    csv_path = os.path.join(directory, "results.csv")
    png_path = os.path.join(directory, "intervals.png")
    cleaned = []
    for rec in records:
        rec = dict(rec)
        for key in list(rec):
            if rec[key] is None:
                rec[key] = ""
        cleaned.append(rec)
    write_csv(cleaned, csv_path)
    render_intervals(cleaned, png_path)
    return [csv_path, png_path]
