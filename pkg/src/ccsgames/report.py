"""Acceptance report: a CSV table and a runtime chart."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

FIELDS = ("number", "name", "passed", "runtime_s", "limit_s", "detail")


def write_csv(results, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(FIELDS)
        for r in results:
            w.writerow((r.number, r.name, "pass" if r.ok else "fail",
                        f"{r.runtime:.3f}", f"{r.limit:g}", r.detail))


def write_chart(results, path: Path) -> None:
    """Runtime per criterion as a fraction of its limit, coloured by outcome."""
    fig, ax = plt.subplots(figsize=(8, 3.5))
    xs = [str(r.number) for r in results]
    frac = [max(r.runtime / r.limit, 1e-4) for r in results]
    colours = ["tab:green" if r.ok else "tab:red" for r in results]
    bars = ax.bar(xs, frac, color=colours)
    for bar, r in zip(bars, results):
        ax.annotate(f"{r.runtime:.2f}s", (bar.get_x() + bar.get_width() / 2, bar.get_height()),
                    ha="center", va="bottom", fontsize=8)
    ax.axhline(1.0, color="grey", linestyle="--", linewidth=1)
    ax.set_yscale("log")
    ax.set_xlabel("criterion")
    ax.set_ylabel("runtime / limit")
    ax.set_title("acceptance: runtime relative to limit (green pass, red fail)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report(results, directory) -> tuple:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, png_path = out / "acceptance.csv", out / "acceptance.png"
    write_csv(results, csv_path)
    write_chart(results, png_path)
    return csv_path, png_path
