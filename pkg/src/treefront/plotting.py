"""Rendering of fronts and benchmark timings to SVG files.

Every figure gets a CSV sibling with the same numbers so the plotted
data stays machine-readable.  matplotlib runs on the Agg backend; no
display is ever required.
"""

from __future__ import annotations

import csv

from .fixedpoint import format_value
from .fronts import Vec


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def front_csv(vectors: list[Vec], path: str) -> None:
    """Write one row per front entry, one decimal-formatted column per
    objective."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        d = len(vectors[0]) if vectors else 2
        writer.writerow([f"objective{i + 1}" for i in range(d)])
        for vec in vectors:
            writer.writerow([format_value(x) for x in vec])


def plot_front(
    vectors: list[Vec],
    svg_path: str,
    csv_path: str | None = None,
    title: str = "Pareto front",
    labels: tuple[str, str] = ("objective 1", "objective 2"),
) -> None:
    """Scatter the front into an SVG; fronts with more than two
    objectives are projected onto the first two coordinates."""
    if csv_path is not None:
        front_csv(vectors, csv_path)
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    xs = [v[0] / 10.0 for v in vectors]
    ys = [v[1] / 10.0 for v in vectors] if vectors and len(vectors[0]) > 1 else xs
    ax.scatter(xs, ys, s=18.0, color="#1f6f8b", zorder=3)
    if len(vectors) > 1:
        ax.step(xs, ys, where="post", color="#1f6f8b", alpha=0.4, zorder=2)
    ax.set_xlabel(labels[0])
    ax.set_ylabel(labels[1])
    ax.set_title(f"{title} ({len(vectors)} entries)")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(svg_path, format="svg")
    plt.close(fig)


def plot_bench(
    rows: list[tuple[str, float]],
    svg_path: str,
    csv_path: str | None = None,
    title: str = "Benchmark",
) -> None:
    """Horizontal bar chart of (label, seconds) rows."""
    if csv_path is not None:
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["variant", "seconds"])
            for label, seconds in rows:
                writer.writerow([label, f"{seconds:.6f}"])
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 0.6 * max(len(rows), 2) + 1.5))
    labels = [label for label, _ in rows]
    values = [seconds for _, seconds in rows]
    ax.barh(range(len(rows)), values, color="#1f6f8b")
    ax.set_yticks(range(len(rows)), labels)
    ax.invert_yaxis()
    ax.set_xlabel("seconds")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(svg_path, format="svg")
    plt.close(fig)
