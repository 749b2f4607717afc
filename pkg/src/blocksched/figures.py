"""Chart rendering for experiment tables.

Kept out of the experiment runner on purpose: the tables are the product and
stay plottable after the fact, while the charts are a convenience the command
line layer adds alongside them.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")  # render headless, straight to files

import matplotlib.pyplot as plt

from .bench import Row
from .model import BlockKind

__all__ = ["render_figures"]

_MARKERS = ("o", "s", "D", "^", "v", "P", "X")


def render_figures(rows: Sequence[Row], out_dir: str | Path) -> list[Path]:
    """Draw one chart per (problem, kind, pool factor, metric) group.

    Each chart plots the metric's mean against the block-size axis with one
    line per (method, core count). Rows without a mean are skipped. Returns
    the written paths in a deterministic order; the PNG encoder is told to
    drop its software stamp so identical tables give identical bytes.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    groups: dict[tuple[str, str, int, str], list[Row]] = defaultdict(list)
    for row in rows:
        if row.mean is None:
            continue
        groups[(row.problem, row.kind, row.pool_factor, row.metric)].append(row)

    written: list[Path] = []
    for (problem, kind, factor, metric), members in sorted(
        groups.items(), key=lambda item: item[0]
    ):
        lines: dict[tuple[str, int], dict[int, float]] = defaultdict(dict)
        for row in members:
            lines[(row.method, row.cores)][row.size] = float(row.mean)

        axis = "R" if problem == "ordered" and kind == BlockKind.HOMOGENEOUS.value else "B"
        figure, axes = plt.subplots(figsize=(6.0, 4.0))
        for at, ((method, cores), points) in enumerate(sorted(lines.items())):
            sizes = sorted(points)
            axes.plot(
                sizes,
                [points[size] for size in sizes],
                marker=_MARKERS[at % len(_MARKERS)],
                label=f"{method} p={cores}",
            )
        axes.set_xlabel(axis)
        axes.set_ylabel(metric.replace("_", " "))
        title = f"{problem} {kind} {metric}"
        if factor != 1:
            title += f" X={factor}"
        axes.set_title(title)
        axes.grid(alpha=0.3)
        axes.legend(fontsize=8)
        figure.tight_layout()

        name = f"{problem}-{kind}-{metric}"
        if factor != 1:
            name += f"-x{factor}"
        path = out / f"{name}.png"
        figure.savefig(path, dpi=120, metadata={"Software": None})
        plt.close(figure)
        written.append(path)
    return written
