"""Cell-grid figures rendered to image files.

One panel per two-sided cell: rows are left cells, columns are right
cells, and each box lists the members of one H-cell with the
distinguished involution first in the diagonal boxes.  Boxes are
tinted by the three-way classification carried on a
:class:`cellkit.kostant.KostantReport`.

matplotlib is imported lazily so that the exact-arithmetic engine can
run on hosts without a rendering stack; only this module touches it.
"""

from __future__ import annotations

import textwrap
from typing import Dict, List, Tuple

__all__ = ["KLASS_COLORS", "KLASS_LABELS", "render_cell_grids"]

KLASS_COLORS: Dict[str, str] = {
    "class1": "#d9ead3",
    "class2": "#cfe2f3",
    "class3": "#f4cccc",
    "undecided": "#fff2cc",
}

KLASS_LABELS: Dict[str, str] = {
    "class1": "multiplicity and bracket tests pass",
    "class2": "multiplicity test passes, bracket test fails",
    "class3": "multiplicity test fails",
    "undecided": "unresolved",
}

# inches per character column / per stacked word line inside a box
_CHAR_W = 0.085
_LINE_H = 0.16
_BOX_PAD_W = 0.14
_BOX_PAD_H = 0.10
_PANEL_GAP = 0.35
_MARGIN = 0.35


def _panel_geometry(grid: dict) -> Tuple[dict, dict, float, float]:
    """Column widths and row heights, in inches, for one two-sided cell."""
    boxes = {(c["left_cell"], c["right_cell"]): c["members"] for c in grid["cells"]}
    col_w = {}
    for rid in grid["right_cells"]:
        longest = max(
            (len(w) for (_, r), ms in boxes.items() if r == rid for w in ms),
            default=1,
        )
        col_w[rid] = longest * _CHAR_W + _BOX_PAD_W
    row_h = {}
    for lid in grid["left_cells"]:
        tallest = max(
            (len(ms) for (l, _), ms in boxes.items() if l == lid), default=1
        )
        row_h[lid] = tallest * _LINE_H + _BOX_PAD_H
    return boxes, col_w, row_h, sum(col_w.values()), sum(row_h.values())


def render_cell_grids(report, path, *, dpi: int = 150) -> str:
    """Draw every cell grid of the report into one image file.

    Returns the path written.  The format follows the file suffix, any
    raster or vector format matplotlib supports; the report command
    uses png.
    """
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt
    from matplotlib.patches import Patch, Rectangle

    klass_by_word = {e.word: e.klass for e in report.elements}
    panels = [(grid, *_panel_geometry(grid)) for grid in report.grids]

    width = max(pw for *_, pw, _ in panels) + 2 * _MARGIN
    present = sorted(
        {klass_by_word[w] for g, boxes, *_ in panels for ms in boxes.values() for w in ms},
        key=list(KLASS_COLORS).index,
    )
    footer = textwrap.fill(f"conditional on {report.conditional_on}", width=max(60, int(width / 0.068)))
    footer_h = 0.30 + 0.13 * footer.count("\n")
    legend_h = 0.32
    title_h = 0.42
    height = (
        sum(ph for *_, ph in panels)
        + _PANEL_GAP * (len(panels) - 1)
        + 2 * _MARGIN
        + title_h
        + legend_h
        + footer_h
    )

    fig = plt.figure(figsize=(width, height))
    ax = fig.add_axes([0.0, 0.0, 1.0, 1.0])
    ax.set_xlim(0.0, width)
    ax.set_ylim(0.0, height)
    ax.set_axis_off()

    ax.text(
        width / 2.0,
        height - _MARGIN,
        f"{report.cartan_type}{report.rank}: two-sided cells, left cells as rows,"
        " right cells as columns",
        ha="center",
        va="top",
        fontsize=10,
    )

    top = height - _MARGIN - title_h
    for grid, boxes, col_w, row_h, pw, ph in panels:
        x0 = (width - pw) / 2.0
        ys = {}
        y = top
        for lid in grid["left_cells"]:
            y -= row_h[lid]
            ys[lid] = y
        xs = {}
        x = x0
        for rid in grid["right_cells"]:
            xs[rid] = x
            x += col_w[rid]
        for (lid, rid), members in boxes.items():
            bx, by = xs[rid], ys[lid]
            bw, bh = col_w[rid], row_h[lid]
            ax.add_patch(
                Rectangle(
                    (bx, by),
                    bw,
                    bh,
                    facecolor=KLASS_COLORS[klass_by_word[members[0]]],
                    edgecolor="black",
                    linewidth=0.7,
                )
            )
            ax.text(
                bx + bw / 2.0,
                by + bh / 2.0,
                "\n".join(members),
                ha="center",
                va="center",
                fontsize=6.5,
                family="monospace",
                linespacing=1.25,
            )
        top -= ph + _PANEL_GAP

    handles = [
        Patch(facecolor=KLASS_COLORS[k], edgecolor="black", label=KLASS_LABELS[k])
        for k in present
    ]
    ax.legend(
        handles=handles,
        loc="lower center",
        bbox_to_anchor=(0.5, (footer_h + _MARGIN / 2.0) / height),
        ncol=min(len(handles), 2),
        fontsize=7,
        frameon=False,
    )
    ax.text(
        width / 2.0,
        _MARGIN / 2.0,
        footer,
        ha="center",
        va="bottom",
        fontsize=6,
        color="#444444",
    )

    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return str(path)
