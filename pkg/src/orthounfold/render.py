"""SVG rendering of unfolding nets with matplotlib.

One surface cell is one unit square.  Band cells are grey, top cells light
blue, bottom cells light purple.  Cut edges are drawn thick, glued edges thin
and dashed.  Output is byte-stable: no timestamps and a fixed hash salt.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.collections import LineCollection, PolyCollection  # noqa: E402

COLORS = {"band": "#c8c8c8", "top": "#a9cfee", "bottom": "#cdb4e6"}
CELL_INCHES = 0.25


def _kind(normal: str) -> str:
    if normal == "+z":
        return "top"
    if normal == "-z":
        return "bottom"
    return "band"


def net_figure(records: list[dict], title: str | None = None, labels: bool = False):
    """Build a matplotlib figure for exported net records."""
    pos = {r["id"]: (r["col"], r["row"]) for r in records}
    glued = set()
    for r in records:
        if r["parent"] is None:
            continue
        a, b = pos[r["id"]], pos[r["parent"]]
        glued.add(frozenset((a, b)))

    squares, colors, thick, thin = [], [], [], []
    for r in records:
        x, y = pos[r["id"]]
        squares.append([(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)])
        colors.append(COLORS[_kind(r["normal"])])
        sides = (
            ((x, y), (x + 1, y), (x, y - 1)),
            ((x + 1, y), (x + 1, y + 1), (x + 1, y)),
            ((x, y + 1), (x + 1, y + 1), (x, y + 1)),
            ((x, y), (x, y + 1), (x - 1, y)),
        )
        for p, q, nb in sides:
            (thin if frozenset(((x, y), nb)) in glued else thick).append((p, q))

    xs = [p[0] for p in pos.values()]
    ys = [p[1] for p in pos.values()]
    w = max(xs) - min(xs) + 3
    h = max(ys) - min(ys) + 3
    fig, ax = plt.subplots(figsize=(w * CELL_INCHES, h * CELL_INCHES))
    ax.add_collection(PolyCollection(squares, facecolors=colors, edgecolors="none"))
    ax.add_collection(LineCollection(thin, colors="#555555", linewidths=0.4, linestyles="dashed"))
    ax.add_collection(LineCollection(thick, colors="black", linewidths=1.2))
    if labels:
        for r in records:
            x, y = pos[r["id"]]
            ax.text(x + 0.5, y + 0.5, str(r["id"]), ha="center", va="center", fontsize=4)
    ax.set_xlim(min(xs) - 1, max(xs) + 2)
    ax.set_ylim(min(ys) - 1, max(ys) + 2)
    ax.set_aspect("equal")
    ax.axis("off")
    if title:
        ax.set_title(title, fontsize=8)
    return fig


def write_svg(records: list[dict], path, title: str | None = None, labels: bool = False) -> None:
    with plt.rc_context({"svg.hashsalt": "orthounfold", "svg.fonttype": "none"}):
        fig = net_figure(records, title=title, labels=labels)
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
        plt.close(fig)
