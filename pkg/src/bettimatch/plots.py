"""Diagnostic figures rendered next to the delimited reports.

All figures go to files (Agg backend); nothing here opens a window.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .matching import BettiMatching  # noqa: E402
from .metrics import to_diagram  # noqa: E402
from .persistence import Barcode  # noqa: E402

_DIM_COLORS = {0: "tab:blue", 1: "tab:red"}


def _finite_end(value: float, fallback: float) -> float:
    return fallback if math.isinf(value) else value


def barcode_figure(bc: Barcode, title: str = "barcode"):
    """Horizontal bars per dimension; essentials drawn dashed to the edge."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ends = [iv.birth_value for d in (0, 1) for iv in bc.finite(d)]
    ends += [iv.death_value for d in (0, 1) for iv in bc.finite(d)]
    ends += [iv.birth_value for iv in bc.essential0]
    lo = min(ends, default=0.0)
    hi = max(ends, default=1.0)
    span = (hi - lo) or 1.0
    y = 0
    for dim in (0, 1):
        for iv in list(bc.finite(dim)) + list(bc.essential0 if dim == 0 else ()):
            color = _DIM_COLORS[dim]
            if iv.essential:
                ax.hlines(y, iv.birth_value, hi + 0.1 * span, color=color,
                          linestyles="dashed", linewidth=2)
            else:
                a, b = sorted((iv.birth_value, iv.death_value))
                ax.hlines(y, a, b, color=color, linewidth=2)
            y += 1
    ax.set_yticks([])
    ax.set_xlabel("filtration value")
    ax.set_title(title)
    handles = [plt.Line2D([0], [0], color=c, lw=2) for c in _DIM_COLORS.values()]
    ax.legend(handles, ["dim 0", "dim 1"], loc="lower right", frameon=False)
    fig.tight_layout()
    return fig


def matching_figure(bm: BettiMatching, title: str = "matching"):
    """Both persistence diagrams with matched points connected."""
    clamp = bm.essentials.clamp
    dl = to_diagram(bm.barcode_pred, clamp=clamp)
    dg = to_diagram(bm.barcode_gt, clamp=clamp)
    fig, ax = plt.subplots(figsize=(5, 5))
    pts = [p for d in (0, 1) for p in (dl.points[d], dg.points[d]) if len(p)]
    lo = min((float(p.min()) for p in pts), default=0.0)
    hi = max((float(p.max()) for p in pts), default=1.0)
    pad = 0.05 * ((hi - lo) or 1.0)
    ax.plot([lo - pad, hi + pad], [lo - pad, hi + pad], color="grey", lw=0.8)
    for dim in (0, 1):
        for a, b in bm.matched(dim):
            pa = (min(a.birth_value, a.death_value), max(a.birth_value, a.death_value))
            pb = (min(b.birth_value, b.death_value), max(b.birth_value, b.death_value))
            ax.plot([pa[0], pb[0]], [pa[1], pb[1]], color="0.6", lw=1.0, zorder=1)
        if len(dl.points[dim]):
            ax.scatter(*dl.points[dim].T, marker="o", s=36, zorder=2,
                       facecolors="none", edgecolors=_DIM_COLORS[dim],
                       label=f"pred dim {dim}")
        if len(dg.points[dim]):
            ax.scatter(*dg.points[dim].T, marker="x", s=36, zorder=2,
                       color=_DIM_COLORS[dim], label=f"gt dim {dim}")
    ax.set_xlabel("earlier endpoint")
    ax.set_ylabel("later endpoint")
    ax.set_title(title)
    ax.legend(loc="lower right", frameon=False, fontsize=8)
    fig.tight_layout()
    return fig


def gradient_figure(grad, title: str = "loss gradient"):
    fig, ax = plt.subplots(figsize=(5, 4))
    lim = max(abs(grad).max(), 1e-12)
    im = ax.imshow(grad, cmap="coolwarm", vmin=-lim, vmax=lim)
    fig.colorbar(im, ax=ax, shrink=0.85)
    ax.set_title(title)
    fig.tight_layout()
    return fig


def metrics_figure(names, values, metric: str = "tau_err"):
    """One bar per evaluated pair for a chosen metric."""
    fig, ax = plt.subplots(figsize=(max(4, 0.5 * len(names) + 2), 4))
    ax.bar(range(len(names)), values, color="tab:blue")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel(metric)
    fig.tight_layout()
    return fig


def save_figure(fig, path: str) -> None:
    fig.savefig(path, dpi=130)
    plt.close(fig)
