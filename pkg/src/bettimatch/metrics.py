"""Baseline metrics: Wasserstein matching/loss, Betti number error, Dice.

The Wasserstein matching is location-blind: it pairs diagram points by
value proximity only, via an exact assignment on the diagonal-augmented
cost matrix with squared-L2 ground cost.  It serves as the contrast to the
spatially faithful matching in :mod:`bettimatch.matching`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import MismatchedInputs, NotBinary, ShapeMismatch
from .grid import build_grid, validate_image
from .matching import BettiMatching
from .persistence import Barcode, betti_numbers_at, compute_barcode


@dataclass
class Diagram:
    """Multiset of (low, high) points per dimension, diagonal implicit.

    ``kinds`` flags finite intervals (True) versus clamped essentials;
    ``ids`` carries (birth_index, death_index) of the source interval
    (death_index -1 for essentials) so matchings can be compared.
    """

    points: dict = field(default_factory=dict)   # dim -> (n,2) float64
    kinds: dict = field(default_factory=dict)    # dim -> (n,) bool
    ids: dict = field(default_factory=dict)      # dim -> (n,2) int64

    def n_points(self, dim: int) -> int:
        return 0 if dim not in self.points else len(self.points[dim])

    @property
    def dims(self):
        return sorted(self.points)


def to_diagram(barcode: Barcode, clamp: float | None = None) -> Diagram:
    """Barcode -> diagram points (low, high) in original units.

    Finite intervals become points; essentials are clamped to ``clamp``
    when given (those landing on the diagonal are dropped, they are not
    features) and excluded when ``clamp`` is None or infinite.
    """
    g = barcode.grid
    dg = Diagram()
    for dim in (0, 1):
        pts = []
        kinds = []
        ids = []
        b, d = barcode.pair_arrays(dim)
        for bf, df in zip(b, d):
            bv = g.value_of_flat(int(bf))
            dv = g.value_of_flat(int(df))
            pts.append((min(bv, dv), max(bv, dv)))
            kinds.append(True)
            ids.append((int(g.order_of_cell[bf]), int(g.order_of_cell[df])))
        if dim == 0 and clamp is not None and math.isfinite(clamp):
            for f in barcode._ess0:
                bv = g.value_of_flat(int(f))
                if bv == clamp:
                    continue
                pts.append((min(bv, clamp), max(bv, clamp)))
                kinds.append(False)
                ids.append((int(g.order_of_cell[f]), -1))
        dg.points[dim] = np.array(pts, dtype=np.float64).reshape(-1, 2)
        dg.kinds[dim] = np.array(kinds, dtype=bool)
        dg.ids[dim] = np.array(ids, dtype=np.int64).reshape(-1, 2)
    return dg


@dataclass
class WassersteinMatching:
    """Optimal value-based pairing of two diagrams."""

    diagram_pred: Diagram
    diagram_gt: Diagram
    matched: dict = field(default_factory=dict)        # dim -> (k,2) index pairs
    unmatched_pred: dict = field(default_factory=dict)  # dim -> indices
    unmatched_gt: dict = field(default_factory=dict)
    cost_per_dim: dict = field(default_factory=dict)

    @property
    def cost(self) -> float:
        return float(sum(self.cost_per_dim.values()))


def _diagonal_costs(points: np.ndarray) -> np.ndarray:
    return ((points[:, 1] - points[:, 0]) ** 2) / 2.0


def wasserstein_matching(diagram_pred: Diagram, diagram_gt: Diagram) -> WassersteinMatching:
    """Exact minimum-cost bijection with diagonal projections, per dim.

    Solved as an assignment problem on the (n+m)x(n+m) matrix whose extra
    rows/columns carry each point's squared distance to the diagonal.
    """
    wm = WassersteinMatching(diagram_pred, diagram_gt)
    dims = sorted(set(diagram_pred.dims) | set(diagram_gt.dims))
    for dim in dims:
        p = diagram_pred.points.get(dim, np.empty((0, 2)))
        q = diagram_gt.points.get(dim, np.empty((0, 2)))
        n, m = len(p), len(q)
        if n == 0 and m == 0:
            wm.matched[dim] = np.empty((0, 2), dtype=np.int64)
            wm.unmatched_pred[dim] = np.empty(0, dtype=np.int64)
            wm.unmatched_gt[dim] = np.empty(0, dtype=np.int64)
            wm.cost_per_dim[dim] = 0.0
            continue
        dp = _diagonal_costs(p)
        dq = _diagonal_costs(q)
        big = float(dp.sum() + dq.sum()) + 1.0
        cost = np.full((n + m, n + m), big, dtype=np.float64)
        if n and m:
            cost[:n, :m] = ((p[:, None, :] - q[None, :, :]) ** 2).sum(axis=-1)
        cost[np.arange(n), m + np.arange(n)] = dp
        cost[n + np.arange(m), np.arange(m)] = dq
        cost[n:, m:] = 0.0
        rows, cols = linear_sum_assignment(cost)
        pairs = []
        up = []
        ug = []
        total = 0.0
        for r, c in zip(rows, cols):
            if r < n and c < m:
                pairs.append((r, c))
                total += cost[r, c]
            elif r < n:
                up.append(r)
                total += dp[r]
            elif c < m:
                ug.append(c)
                total += dq[c]
        wm.matched[dim] = np.array(pairs, dtype=np.int64).reshape(-1, 2)
        wm.unmatched_pred[dim] = np.array(up, dtype=np.int64)
        wm.unmatched_gt[dim] = np.array(ug, dtype=np.int64)
        wm.cost_per_dim[dim] = float(total)
    return wm


def wasserstein_loss(diagram_pred: Diagram, diagram_gt: Diagram) -> float:
    """Attained minimum of the assignment above."""
    return wasserstein_matching(diagram_pred, diagram_gt).cost


def matching_precision(tau: BettiMatching, gamma: WassersteinMatching) -> float:
    """Fraction of value-matched prediction features the composed matching
    confirms.

    Counts the finite prediction intervals the Wasserstein matching pairs;
    a pair is correct when the composed matching pairs the same two
    intervals.  No value-matched finite intervals at all counts as
    vacuously precise (1.0).
    """
    dl = gamma.diagram_pred
    dg = gamma.diagram_gt
    total = 0
    correct = 0
    for dim in (0, 1):
        ids_l = dl.ids.get(dim)
        if ids_l is None:
            continue
        pb = tau.barcode_pred.birth_orders(dim)
        pd = tau.barcode_pred.death_orders(dim)
        gb = tau.barcode_gt.birth_orders(dim)
        gd = tau.barcode_gt.death_orders(dim)
        finite_ids = {tuple(t) for t, k in zip(ids_l, dl.kinds[dim]) if k}
        bc_ids = {(int(b), int(d)) for b, d in zip(pb, pd)}
        if finite_ids != bc_ids:
            raise MismatchedInputs(
                "the Wasserstein matching was not computed on the same prediction barcode"
            )
        li, gi = tau.matched_idx[dim]
        tau_map = {
            (int(pb[i]), int(pd[i])): (int(gb[j]), int(gd[j]))
            for i, j in zip(li, gi)
        }
        for r, c in gamma.matched.get(dim, ()):
            if not dl.kinds[dim][r]:
                continue
            total += 1
            if not dg.kinds[dim][c]:
                continue
            key = tuple(ids_l[r])
            if tau_map.get((int(key[0]), int(key[1]))) == tuple(int(x) for x in dg.ids[dim][c]):
                correct += 1
    return 1.0 if total == 0 else correct / total


@dataclass(frozen=True)
class BettiError:
    """Per-dimension absolute difference of foreground Betti numbers."""

    dim0: int
    dim1: int

    @property
    def total(self) -> int:
        return self.dim0 + self.dim1


def betti_number_error(pred, gt, *, threshold: float = 0.5,
                       construction: str = "v") -> BettiError:
    """Compare only the per-dimension feature counts of two binary images."""
    a = validate_image(pred)
    b = validate_image(gt)
    if a.shape != b.shape:
        raise ShapeMismatch(f"image shapes differ: {a.shape} vs {b.shape}")
    for name, arr in (("pred", a), ("gt", b)):
        if not np.isin(arr, (0.0, 1.0)).all():
            raise NotBinary(f"{name} must contain only 0 and 1")
    ba = betti_numbers_at(build_grid(a, construction, "superlevel"), threshold)
    bb = betti_numbers_at(build_grid(b, construction, "superlevel"), threshold)
    return BettiError(dim0=abs(ba[0] - bb[0]), dim1=abs(ba[1] - bb[1]))


def dice(pred, gt) -> float:
    """Dice overlap 2|P&G| / (|P|+|G|); two empty images count as 1."""
    a = validate_image(pred)
    b = validate_image(gt)
    if a.shape != b.shape:
        raise ShapeMismatch(f"image shapes differ: {a.shape} vs {b.shape}")
    for name, arr in (("pred", a), ("gt", b)):
        if not np.isin(arr, (0.0, 1.0)).all():
            raise NotBinary(f"{name} must contain only 0 and 1")
    denom = a.sum() + b.sum()
    if denom == 0:
        return 1.0
    return float(2.0 * (a * b).sum() / denom)


def accuracy(pred, gt) -> float:
    """Fraction of pixels on which the two binary images agree."""
    a = validate_image(pred)
    b = validate_image(gt)
    if a.shape != b.shape:
        raise ShapeMismatch(f"image shapes differ: {a.shape} vs {b.shape}")
    for name, arr in (("pred", a), ("gt", b)):
        if not np.isin(arr, (0.0, 1.0)).all():
            raise NotBinary(f"{name} must contain only 0 and 1")
    return float((a == b).mean())
