"""Matching barcodes through a shared comparison image.

Two images are compared by including both filtrations into the filtration
of their entrywise extremum.  Each inclusion induces a canonical partial
matching between barcodes (routed through the image barcode); composing
the two matchings pairs features of the two images only when they overlap
spatially.  From the composed matching this module derives an error count,
a loss, and the exact per-pixel gradient of that loss.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotBinary, ShapeMismatch
from .grid import CubicalGrid, build_grid, validate_image
from .image_persistence import ImageBarcode, compute_image_barcode
from .persistence import Barcode, compute_barcode

FILTRATIONS = ("sublevel", "superlevel")


def _positions(keys: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Index of each query in ``keys`` (unique values), -1 when absent."""
    if len(keys) == 0 or len(queries) == 0:
        return np.full(len(queries), -1, dtype=np.int64)
    sorter = np.argsort(keys)
    skeys = keys[sorter]
    pos = np.searchsorted(skeys, queries)
    pos[pos >= len(skeys)] = len(skeys) - 1
    hit = skeys[pos] == queries
    out = np.where(hit, sorter[pos], -1)
    return out.astype(np.int64)


class InducedMatching:
    """Triples (domain interval, image pair, codomain interval) per dim."""

    def __init__(self, image_barcode: ImageBarcode, domain_barcode: Barcode,
                 codomain_barcode: Barcode, per_dim):
        self.image_barcode = image_barcode
        self.domain_barcode = domain_barcode
        self.codomain_barcode = codomain_barcode
        # dim -> (pair_idx, domain_interval_idx, codomain_interval_idx)
        self._per_dim = per_dim

    def index_triples(self, dim: int):
        return self._per_dim[dim]

    def triples(self, dim: int):
        pi, di, ci = self._per_dim[dim]
        dom = self.domain_barcode.finite(dim)
        cod = self.codomain_barcode.finite(dim)
        pairs = self.image_barcode.pairs(dim)
        return [(dom[d], pairs[p], cod[c]) for p, d, c in zip(pi, di, ci)]

    def unmatched_domain(self, dim: int) -> np.ndarray:
        n = self.domain_barcode.n_finite(dim)
        return np.setdiff1d(np.arange(n), self._per_dim[dim][1])

    def unmatched_codomain(self, dim: int) -> np.ndarray:
        n = self.codomain_barcode.n_finite(dim)
        return np.setdiff1d(np.arange(n), self._per_dim[dim][2])


def induced_matching(image_barcode: ImageBarcode, domain_barcode: Barcode,
                     codomain_barcode: Barcode) -> InducedMatching:
    """Match barcode intervals through the image persistence pairs.

    An image pair links the domain interval sharing its birth index with
    the codomain interval sharing its death index; pairs missing either
    endpoint (zero-persistence intervals are not in the barcodes) are
    skipped.  Birth and death cells are unique per dimension, so every
    interval is used at most once.
    """
    per_dim = {}
    for dim in (0, 1):
        pb = image_barcode.birth_orders(dim)
        pd = image_barcode.death_orders(dim)
        di = _positions(domain_barcode.birth_orders(dim), pb)
        ci = _positions(codomain_barcode.death_orders(dim), pd)
        ok = (di >= 0) & (ci >= 0)
        per_dim[dim] = (np.nonzero(ok)[0], di[ok], ci[ok])
    return InducedMatching(image_barcode, domain_barcode, codomain_barcode, per_dim)


@dataclass(frozen=True)
class EssentialPairing:
    """How the essential components of the two sides were paired.

    Clamped essentials with zero persistence sit on the diagonal and are
    not features; the remaining ones are paired (the global component of
    each side always corresponds through the comparison image) and any
    surplus is left unmatched.
    """

    clamp: float
    matched: tuple  # ((flat_pred, flat_gt), ...)
    unmatched_pred: tuple
    unmatched_gt: tuple


class BettiMatching:
    """The composed matching between two images' barcodes plus residue."""

    def __init__(self, *, grid_pred, grid_gt, grid_comparison,
                 barcode_pred, barcode_gt, barcode_comparison,
                 sigma_pred, sigma_gt, matched_idx, unmatched_pred_idx,
                 unmatched_gt_idx, essentials, options):
        self.grid_pred: CubicalGrid = grid_pred
        self.grid_gt: CubicalGrid = grid_gt
        self.grid_comparison: CubicalGrid = grid_comparison
        self.barcode_pred: Barcode = barcode_pred
        self.barcode_gt: Barcode = barcode_gt
        self.barcode_comparison: Barcode = barcode_comparison
        self.sigma_pred: InducedMatching = sigma_pred
        self.sigma_gt: InducedMatching = sigma_gt
        #: dim -> (pred interval indices, gt interval indices)
        self.matched_idx = matched_idx
        self.unmatched_pred_idx = unmatched_pred_idx
        self.unmatched_gt_idx = unmatched_gt_idx
        self.essentials: EssentialPairing = essentials
        self.options = options

    def matched(self, dim: int):
        li, gi = self.matched_idx[dim]
        pl = self.barcode_pred.finite(dim)
        gl = self.barcode_gt.finite(dim)
        return [(pl[i], gl[j]) for i, j in zip(li, gi)]

    def unmatched_pred(self, dim: int):
        lst = self.barcode_pred.finite(dim)
        return [lst[i] for i in self.unmatched_pred_idx[dim]]

    def unmatched_gt(self, dim: int):
        lst = self.barcode_gt.finite(dim)
        return [lst[i] for i in self.unmatched_gt_idx[dim]]

    def n_unmatched(self, dim: int, side: str) -> int:
        idx = self.unmatched_pred_idx if side == "pred" else self.unmatched_gt_idx
        n = len(idx[dim])
        if dim == 0:
            ess = self.essentials
            n += len(ess.unmatched_pred if side == "pred" else ess.unmatched_gt)
        return n

    def essential_intervals(self):
        """Essential pairing as Interval objects, per side."""

        def lookup(bc: Barcode):
            return {int(f): iv for f, iv in zip(bc._ess0, bc.essential0)}

        lp = lookup(self.barcode_pred)
        lg = lookup(self.barcode_gt)
        ess = self.essentials
        return (
            {"matched": [lp[a] for a, _ in ess.matched],
             "unmatched": [lp[f] for f in ess.unmatched_pred]},
            {"matched": [lg[b] for _, b in ess.matched],
             "unmatched": [lg[f] for f in ess.unmatched_gt]},
        )


def _essential_pairing(bm_pred: Barcode, bm_gt: Barcode, clamp: float) -> EssentialPairing:
    def off_diagonal(bc: Barcode):
        out = []
        for f in bc._ess0:
            if bc.grid.value_of_flat(int(f)) != clamp:
                out.append(int(f))
        return out

    lp = off_diagonal(bm_pred)
    lg = off_diagonal(bm_gt)
    k = min(len(lp), len(lg))
    return EssentialPairing(
        clamp=clamp,
        matched=tuple(zip(lp[:k], lg[:k])),
        unmatched_pred=tuple(lp[k:]),
        unmatched_gt=tuple(lg[k:]),
    )


def betti_matching(pred, gt, *, filtration: str = "superlevel",
                   construction: str = "v", relative: bool = False) -> BettiMatching:
    """Compose the two induced matchings through the comparison image.

    The comparison image is the entrywise min (sublevel) or max
    (superlevel) of the inputs, so each of its level sets is the union of
    the corresponding level sets of the two images.  Intervals of the two
    sides are matched exactly when they are routed to the same comparison
    interval.
    """
    if filtration not in FILTRATIONS:
        raise ValueError(f"filtration must be one of {FILTRATIONS}")
    a = validate_image(pred)
    b = validate_image(gt)
    if a.shape != b.shape:
        raise ShapeMismatch(f"image shapes differ: {a.shape} vs {b.shape}")
    comparison = np.maximum(a, b) if filtration == "superlevel" else np.minimum(a, b)

    grid_p = build_grid(a, construction, filtration, relative)
    grid_g = build_grid(b, construction, filtration, relative)
    grid_c = build_grid(comparison, construction, filtration, relative)
    bc_p = compute_barcode(grid_p)
    bc_g = compute_barcode(grid_g)
    bc_c = compute_barcode(grid_c, keep_critical=False)

    ib_p = compute_image_barcode(grid_p, grid_c, bc_p, bc_c)
    ib_g = compute_image_barcode(grid_g, grid_c, bc_g, bc_c)
    sigma_p = induced_matching(ib_p, bc_p, bc_c)
    sigma_g = induced_matching(ib_g, bc_g, bc_c)

    matched_idx = {}
    unmatched_p = {}
    unmatched_g = {}
    for dim in (0, 1):
        _, dp, cp = sigma_p.index_triples(dim)
        _, dg, cg = sigma_g.index_triples(dim)
        _, ia, ib_ = np.intersect1d(cp, cg, return_indices=True)
        matched_idx[dim] = (dp[ia], dg[ib_])
        unmatched_p[dim] = np.setdiff1d(np.arange(bc_p.n_finite(dim)), dp[ia])
        unmatched_g[dim] = np.setdiff1d(np.arange(bc_g.n_finite(dim)), dg[ib_])

    clamp = 0.0 if filtration == "superlevel" else 1.0
    essentials = _essential_pairing(bc_p, bc_g, clamp)

    return BettiMatching(
        grid_pred=grid_p, grid_gt=grid_g, grid_comparison=grid_c,
        barcode_pred=bc_p, barcode_gt=bc_g, barcode_comparison=bc_c,
        sigma_pred=sigma_p, sigma_gt=sigma_g,
        matched_idx=matched_idx,
        unmatched_pred_idx=unmatched_p,
        unmatched_gt_idx=unmatched_g,
        essentials=essentials,
        options={"filtration": filtration, "construction": construction,
                 "relative": relative},
    )


@dataclass(frozen=True)
class TauError:
    """Unmatched-feature counts of the composed matching."""

    dim0: int
    dim1: int

    @property
    def total(self) -> int:
        return self.dim0 + self.dim1


def _require_binary(arr: np.ndarray, name: str) -> None:
    if not np.isin(arr, (0.0, 1.0)).all():
        raise NotBinary(f"{name} must contain only 0 and 1")


def betti_matching_error(pred, gt, *, filtration: str = "superlevel",
                         construction: str = "v", relative: bool = False) -> TauError:
    """Count of features left unmatched on either side, per dimension.

    Binary inputs only; equals the matching loss on such inputs because
    every unmatched feature contributes exactly 1.
    """
    a = validate_image(pred)
    b = validate_image(gt)
    _require_binary(a, "pred")
    _require_binary(b, "gt")
    bm = betti_matching(a, b, filtration=filtration, construction=construction,
                        relative=relative)
    return TauError(
        dim0=bm.n_unmatched(0, "pred") + bm.n_unmatched(0, "gt"),
        dim1=bm.n_unmatched(1, "pred") + bm.n_unmatched(1, "gt"),
    )


@dataclass
class LevelLoss:
    """Loss breakdown of one filtration level."""

    filtration: str
    matched: dict = field(default_factory=dict)
    unmatched_pred: dict = field(default_factory=dict)
    unmatched_gt: dict = field(default_factory=dict)
    essential_matched: float = 0.0
    essential_unmatched_pred: float = 0.0
    essential_unmatched_gt: float = 0.0

    @property
    def total(self) -> float:
        return (sum(self.matched.values()) + sum(self.unmatched_pred.values())
                + sum(self.unmatched_gt.values()) + self.essential_matched
                + self.essential_unmatched_pred + self.essential_unmatched_gt)

    def to_dict(self) -> dict:
        return {
            "filtration": self.filtration,
            "total": self.total,
            "dims": {
                str(d): {
                    "matched": self.matched[d],
                    "unmatched_pred": self.unmatched_pred[d],
                    "unmatched_gt": self.unmatched_gt[d],
                }
                for d in (0, 1)
            },
            "essential": {
                "matched": self.essential_matched,
                "unmatched_pred": self.essential_unmatched_pred,
                "unmatched_gt": self.essential_unmatched_gt,
            },
        }


@dataclass
class LossReport:
    """Total loss, per-level breakdown and the optional pixel gradient."""

    loss: float
    levels: list
    gradient: np.ndarray | None = None


def _interval_values(bc: Barcode, dim: int):
    b, d = bc.pair_arrays(dim)
    sign = -1.0 if bc.grid.direction == "superlevel" else 1.0
    return sign * bc.grid._values[b], sign * bc.grid._values[d]


def _route(grad: np.ndarray, grid: CubicalGrid, flats, coeffs) -> None:
    if len(flats) == 0:
        return
    rows = np.empty(len(flats), dtype=np.int64)
    cols = np.empty(len(flats), dtype=np.int64)
    for k, f in enumerate(flats):
        r, c = grid.gradient_pixel(int(f))
        rows[k] = r
        cols[k] = c
    np.add.at(grad, (rows, cols), coeffs)


def _level_loss(bm: BettiMatching, grad: np.ndarray | None) -> LevelLoss:
    out = LevelLoss(filtration=bm.options["filtration"])
    bc_p, bc_g = bm.barcode_pred, bm.barcode_gt
    grid_p = bm.grid_pred
    for dim in (0, 1):
        pb, pd = _interval_values(bc_p, dim)
        gb, gd = _interval_values(bc_g, dim)
        li, gi = bm.matched_idx[dim]
        mb = pb[li] - gb[gi]
        md = pd[li] - gd[gi]
        out.matched[dim] = float(2.0 * (mb ** 2 + md ** 2).sum())
        up = bm.unmatched_pred_idx[dim]
        ug = bm.unmatched_gt_idx[dim]
        out.unmatched_pred[dim] = float(((pb[up] - pd[up]) ** 2).sum())
        out.unmatched_gt[dim] = float(((gb[ug] - gd[ug]) ** 2).sum())
        if grad is not None:
            bflat, dflat = bc_p.pair_arrays(dim)
            _route(grad, grid_p, bflat[li], 4.0 * mb)
            _route(grad, grid_p, dflat[li], 4.0 * md)
            diff = pb[up] - pd[up]
            _route(grad, grid_p, bflat[up], 2.0 * diff)
            _route(grad, grid_p, dflat[up], -2.0 * diff)

    ess = bm.essentials
    for fp, fg in ess.matched:
        bl = bm.grid_pred.value_of_flat(fp)
        bg = bm.grid_gt.value_of_flat(fg)
        out.essential_matched += 2.0 * (bl - bg) ** 2
        if grad is not None:
            _route(grad, grid_p, [fp], np.array([4.0 * (bl - bg)]))
    for fp in ess.unmatched_pred:
        bl = bm.grid_pred.value_of_flat(fp)
        out.essential_unmatched_pred += (bl - ess.clamp) ** 2
        if grad is not None:
            _route(grad, grid_p, [fp], np.array([2.0 * (bl - ess.clamp)]))
    for fg in ess.unmatched_gt:
        bg = bm.grid_gt.value_of_flat(fg)
        out.essential_unmatched_gt += (bg - ess.clamp) ** 2
    return out


def betti_matching_loss(pred, gt, *, filtration: str = "superlevel",
                        construction: str = "v", relative: bool = False,
                        with_gradient: bool = False) -> LossReport:
    """Loss of the composed matching, optionally with its pixel gradient.

    A matched pair contributes 2[(b_p-b_g)^2 + (d_p-d_g)^2]; an unmatched
    interval contributes its squared distance to the diagonal (b-d)^2.
    Essential components are clamped to the end of the value range (1 for
    sublevel, 0 for superlevel) and the global components of the two sides
    are matched to each other.  ``filtration="bothlevel"`` sums the
    superlevel and sublevel losses of the same image pair.

    The gradient routes each interval endpoint to the pixel that defines
    the corresponding cell value (ties broken lexicographically, a valid
    subgradient choice); unmatched ground-truth intervals contribute none.
    """
    a = validate_image(pred)
    b = validate_image(gt)
    if a.shape != b.shape:
        raise ShapeMismatch(f"image shapes differ: {a.shape} vs {b.shape}")
    if filtration == "bothlevel":
        directions = ("superlevel", "sublevel")
    elif filtration in FILTRATIONS:
        directions = (filtration,)
    else:
        raise ValueError("filtration must be sublevel, superlevel or bothlevel")

    grad = np.zeros(a.shape, dtype=np.float64) if with_gradient else None
    levels = []
    for direction in directions:
        bm = betti_matching(a, b, filtration=direction,
                            construction=construction, relative=relative)
        levels.append(_level_loss(bm, grad))
    return LossReport(
        loss=float(sum(lv.total for lv in levels)),
        levels=levels,
        gradient=grad,
    )
