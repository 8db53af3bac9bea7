"""Shared fixtures: worked matrices, instance builders, oracle pipeline."""

import numpy as np
import pytest

from bettimatch import (
    betti_matching,
    build_grid,
    reduce_boundary_matrix,
    reduce_image_matrix,
)

FIG4_I = np.array([[20, 27, 26], [21, 49, 25], [22, 23, 24]], dtype=float)
FIG4_J1 = np.array([[0, 1, 2], [7, 39, 3], [6, 5, 4]], dtype=float)
FIG4_J2 = np.array([[0, 1, 2], [7, 19, 3], [6, 5, 4]], dtype=float)
FIG3_A = np.array([[4, 1, 5], [8, 3, 6], [7, 2, 9]], dtype=float)


@pytest.fixture
def fig4():
    return FIG4_I.copy(), FIG4_J1.copy(), FIG4_J2.copy()


def square_ring(canvas, top, left, height=3, width=3):
    """Draw a rectangular ring of ones with a hollow interior."""
    canvas[top: top + height, left: left + width] = 1.0
    canvas[top + 1: top + height - 1, left + 1: left + width - 1] = 0.0
    return canvas


def disjoint_rings_pair():
    """Two rings per side at mutually disjoint positions (no overlap)."""
    pred = square_ring(square_ring(np.zeros((11, 11)), 1, 1), 1, 7)
    gt = square_ring(square_ring(np.zeros((11, 11)), 7, 1), 7, 7)
    return pred, gt


def translated_ring_pair():
    """A 5x5 ring against itself shifted one column; the union keeps a hole."""
    gt = square_ring(np.zeros((9, 9)), 2, 2, 5, 5)
    pred = square_ring(np.zeros((9, 9)), 2, 3, 5, 5)
    return pred, gt


def random_binary(rng, shape, p=0.5):
    return (rng.random(shape) < p).astype(np.float64)


def oracle_matching(pred, gt, filtration="superlevel", construction="v",
                    relative=False):
    """Compose the matching using only the reduction oracles.

    Independent of the union-find path: barcodes come from plain boundary
    reduction, image pairs from the two-ordering reduction, and the joins
    are dictionary lookups.  Returns per-dim sets of matched
    ((pred_birth, pred_death), (gt_birth, gt_death)) refined-order pairs
    plus the per-side positive interval sets.
    """
    ext = np.maximum if filtration == "superlevel" else np.minimum
    comp = ext(pred, gt)
    gp = build_grid(pred, construction, filtration, relative)
    gg = build_grid(gt, construction, filtration, relative)
    gc = build_grid(comp, construction, filtration, relative)

    def positive_pairs(grid):
        red = reduce_boundary_matrix(grid)
        out = {0: {}, 1: {}}
        for dim, i, j in red.pairs:
            ci = int(grid.cell_of_order[i])
            cj = int(grid.cell_of_order[j])
            if grid._values[ci] != grid._values[cj]:
                out[dim][i] = (i, j)
        return out

    pairs_p = positive_pairs(gp)
    pairs_g = positive_pairs(gg)
    pairs_c = positive_pairs(gc)
    cod_by_death = {
        d: {pair[1]: pair for pair in pairs_c[d].values()} for d in (0, 1)
    }

    def sigma(domain_grid, dom_pairs):
        red = reduce_image_matrix(domain_grid, gc)
        out = {0: {}, 1: {}}
        for dim, i, j, _, _ in red.pairs:
            dom = dom_pairs[dim].get(i)
            cod = cod_by_death[dim].get(j)
            if dom is not None and cod is not None:
                out[dim][cod] = dom
        return out

    sp = sigma(gp, pairs_p)
    sg = sigma(gg, pairs_g)
    matched = {0: set(), 1: set()}
    for d in (0, 1):
        for ckey, dom in sp[d].items():
            if ckey in sg[d]:
                matched[d].add((dom, sg[d][ckey]))
    return matched, pairs_p, pairs_g


def production_matched_sets(bm):
    """BettiMatching -> the same matched-set encoding as oracle_matching."""
    out = {0: set(), 1: set()}
    for d in (0, 1):
        pb = bm.barcode_pred.birth_orders(d)
        pd = bm.barcode_pred.death_orders(d)
        gb = bm.barcode_gt.birth_orders(d)
        gd = bm.barcode_gt.death_orders(d)
        for i, j in zip(*bm.matched_idx[d]):
            out[d].add(((int(pb[i]), int(pd[i])), (int(gb[j]), int(gd[j]))))
    return out


def assert_matches_oracle(pred, gt, **opts):
    bm = betti_matching(pred, gt, **opts)
    got = production_matched_sets(bm)
    want, pairs_p, pairs_g = oracle_matching(pred, gt, **opts)
    assert got == want
    for d in (0, 1):
        assert bm.barcode_pred.n_finite(d) == len(pairs_p[d])
        assert bm.barcode_gt.n_finite(d) == len(pairs_g[d])
    return bm


def matching_structure(bm):
    """Combinatorial signature of a matching: refined ids and pixel routing.

    Constant under value perturbations that do not change the matching;
    used to detect matching-unstable pixels in gradient checks.
    """
    sig = []
    for dim in (0, 1):
        pp = bm.barcode_pred.pair_arrays(dim)
        gp = bm.barcode_gt.pair_arrays(dim)
        li, gi = bm.matched_idx[dim]
        matched = sorted(
            (int(pp[0][i]), int(pp[1][i]), int(gp[0][j]), int(gp[1][j]))
            for i, j in zip(li, gi)
        )
        up = sorted((int(pp[0][i]), int(pp[1][i]))
                    for i in bm.unmatched_pred_idx[dim])
        ug = sorted((int(gp[0][i]), int(gp[1][i]))
                    for i in bm.unmatched_gt_idx[dim])
        routes = tuple(
            (bm.grid_pred.gradient_pixel(a), bm.grid_pred.gradient_pixel(b))
            for a, b in up
        ) + tuple(
            (bm.grid_pred.gradient_pixel(int(pp[0][i])),
             bm.grid_pred.gradient_pixel(int(pp[1][i])))
            for i in bm.matched_idx[dim][0]
        )
        sig.append((tuple(matched), tuple(up), tuple(ug), routes))
    ess = bm.essentials
    sig.append((ess.matched, ess.unmatched_pred, ess.unmatched_gt))
    return tuple(sig)
