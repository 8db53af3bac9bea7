import numpy as np
import pytest

from bettimatch import (
    NotBinary,
    TooLarge,
    betti_flood_fill,
    build_grid,
    reduce_boundary_matrix,
    reduce_image_matrix,
)
from conftest import FIG4_I, FIG4_J1, FIG4_J2, square_ring


def test_two_pixel_strip_hand_reduced():
    g = build_grid([[3.0, 7.0]], "v", "sublevel")
    red = reduce_boundary_matrix(g)
    # the edge pairs with vertex 7 at zero persistence, so dim-0 stays empty
    assert red.dim0 == []
    assert red.dim1 == []
    assert red.essential0 == [3.0]


def test_two_by_two_hand_reduced():
    red = reduce_boundary_matrix(build_grid([[1.0, 2.0], [3.0, 4.0]], "v"))
    assert red.dim1 == []
    assert red.essential0 == [1.0]
    assert red.essential1 == []


def test_fig4_barcodes_by_reduction():
    for img, ess, bar1 in [
        (FIG4_I, 20.0, (27.0, 49.0)),
        (FIG4_J1, 0.0, (7.0, 39.0)),
        (FIG4_J2, 0.0, (7.0, 19.0)),
    ]:
        red = reduce_boundary_matrix(build_grid(img, "v", "sublevel"))
        assert red.dim0 == []
        assert red.dim1 == [bar1]
        assert red.essential0 == [ess]


def test_low_indices_unique_after_reduction():
    rng = np.random.default_rng(3)
    g = build_grid(rng.random((5, 5)), "v")
    red = reduce_boundary_matrix(g)
    lows = [i for _, i, _ in red.pairs]
    deaths = [j for _, _, j in red.pairs]
    assert len(lows) == len(set(lows))
    assert len(deaths) == len(set(deaths))


def test_image_reduction_identity():
    g = build_grid(FIG4_I, "v")
    red = reduce_image_matrix(g, g)
    bar = reduce_boundary_matrix(g)
    fwd = red.forward_value_multiset(g)
    want = sorted([(0, b, d) for b, d in bar.dim0] + [(1, b, d) for b, d in bar.dim1])
    assert fwd == want


def test_image_reduction_fig4():
    gi = build_grid(FIG4_I, "v")
    gj = build_grid(FIG4_J1, "v")
    assert reduce_image_matrix(gi, gj).forward_value_multiset(gi) == [(1, 27.0, 39.0)]
    gj2 = build_grid(FIG4_J2, "v")
    red = reduce_image_matrix(gi, gj2)
    assert red.forward_value_multiset(gi) == []
    # the reverse pair is still produced: edge born at 27 dies at 19
    rev = [(d, b, dv) for d, _, _, b, dv in red.pairs if d == 1 and b >= dv]
    assert (1, 27.0, 19.0) in rev


def test_flood_fill_ring():
    ring = square_ring(np.zeros((4, 4)), 0, 0, 4, 4)
    assert betti_flood_fill(ring, 0.5) == (1, 1)


def test_flood_fill_degenerate():
    assert betti_flood_fill(np.zeros((5, 5)), 0.5) == (0, 0)
    two = np.zeros((5, 5))
    two[0, 0] = two[4, 4] = 1.0
    assert betti_flood_fill(two, 0.5) == (2, 0)
    with pytest.raises(NotBinary):
        betti_flood_fill(np.full((3, 3), 0.25))


def test_flood_fill_agrees_with_reduction_betti():
    rng = np.random.default_rng(4)
    from bettimatch import betti_numbers_at, compute_barcode

    for _ in range(40):
        img = (rng.random((6, 6)) < 0.5).astype(float)
        g = build_grid(img, "v", "superlevel")
        assert betti_numbers_at(g, 0.5) == betti_flood_fill(img, 0.5)


def test_too_large_guard():
    big = np.zeros((120, 120))
    with pytest.raises(TooLarge):
        reduce_boundary_matrix(build_grid(big, "v"))
