"""Barcodes of filtered cubical grids via the two union-find sweeps.

The heavy lifting happens in :mod:`bettimatch._kernels` on flat cell ids;
this module wraps the results, converting internal sublevel values back to
the caller's units and materializing :class:`Interval` objects lazily so
that large barcodes stay cheap to produce.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grid import CellId, CubicalGrid


@dataclass(frozen=True)
class Interval:
    """One bar of a refined barcode, in the caller's value units.

    Finite intervals carry both cells; essential intervals have no death
    (``death_value`` is the signed infinity of the sweep direction).
    ``birth_pixel``/``death_pixel`` are the defining pixels in pre-padding
    coordinates, with frame flags when the relative padding is active.
    """

    dim: int
    birth_value: float
    death_value: float
    birth_cell: CellId
    death_cell: CellId | None
    birth_index: int
    death_index: int | None
    birth_pixel: tuple[int, int]
    death_pixel: tuple[int, int] | None
    birth_frame: bool = False
    death_frame: bool = False

    @property
    def essential(self) -> bool:
        return self.death_index is None


class Barcode:
    """Per-dimension intervals of one grid plus the sweep bookkeeping.

    ``critical_edges`` are the edges that merged dual classes (in decreasing
    refined order) and ``columns_to_reduce`` the remaining edges (in
    increasing order); together they partition the edge set and drive the
    image persistence sweeps.
    """

    def __init__(self, grid: CubicalGrid, d0, d1, ess0, cols, crit):
        self.grid = grid
        self._d0 = d0  # (birth_flat, death_flat) int64 arrays
        self._d1 = d1
        self._ess0 = ess0  # flat birth vertices
        self._cols = cols
        self._crit = crit
        self._cache: dict[str, tuple[Interval, ...]] = {}

    # -- array views used by the matching pipeline ------------------------

    def pair_arrays(self, dim: int):
        return self._d0 if dim == 0 else self._d1

    def birth_orders(self, dim: int) -> np.ndarray:
        return self.grid.order_of_cell[self.pair_arrays(dim)[0]]

    def death_orders(self, dim: int) -> np.ndarray:
        return self.grid.order_of_cell[self.pair_arrays(dim)[1]]

    @property
    def columns_flat(self) -> np.ndarray:
        return self._cols

    @property
    def critical_flat(self) -> np.ndarray:
        return self._crit

    def n_finite(self, dim: int) -> int:
        return self.pair_arrays(dim)[0].shape[0]

    # -- interval views ----------------------------------------------------

    def _interval(self, dim, birth_flat, death_flat) -> Interval:
        g = self.grid
        br, bc, bf = g.report_pixel(int(birth_flat))
        dr, dc, df = g.report_pixel(int(death_flat))
        return Interval(
            dim=dim,
            birth_value=g.value_of_flat(int(birth_flat)),
            death_value=g.value_of_flat(int(death_flat)),
            birth_cell=g.cell_id(int(birth_flat)),
            death_cell=g.cell_id(int(death_flat)),
            birth_index=int(g.order_of_cell[birth_flat]),
            death_index=int(g.order_of_cell[death_flat]),
            birth_pixel=(br, bc),
            death_pixel=(dr, dc),
            birth_frame=bf,
            death_frame=df,
        )

    def _essential(self, dim, birth_flat) -> Interval:
        g = self.grid
        br, bc, bf = g.report_pixel(int(birth_flat))
        inf = -np.inf if g.direction == "superlevel" else np.inf
        return Interval(
            dim=dim,
            birth_value=g.value_of_flat(int(birth_flat)),
            death_value=inf,
            birth_cell=g.cell_id(int(birth_flat)),
            death_cell=None,
            birth_index=int(g.order_of_cell[birth_flat]),
            death_index=None,
            birth_pixel=(br, bc),
            death_pixel=None,
            birth_frame=bf,
        )

    def _finite_list(self, dim: int) -> tuple[Interval, ...]:
        key = f"d{dim}"
        if key not in self._cache:
            b, d = self.pair_arrays(dim)
            self._cache[key] = tuple(
                self._interval(dim, bf, df) for bf, df in zip(b, d)
            )
        return self._cache[key]

    @property
    def dim0(self) -> tuple[Interval, ...]:
        return self._finite_list(0)

    @property
    def dim1(self) -> tuple[Interval, ...]:
        return self._finite_list(1)

    @property
    def essential0(self) -> tuple[Interval, ...]:
        if "e0" not in self._cache:
            self._cache["e0"] = tuple(self._essential(0, f) for f in self._ess0)
        return self._cache["e0"]

    @property
    def essential1(self) -> tuple[Interval, ...]:
        # the dual graph of a full rectangular grid always reaches OUTSIDE,
        # so no bounded dual class can survive the sweep
        return ()

    @property
    def critical_edges(self) -> list[CellId]:
        return [self.grid.cell_id(int(f)) for f in self._crit]

    @property
    def columns_to_reduce(self) -> list[CellId]:
        return [self.grid.cell_id(int(f)) for f in self._cols]

    def finite(self, dim: int) -> tuple[Interval, ...]:
        return self._finite_list(dim)

    def value_multiset(self):
        """Canonical multiset of (dim, birth, death) incl. essentials."""
        out = []
        for dim in (0, 1):
            b, d = self.pair_arrays(dim)
            for bf, df in zip(b, d):
                out.append((dim, self.grid.value_of_flat(int(bf)),
                            self.grid.value_of_flat(int(df))))
        for f in self._ess0:
            out.append((0, self.grid.value_of_flat(int(f)), None))
        return sorted(out, key=lambda t: (t[0], t[1], t[2] is None, t[2] or 0.0))


def compute_barcode(grid: CubicalGrid, keep_critical: bool = True) -> Barcode:
    """Refined barcode of a grid, validated against the reduction oracle.

    ``keep_critical=False`` drops the critical-edge list (it is only needed
    when the grid later acts as the domain of an image persistence sweep).
    """
    R, C = grid.lattice_shape
    (cols, crit, d1b, d1d, d0b, d0d, ess0) = _kernels.barcode_sweeps(
        grid.edges_sorted, grid.order_of_cell, grid.cell_of_order,
        grid._values, R, C,
    )
    if not keep_critical:
        crit = crit[:0]
    # deterministic order: essentials by refined birth index
    ess0 = ess0[np.argsort(grid.order_of_cell[ess0])] if len(ess0) else ess0
    return Barcode(grid, (d0b, d0d), (d1b, d1d), ess0, cols, crit)


def betti_numbers_at(grid: CubicalGrid, threshold: float,
                     barcode: Barcode | None = None) -> tuple[int, int]:
    """Betti numbers of the level-set complex at a threshold.

    Counts the barcode intervals alive at the threshold: under sublevel an
    interval [b, d) is alive iff b <= t < d, under superlevel iff
    d < t <= b (essentials never die).
    """
    bc = barcode if barcode is not None else compute_barcode(grid, keep_critical=False)
    t = -threshold if grid.direction == "superlevel" else threshold
    counts = [0, 0]
    for dim in (0, 1):
        b, d = bc.pair_arrays(dim)
        if len(b):
            bv = grid._values[b]
            dv = grid._values[d]
            counts[dim] = int(np.count_nonzero((bv <= t) & (t < dv)))
    for f in bc._ess0:
        if grid._values[f] <= t:
            counts[0] += 1
    return counts[0], counts[1]
