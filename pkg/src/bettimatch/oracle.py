"""Brute-force reference computations used by tests and `verify`.

These are deliberately naive: full boundary-matrix reduction over GF(2)
with columns as Python sets, and Betti numbers by component labeling plus
an Euler characteristic count.  They share no code with the union-find
fast path, so agreement between the two is meaningful evidence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import IncompatibleGrids, NotBinary, NotComparable, TooLarge
from .grid import CubicalGrid, validate_image

#: refuse reductions beyond this many cells (cubic-time guard)
MAX_CELLS = 40_000


@dataclass
class ReducedBarcode:
    """Reduction output: value intervals plus the refined pairing."""

    dim0: list = field(default_factory=list)  # (birth_value, death_value)
    dim1: list = field(default_factory=list)
    essential0: list = field(default_factory=list)  # birth values
    essential1: list = field(default_factory=list)
    pairs: list = field(default_factory=list)  # (dim, birth_order, death_order)

    def value_multiset(self):
        out = [(0, b, d) for b, d in self.dim0]
        out += [(1, b, d) for b, d in self.dim1]
        out += [(0, b, None) for b in self.essential0]
        out += [(1, b, None) for b in self.essential1]
        return sorted(out, key=lambda t: (t[0], t[1], t[2] is None, t[2] or 0.0))


def _face_orders(grid: CubicalGrid, flat: int, order_of_cell) -> list[int]:
    """Refined indices of the codimension-1 faces of a cell."""
    cell = grid.cell_id(flat)
    if cell.dim == 0:
        return []
    if cell.dim == 1:
        faces = grid.boundary(cell)
    else:
        r, c = cell.row, cell.col
        from .grid import CellId

        faces = (
            CellId(1, r, c, "h"),
            CellId(1, r + 1, c, "h"),
            CellId(1, r, c, "v"),
            CellId(1, r, c + 1, "v"),
        )
    return [int(order_of_cell[grid.flat_id(f)]) for f in faces]


def _reduce_columns(columns: list[set[int]]):
    """Standard left-to-right reduction; returns {low: column} pairs."""
    low_to_col: dict[int, int] = {}
    reduced: list[set[int]] = []
    pairs = []
    for j, col in enumerate(columns):
        col = set(col)
        while col:
            lo = max(col)
            k = low_to_col.get(lo)
            if k is None:
                break
            col ^= reduced[k]
        reduced.append(col)
        if col:
            lo = max(col)
            low_to_col[lo] = j
            pairs.append((lo, j))
    return pairs


def reduce_boundary_matrix(grid: CubicalGrid) -> ReducedBarcode:
    """Barcode by plain boundary-matrix reduction in the refined order."""
    n = grid.n_cells
    if n > MAX_CELLS:
        raise TooLarge(f"{n} cells exceeds the reduction guard of {MAX_CELLS}")
    order = grid.order_of_cell
    columns = [
        set(_face_orders(grid, int(grid.cell_of_order[j]), order))
        for j in range(n)
    ]
    pairs = _reduce_columns(columns)

    out = ReducedBarcode()
    paired = set()
    for i, j in pairs:
        paired.add(i)
        paired.add(j)
        ci = int(grid.cell_of_order[i])
        cj = int(grid.cell_of_order[j])
        dim = int(grid._dims[ci])
        bv = grid.value_of_flat(ci)
        dv = grid.value_of_flat(cj)
        out.pairs.append((dim, i, j))
        if grid._values[ci] != grid._values[cj]:
            (out.dim0 if dim == 0 else out.dim1).append((bv, dv))
    for i in range(n):
        if i in paired:
            continue
        ci = int(grid.cell_of_order[i])
        dim = int(grid._dims[ci])
        if dim == 0:
            out.essential0.append(grid.value_of_flat(ci))
        elif dim == 1:
            out.essential1.append(grid.value_of_flat(ci))
    out.dim0.sort()
    out.dim1.sort()
    out.essential0.sort()
    out.essential1.sort()
    return out


@dataclass
class ReducedImageBarcode:
    """Two-ordering reduction output.

    ``pairs`` holds every reduction pair as (dim, domain_order,
    codomain_order, birth_value, death_value); forward pairs are those with
    birth_value < death_value in internal units.
    """

    pairs: list = field(default_factory=list)

    def forward_value_multiset(self, domain: CubicalGrid):
        sign = -1.0 if domain.direction == "superlevel" else 1.0
        out = [
            (d, sign * b, sign * dv)
            for d, _, _, b, dv in self.pairs
            if b < dv
        ]
        return sorted(out)


def check_comparable(domain: CubicalGrid, codomain: CubicalGrid) -> None:
    """Domain must dominate codomain entrywise in internal sublevel units."""
    if (
        domain.lattice_shape != codomain.lattice_shape
        or domain.construction != codomain.construction
        or domain.direction != codomain.direction
        or domain.relative != codomain.relative
    ):
        raise IncompatibleGrids(
            "grids differ in shape, construction, direction or padding"
        )
    if not (domain._values >= codomain._values).all():
        raise NotComparable(
            "domain does not dominate codomain entrywise; level sets are not nested"
        )


def reduce_image_matrix(domain: CubicalGrid, codomain: CubicalGrid) -> ReducedImageBarcode:
    """Image persistence pairs by reduction with rows in domain order and
    columns in codomain order."""
    check_comparable(domain, codomain)
    n = domain.n_cells
    if n > MAX_CELLS:
        raise TooLarge(f"{n} cells exceeds the reduction guard of {MAX_CELLS}")
    dom_order = domain.order_of_cell
    columns = [
        set(_face_orders(domain, int(codomain.cell_of_order[j]), dom_order))
        for j in range(n)
    ]
    pairs = _reduce_columns(columns)
    out = ReducedImageBarcode()
    for i, j in pairs:
        ci = int(domain.cell_of_order[i])
        cj = int(codomain.cell_of_order[j])
        dim = int(domain._dims[ci])
        out.pairs.append(
            (dim, i, j, float(domain._values[ci]), float(codomain._values[cj]))
        )
    return out


def betti_flood_fill(img, threshold: float = 0.5) -> tuple[int, int]:
    """Betti numbers of a binary image's foreground, independently.

    beta0 by 4-connected labeling of the pixels at or above the threshold,
    beta1 from the Euler characteristic V - E + F of the vertex-construction
    complex on those pixels.
    """
    arr = validate_image(img)
    if not np.isin(arr, (0.0, 1.0)).all():
        raise NotBinary("flood-fill oracle expects a {0,1} image")
    fg = arr >= threshold
    structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    _, beta0 = ndimage.label(fg, structure=structure)
    v = int(fg.sum())
    e = int((fg[:, 1:] & fg[:, :-1]).sum() + (fg[1:, :] & fg[:-1, :]).sum())
    f = int((fg[1:, 1:] & fg[1:, :-1] & fg[:-1, 1:] & fg[:-1, :-1]).sum())
    return beta0, beta0 - (v - e + f)
