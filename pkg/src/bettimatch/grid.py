"""Filtered cubical grid complexes of 2D grayscale images.

A grayscale image is turned into a cubical complex on a rectangular vertex
lattice.  Under the vertex construction ("v") the pixels are the vertices and
every higher cell takes the extremal value of its vertices; under the
top-cell construction ("t") the pixels are the squares and every lower cell
takes the extremal value of its incident squares.

Internally everything is a sublevel filtration: a superlevel sweep is
realized by negating the pixel values on ingestion, and every public value
is negated back on the way out.  Cells are indexed two ways: a *flat* id
(layout vertices, horizontal edges, vertical edges, squares) used by the
sweep kernels, and the *refined* index given by sorting all cells by
(value, dimension, anchor row, anchor col, orientation).  The refined order
is a total, deterministic compatible ordering: faces always precede cofaces,
and equal-valued cells are broken by geometry so results are reproducible
across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyImage,
    IndexOutOfRange,
    NonFiniteValue,
    NotTwoDimensional,
    WrongDimension,
)

CONSTRUCTIONS = ("v", "t")
DIRECTIONS = ("sublevel", "superlevel")


class _Outside:
    """Distinguished dual vertex representing the unbounded face."""

    __slots__ = ()

    def __repr__(self):
        return "OUTSIDE"


#: Sentinel returned by :meth:`CubicalGrid.dual_boundary` for border edges.
OUTSIDE = _Outside()


@dataclass(frozen=True)
class CellId:
    """A cell of the grid complex, addressed by lattice anchor.

    ``dim`` is 0 (vertex), 1 (edge) or 2 (square); ``row``/``col`` anchor the
    cell at its smallest incident lattice vertex.  Edges carry an
    ``orientation``: ``"h"`` joins ``(row, col)`` to ``(row, col+1)``,
    ``"v"`` joins ``(row, col)`` to ``(row+1, col)``.
    """

    dim: int
    row: int
    col: int
    orientation: str | None = None


def validate_image(img) -> np.ndarray:
    """Coerce to a contiguous float64 matrix, rejecting bad inputs."""
    arr = np.ascontiguousarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise NotTwoDimensional(f"expected a 2D image, got shape {arr.shape}")
    if arr.size == 0:
        raise EmptyImage("image has zero pixels")
    if not np.isfinite(arr).all():
        raise NonFiniteValue("image contains NaN or infinite pixel values")
    return arr


def _t_lower_cells(a: np.ndarray):
    """Edge and vertex values for the top-cell construction (internal units).

    Every lower cell takes the minimum over its incident squares; squares
    outside the image act as +inf so border cells use only real pixels.
    """
    ap = np.pad(a, 1, constant_values=np.inf)
    eh = np.minimum(ap[:-1, 1:-1], ap[1:, 1:-1])
    ev = np.minimum(ap[1:-1, :-1], ap[1:-1, 1:])
    vert = np.minimum(
        np.minimum(ap[:-1, :-1], ap[:-1, 1:]),
        np.minimum(ap[1:, :-1], ap[1:, 1:]),
    )
    return vert, eh, ev


class CubicalGrid:
    """The filtered cubical complex of one image, frozen after construction.

    All mutating work happens in :func:`build_grid`; instances are treated
    as immutable and are safe to share between threads.
    """

    def __init__(self, *, construction, direction, relative, image_shape,
                 lattice_shape, values, internal_image, frame_value):
        self.construction = construction
        self.direction = direction
        self.relative = relative
        #: shape of the caller's image, before any frame padding
        self.image_shape = image_shape
        #: vertex lattice (rows, cols) of the complex
        self.lattice_shape = lattice_shape
        self._internal_image = internal_image  # padded, negated if superlevel
        #: frame padding value in original units, None unless relative
        self.frame_value = frame_value

        r, c = lattice_shape
        self.n_vertices = r * c
        self.n_h_edges = r * (c - 1)
        self.n_v_edges = (r - 1) * c
        self.n_edges = self.n_h_edges + self.n_v_edges
        self.n_squares = (r - 1) * (c - 1)
        self.n_cells = self.n_vertices + self.n_edges + self.n_squares
        self._hb = self.n_vertices
        self._vb = self.n_vertices + self.n_h_edges
        self._sb = self.n_vertices + self.n_edges

        self._values = values  # internal units, indexed by flat id
        dim = np.empty(self.n_cells, dtype=np.int8)
        dim[: self._hb] = 0
        dim[self._hb: self._sb] = 1
        dim[self._sb:] = 2
        rows = np.concatenate([
            np.repeat(np.arange(r), c),
            np.repeat(np.arange(r), c - 1),
            np.repeat(np.arange(r - 1), c),
            np.repeat(np.arange(r - 1), c - 1),
        ]).astype(np.int32)
        cols = np.concatenate([
            np.tile(np.arange(c), r),
            np.tile(np.arange(c - 1), r),
            np.tile(np.arange(c), r - 1),
            np.tile(np.arange(c - 1), r - 1),
        ]).astype(np.int32)
        orient = np.zeros(self.n_cells, dtype=np.int8)
        orient[self._vb: self._sb] = 1
        self._dims = dim
        self._rows = rows
        self._cols = cols
        self._def_pixels = None
        # compatible order: value, then dim (faces first), then anchor
        self.cell_of_order = np.lexsort((orient, cols, rows, dim, values)).astype(np.int64)
        self.order_of_cell = np.empty(self.n_cells, dtype=np.int64)
        self.order_of_cell[self.cell_of_order] = np.arange(self.n_cells, dtype=np.int64)
        self.edges_sorted = self.cell_of_order[
            self._dims[self.cell_of_order] == 1
        ].astype(np.int64)

    # -- flat id helpers -------------------------------------------------

    def cell_id(self, flat: int) -> CellId:
        """Flat id -> public :class:`CellId`."""
        d = int(self._dims[flat])
        r = int(self._rows[flat])
        c = int(self._cols[flat])
        if d == 1:
            orientation = "h" if flat < self._vb else "v"
            return CellId(1, r, c, orientation)
        return CellId(d, r, c)

    def flat_id(self, cell: CellId) -> int:
        r, c = cell.row, cell.col
        lr, lc = self.lattice_shape
        if cell.dim == 0:
            if not (0 <= r < lr and 0 <= c < lc):
                raise IndexOutOfRange(f"vertex anchor {(r, c)} outside lattice")
            return r * lc + c
        if cell.dim == 1:
            if cell.orientation == "h":
                if not (0 <= r < lr and 0 <= c < lc - 1):
                    raise IndexOutOfRange(f"h-edge anchor {(r, c)} outside lattice")
                return self._hb + r * (lc - 1) + c
            if cell.orientation == "v":
                if not (0 <= r < lr - 1 and 0 <= c < lc):
                    raise IndexOutOfRange(f"v-edge anchor {(r, c)} outside lattice")
                return self._vb + r * lc + c
            raise WrongDimension("edge cell without orientation")
        if cell.dim == 2:
            if not (0 <= r < lr - 1 and 0 <= c < lc - 1):
                raise IndexOutOfRange(f"square anchor {(r, c)} outside lattice")
            return self._sb + r * (lc - 1) + c
        raise WrongDimension(f"invalid cell dimension {cell.dim}")

    # -- spec operations -------------------------------------------------

    def boundary(self, edge: CellId) -> tuple[CellId, CellId]:
        """The two endpoint vertices of an edge."""
        if edge.dim != 1:
            raise WrongDimension(f"boundary expects an edge, got dim {edge.dim}")
        if edge.orientation == "h":
            return CellId(0, edge.row, edge.col), CellId(0, edge.row, edge.col + 1)
        return CellId(0, edge.row, edge.col), CellId(0, edge.row + 1, edge.col)

    def dual_boundary(self, edge: CellId):
        """The two squares cofacing an edge, with OUTSIDE past the border."""
        if edge.dim != 1:
            raise WrongDimension(f"dual_boundary expects an edge, got dim {edge.dim}")
        lr, lc = self.lattice_shape
        r, c = edge.row, edge.col
        if edge.orientation == "h":
            above = CellId(2, r - 1, c) if r >= 1 else OUTSIDE
            below = CellId(2, r, c) if r <= lr - 2 else OUTSIDE
            return above, below
        left = CellId(2, r, c - 1) if c >= 1 else OUTSIDE
        right = CellId(2, r, c) if c <= lc - 2 else OUTSIDE
        return left, right

    def index_to_coord(self, refined_index: int) -> CellId:
        if not 0 <= refined_index < self.n_cells:
            raise IndexOutOfRange(
                f"refined index {refined_index} outside 0..{self.n_cells - 1}"
            )
        return self.cell_id(int(self.cell_of_order[refined_index]))

    def coord_to_index(self, cell: CellId) -> int:
        return int(self.order_of_cell[self.flat_id(cell)])

    def coord_to_value(self, cell: CellId) -> float:
        """Filtration value of a cell, in the caller's (original) units."""
        return self.value_of_flat(self.flat_id(cell))

    def value_of_flat(self, flat: int) -> float:
        v = float(self._values[flat])
        return -v if self.direction == "superlevel" else v

    def internal_value(self, flat: int) -> float:
        return float(self._values[flat])

    def to_original(self, internal: float) -> float:
        return -internal if self.direction == "superlevel" else internal

    # -- pixel bookkeeping -----------------------------------------------

    def _defining_pixels(self):
        """Per-cell source pixel table in padded-image coordinates.

        Under "v" a cell takes the max internal value of its vertices; under
        "t" the min internal value of its incident squares.  Ties go to the
        lexicographically smallest pixel (argmax/argmin pick the first
        candidate, and candidates are enumerated in lexicographic order).
        """
        if self._def_pixels is not None:
            return self._def_pixels
        a = self._internal_image
        prow = np.empty(self.n_cells, dtype=np.int64)
        pcol = np.empty(self.n_cells, dtype=np.int64)
        rows, cols = self._rows, self._cols
        hb, vb, sb = self._hb, self._vb, self._sb
        if self.construction == "v":
            prow[:hb] = rows[:hb]
            pcol[:hb] = cols[:hb]
            right = (a[:, 1:] > a[:, :-1]).ravel()
            prow[hb:vb] = rows[hb:vb]
            pcol[hb:vb] = cols[hb:vb] + right
            down = (a[1:, :] > a[:-1, :]).ravel()
            prow[vb:sb] = rows[vb:sb] + down
            pcol[vb:sb] = cols[vb:sb]
            corners = np.stack([a[:-1, :-1], a[:-1, 1:], a[1:, :-1], a[1:, 1:]])
            k = np.argmax(corners, axis=0).ravel()
            prow[sb:] = rows[sb:] + (k >> 1)
            pcol[sb:] = cols[sb:] + (k & 1)
        else:
            ap = np.pad(a, 1, constant_values=np.inf)
            quads = np.stack([ap[:-1, :-1], ap[:-1, 1:], ap[1:, :-1], ap[1:, 1:]])
            k = np.argmin(quads, axis=0).ravel()
            prow[:hb] = rows[:hb] - 1 + (k >> 1)
            pcol[:hb] = cols[:hb] - 1 + (k & 1)
            below = (ap[1:, 1:-1] < ap[:-1, 1:-1]).ravel()
            prow[hb:vb] = rows[hb:vb] - 1 + below
            pcol[hb:vb] = cols[hb:vb]
            right = (ap[1:-1, 1:] < ap[1:-1, :-1]).ravel()
            prow[vb:sb] = rows[vb:sb]
            pcol[vb:sb] = cols[vb:sb] - 1 + right
            prow[sb:] = rows[sb:]
            pcol[sb:] = cols[sb:]
        self._def_pixels = (prow, pcol)
        return self._def_pixels

    def defining_pixel(self, flat: int) -> tuple[int, int]:
        """Padded-image pixel whose value the cell inherits (ties: smallest)."""
        prow, pcol = self._defining_pixels()
        return int(prow[flat]), int(pcol[flat])

    def report_pixel(self, flat: int) -> tuple[int, int, bool]:
        """Defining pixel in pre-padding coordinates plus a frame flag."""
        r, c = self.defining_pixel(flat)
        if not self.relative:
            return r, c, False
        m, n = self.image_shape
        rr, cc = r - 1, c - 1
        frame = not (0 <= rr < m and 0 <= cc < n)
        return rr, cc, frame

    def gradient_pixel(self, flat: int) -> tuple[int, int]:
        """In-range original pixel carrying the cell value's derivative.

        Frame cells inherit the padding value, which tracks the image
        extremum, so their contribution is routed to the extremal pixel.
        """
        r, c, frame = self.report_pixel(flat)
        if not frame:
            return r, c
        m, n = self.image_shape
        inner = self._internal_image[1: m + 1, 1: n + 1]
        flat_arg = int(np.argmin(inner))
        return flat_arg // n, flat_arg % n


def build_grid(img, construction: str = "v", direction: str = "sublevel",
               relative: bool = False) -> CubicalGrid:
    """Build the filtered cubical grid complex of a grayscale image.

    ``direction="superlevel"`` negates values on ingestion; ``relative=True``
    pads the image with a one-pixel frame at the value that enters the
    filtration first (min-1 under sublevel, max+1 under superlevel), closing
    features that cross the image border.
    """
    if construction not in CONSTRUCTIONS:
        raise ValueError(f"construction must be one of {CONSTRUCTIONS}")
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    arr = validate_image(img)
    image_shape = arr.shape
    a = -arr if direction == "superlevel" else arr
    frame_value = None
    if relative:
        pad = float(a.min()) - 1.0
        a = np.pad(a, 1, constant_values=pad)
        frame_value = -pad if direction == "superlevel" else pad
    m, n = a.shape

    if construction == "v":
        lattice = (m, n)
        vert = a
        eh = np.maximum(a[:, :-1], a[:, 1:])
        ev = np.maximum(a[:-1, :], a[1:, :])
        sq = np.maximum(np.maximum(a[:-1, :-1], a[:-1, 1:]),
                        np.maximum(a[1:, :-1], a[1:, 1:]))
    else:
        lattice = (m + 1, n + 1)
        vert, eh, ev = _t_lower_cells(a)
        sq = a
    values = np.concatenate(
        [vert.ravel(), eh.ravel(), ev.ravel(), sq.ravel()]
    ).astype(np.float64)

    return CubicalGrid(
        construction=construction,
        direction=direction,
        relative=relative,
        image_shape=image_shape,
        lattice_shape=lattice,
        values=values,
        internal_image=a,
        frame_value=frame_value,
    )
