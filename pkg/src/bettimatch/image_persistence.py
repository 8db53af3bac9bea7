"""Persistence pairs of the inclusion-induced map between two filtrations.

For images I >= J (internal sublevel units) every level set of I sits
inside the corresponding level set of J, and the induced map on homology
has its own barcode.  The sweeps reuse the bookkeeping of the plain
barcode computation: dimension 0 walks the codomain's columns-to-reduce
with births tracked in the domain order, dimension 1 walks the domain's
critical edges with dual births tracked in the codomain order.  Reverse
pairs (domain value >= codomain value) carry no interval but are kept for
the extended matching.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grid import CellId, CubicalGrid
from .oracle import check_comparable
from .persistence import Barcode


@dataclass(frozen=True)
class ImagePair:
    """One persistence pair of the induced map.

    The birth cell lives in the domain filtration (refined index
    ``birth_index`` there), the death cell in the codomain filtration.
    Forward pairs (``reverse=False``) give the interval
    [birth_value, death_value).
    """

    dim: int
    birth_value: float
    death_value: float
    birth_cell: CellId
    death_cell: CellId
    birth_index: int
    death_index: int
    reverse: bool


class ImageBarcode:
    """All persistence pairs of the induced map, by dimension."""

    def __init__(self, domain: CubicalGrid, codomain: CubicalGrid, d0, d1):
        self.domain = domain
        self.codomain = codomain
        self._d0 = d0  # (birth_flat, death_flat)
        self._d1 = d1
        self._cache: dict[int, tuple[ImagePair, ...]] = {}

    def pair_arrays(self, dim: int):
        return self._d0 if dim == 0 else self._d1

    def birth_orders(self, dim: int) -> np.ndarray:
        return self.domain.order_of_cell[self.pair_arrays(dim)[0]]

    def death_orders(self, dim: int) -> np.ndarray:
        return self.codomain.order_of_cell[self.pair_arrays(dim)[1]]

    def pairs(self, dim: int) -> tuple[ImagePair, ...]:
        if dim not in self._cache:
            b, d = self.pair_arrays(dim)
            dom, cod = self.domain, self.codomain
            out = []
            for bf, df in zip(b, d):
                bv = dom.value_of_flat(int(bf))
                dv = cod.value_of_flat(int(df))
                out.append(ImagePair(
                    dim=dim,
                    birth_value=bv,
                    death_value=dv,
                    birth_cell=dom.cell_id(int(bf)),
                    death_cell=cod.cell_id(int(df)),
                    birth_index=int(dom.order_of_cell[bf]),
                    death_index=int(cod.order_of_cell[df]),
                    reverse=bool(dom._values[bf] >= cod._values[df]),
                ))
            self._cache[dim] = tuple(out)
        return self._cache[dim]

    @property
    def dim0(self) -> tuple[ImagePair, ...]:
        return self.pairs(0)

    @property
    def dim1(self) -> tuple[ImagePair, ...]:
        return self.pairs(1)

    def forward_value_multiset(self):
        """Sorted (dim, birth, death) of the forward pairs, original units."""
        out = []
        for dim in (0, 1):
            b, d = self.pair_arrays(dim)
            for bf, df in zip(b, d):
                bi = float(self.domain._values[bf])
                di = float(self.codomain._values[df])
                if bi < di:
                    out.append((dim, self.domain.to_original(bi),
                                self.codomain.to_original(di)))
        return sorted(out)


def compute_image_barcode(domain: CubicalGrid, codomain: CubicalGrid,
                          domain_barcode: Barcode,
                          codomain_barcode: Barcode) -> ImageBarcode:
    """Image barcode of the inclusion of the domain into the codomain.

    ``domain_barcode`` supplies the critical edges, ``codomain_barcode`` the
    columns-to-reduce; both must have been computed from the given grids.
    Raises IncompatibleGrids / NotComparable when the grids do not nest.
    """
    check_comparable(domain, codomain)
    R, C = domain.lattice_shape
    d0 = _kernels.image_dim0_sweep(
        codomain_barcode.columns_flat, domain.order_of_cell,
        domain.cell_of_order, R, C,
    )
    d1 = _kernels.image_dim1_sweep(
        domain_barcode.critical_flat, codomain.order_of_cell,
        codomain.cell_of_order, R, C,
    )
    return ImageBarcode(domain, codomain, d0, d1)
