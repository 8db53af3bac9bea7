"""Union-find sweep kernels behind the persistence computations.

Each kernel works on flat cell ids and refined indices only, so it can be
compiled by numba.  When numba is unavailable the same code runs as plain
Python (correct, much slower).  Dual vertices are the squares, numbered by
their square-local index, plus one extra OUTSIDE vertex for the unbounded
face; its birth is a sentinel larger than every refined index.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True, nogil=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True, nogil=True)
def _dual_ends(e, R, C, hb, vb, F):
    if e < vb:  # horizontal edge
        k = e - hb
        r = k // (C - 1)
        c = k % (C - 1)
        a = (r - 1) * (C - 1) + c if r >= 1 else F
        b = r * (C - 1) + c if r <= R - 2 else F
    else:  # vertical edge
        k = e - vb
        r = k // C
        c = k % C
        a = r * (C - 1) + (c - 1) if c >= 1 else F
        b = r * (C - 1) + c if c <= C - 2 else F
    return a, b


@njit(cache=True, nogil=True)
def _edge_vertices(e, C, hb, vb):
    if e < vb:
        k = e - hb
        r = k // (C - 1)
        c = k % (C - 1)
        return r * C + c, r * C + c + 1
    k = e - vb
    return k, k + C


@njit(cache=True, nogil=True)
def barcode_sweeps(edges_inc, order_of_cell, cell_of_order, values, R, C):
    """Both persistence sweeps of one grid.

    The dual sweep walks the edges in decreasing refined order, merging the
    squares (plus OUTSIDE) they coface: a merge is a critical edge and, at
    positive persistence, a dimension-1 interval whose death square is the
    youngest merging class; an already-connected edge is queued as a
    column-to-reduce.  The primal sweep then walks only those queued edges
    in increasing order, merging endpoint vertices; each merge kills the
    younger vertex class, giving a dimension-0 interval at positive
    persistence.  Surviving vertex classes are the essential components.

    Returns (cols_inc, crit_desc, d1_birth, d1_death, d0_birth, d0_death,
    ess0) where pair arrays hold flat cell ids and ess0 holds the flat
    birth vertices of surviving classes in refined order.
    """
    V = R * C
    EH = R * (C - 1)
    F = (R - 1) * (C - 1)
    hb = V
    vb = V + EH
    sb = V + EH + (R - 1) * C
    E = edges_inc.shape[0]
    BIG = np.int64(order_of_cell.shape[0])

    parent = np.arange(F + 1)
    birth = np.empty(F + 1, np.int64)
    for s in range(F):
        birth[s] = order_of_cell[sb + s]
    birth[F] = BIG

    cols = np.empty(E, np.int64)
    crit = np.empty(E, np.int64)
    d1_birth = np.empty(E, np.int64)
    d1_death = np.empty(E, np.int64)
    ncols = 0
    ncrit = 0
    n1 = 0
    for i in range(E - 1, -1, -1):
        e = edges_inc[i]
        a, b = _dual_ends(e, R, C, hb, vb, F)
        x = _find(parent, a)
        y = _find(parent, b)
        if x == y:
            cols[ncols] = e
            ncols += 1
            continue
        bx = birth[x]
        by = birth[y]
        if bx < by:
            bmin, bmax = bx, by
        else:
            bmin, bmax = by, bx
        crit[ncrit] = e
        ncrit += 1
        dsq = cell_of_order[bmin]
        if values[e] != values[dsq]:
            d1_birth[n1] = e
            d1_death[n1] = dsq
            n1 += 1
        parent[x] = y
        birth[y] = bmax

    cols_inc = cols[:ncols][::-1].copy()

    parent0 = np.arange(V)
    birth0 = order_of_cell[:V].copy()
    d0_birth = np.empty(ncols, np.int64)
    d0_death = np.empty(ncols, np.int64)
    n0 = 0
    for i in range(ncols):
        e = cols_inc[i]
        u, w = _edge_vertices(e, C, hb, vb)
        x = _find(parent0, u)
        y = _find(parent0, w)
        if x == y:
            continue
        bx = birth0[x]
        by = birth0[y]
        if bx < by:
            bmin, bmax = bx, by
        else:
            bmin, bmax = by, bx
        bv = cell_of_order[bmax]
        if values[e] != values[bv]:
            d0_birth[n0] = bv
            d0_death[n0] = e
            n0 += 1
        parent0[x] = y
        birth0[y] = bmin

    ess0 = np.empty(V, np.int64)
    ness = 0
    for v in range(V):
        if _find(parent0, v) == v:
            ess0[ness] = cell_of_order[birth0[v]]
            ness += 1

    return (cols_inc, crit[:ncrit].copy(),
            d1_birth[:n1].copy(), d1_death[:n1].copy(),
            d0_birth[:n0].copy(), d0_death[:n0].copy(),
            ess0[:ness].copy())


@njit(cache=True, nogil=True)
def image_dim0_sweep(cols_inc, dom_order, dom_cell_of_order, R, C):
    """Dimension-0 image persistence pairs.

    Walks the codomain's columns-to-reduce in codomain order while tracking
    class births by domain refined index; every merge yields a pair
    (domain birth vertex, codomain death edge), reverse pairs included.
    """
    V = R * C
    hb = V
    vb = V + R * (C - 1)
    n = cols_inc.shape[0]
    parent = np.arange(V)
    birth = dom_order[:V].copy()
    p_birth = np.empty(n, np.int64)
    p_death = np.empty(n, np.int64)
    k = 0
    for i in range(n):
        e = cols_inc[i]
        u, w = _edge_vertices(e, C, hb, vb)
        x = _find(parent, u)
        y = _find(parent, w)
        if x == y:
            continue
        bx = birth[x]
        by = birth[y]
        if bx < by:
            bmin, bmax = bx, by
        else:
            bmin, bmax = by, bx
        p_birth[k] = dom_cell_of_order[bmax]
        p_death[k] = e
        k += 1
        parent[x] = y
        birth[y] = bmin
    return p_birth[:k].copy(), p_death[:k].copy()


@njit(cache=True, nogil=True)
def image_dim1_sweep(crit_desc, cod_order, cod_cell_of_order, R, C):
    """Dimension-1 image persistence pairs.

    Walks the domain's critical edges in domain order while tracking dual
    class births by codomain refined index; every merge yields a pair
    (domain birth edge, codomain death square), reverse pairs included.
    """
    V = R * C
    EH = R * (C - 1)
    F = (R - 1) * (C - 1)
    hb = V
    vb = V + EH
    sb = V + EH + (R - 1) * C
    BIG = np.int64(cod_order.shape[0])
    n = crit_desc.shape[0]
    parent = np.arange(F + 1)
    birth = np.empty(F + 1, np.int64)
    for s in range(F):
        birth[s] = cod_order[sb + s]
    birth[F] = BIG
    p_birth = np.empty(n, np.int64)
    p_death = np.empty(n, np.int64)
    k = 0
    for i in range(n):
        e = crit_desc[i]
        a, b = _dual_ends(e, R, C, hb, vb, F)
        x = _find(parent, a)
        y = _find(parent, b)
        if x == y:
            continue
        bx = birth[x]
        by = birth[y]
        if bx < by:
            bmin, bmax = bx, by
        else:
            bmin, bmax = by, bx
        p_birth[k] = e
        p_death[k] = cod_cell_of_order[bmin]
        k += 1
        parent[x] = y
        birth[y] = bmax
    return p_birth[:k].copy(), p_death[:k].copy()
