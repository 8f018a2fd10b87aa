"""Numba kernels for degree-1 Vietoris-Rips persistence.

Works on the coboundary side: only edge columns are reduced (cofacets are
triangles, generated on the fly from the distance matrix), which avoids
materializing the millions of triangles a point cloud of a few hundred
points produces.  Triangles are identified by a single int64 key
(filtration-value rank << SHIFT | packed vertex triple) so that key order
is exactly filtration order with lexicographic tie-breaking.
"""

from __future__ import annotations

import numba
import numpy as np
from numba import njit
from numba.core import types
from numba.typed import Dict, List


@njit(cache=True)
def _symdiff(a, b):
    out = np.empty(len(a) + len(b), dtype=np.int64)
    i = j = k = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        if a[i] < b[j]:
            out[k] = a[i]; i += 1; k += 1
        elif a[i] > b[j]:
            out[k] = b[j]; j += 1; k += 1
        else:
            i += 1; j += 1
    while i < na:
        out[k] = a[i]; i += 1; k += 1
    while j < nb:
        out[k] = b[j]; j += 1; k += 1
    return out[:k].copy()


@njit(cache=True, inline="always")
def _triangle_key(u, v, w, n, dm, vrank, shift):
    # filtration value = longest edge; rank ties resolved to the max rank so
    # equal-length edges share the triangle's filtration rank deterministically
    duv = dm[u, v]
    duw = dm[u, w]
    dvw = dm[v, w]
    f = duv
    r = vrank[u, v]
    if duw > f:
        f = duw
        r = vrank[u, w]
    elif duw == f and vrank[u, w] > r:
        r = vrank[u, w]
    if dvw > f:
        f = dvw
        r = vrank[v, w]
    elif dvw == f and vrank[v, w] > r:
        r = vrank[v, w]
    a, b, c = u, v, w
    if a > b:
        a, b = b, a
    if b > c:
        b, c = c, b
    if a > b:
        a, b = b, a
    packed = (a * n + b) * n + c
    return (np.int64(r) << shift) | np.int64(packed)


@njit(cache=True)
def _min_cofacet(u, v, n, adj, dm, vrank, shift):
    best = np.int64(-1)
    for w in range(n):
        if w == u or w == v:
            continue
        if adj[u, w] and adj[v, w]:
            key = _triangle_key(u, v, w, n, dm, vrank, shift)
            if best < 0 or key < best:
                best = key
    return best


@njit(cache=True)
def _cofacet_column(u, v, n, adj, dm, vrank, shift):
    buf = np.empty(n, dtype=np.int64)
    cnt = 0
    for w in range(n):
        if w == u or w == v:
            continue
        if adj[u, w] and adj[v, w]:
            buf[cnt] = _triangle_key(u, v, w, n, dm, vrank, shift)
            cnt += 1
    col = buf[:cnt].copy()
    col.sort()
    return col


@njit(cache=True)
def _reduce(n, adj, dm, eu, ev, vrank, shift):
    """Pair positive edges with killing triangles (or -1 if none).

    Edges arrive sorted by (length, u, v); columns are processed in reverse
    of that order.  Returns (edge_index, pivot_key) arrays where pivot_key
    == -1 marks a class that survives to the truncation scale.
    """
    m = len(eu)

    # union-find: edges that merge components are negative (tree) edges
    parent = np.arange(n, dtype=np.int64)
    positive = np.zeros(m, dtype=np.bool_)
    for idx in range(m):
        a = eu[idx]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = ev[idx]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a == b:
            positive[idx] = True
        elif a < b:
            parent[b] = a
        else:
            parent[a] = b

    pivot_owner = Dict.empty(types.int64, types.int64)
    cols = List()
    lazy_u = List.empty_list(types.int64)
    lazy_v = List.empty_list(types.int64)
    cols.append(np.empty(0, dtype=np.int64))
    lazy_u.append(np.int64(-1))
    lazy_v.append(np.int64(-1))

    birth_edges = List.empty_list(types.int64)
    death_keys = List.empty_list(types.int64)

    for idx in range(m - 1, -1, -1):
        if not positive[idx]:
            continue
        u = eu[idx]
        v = ev[idx]
        piv = _min_cofacet(u, v, n, adj, dm, vrank, shift)
        if piv < 0:
            birth_edges.append(np.int64(idx))
            death_keys.append(np.int64(-1))
            continue
        if piv not in pivot_owner:
            # column pairs untouched; keep it lazy (regenerated on demand)
            slot = np.int64(len(cols))
            pivot_owner[piv] = slot
            cols.append(np.empty(0, dtype=np.int64))
            lazy_u.append(np.int64(u))
            lazy_v.append(np.int64(v))
            birth_edges.append(np.int64(idx))
            death_keys.append(piv)
            continue
        col = _cofacet_column(u, v, n, adj, dm, vrank, shift)
        while True:
            if len(col) == 0:
                birth_edges.append(np.int64(idx))
                death_keys.append(np.int64(-1))
                break
            piv = col[0]
            if piv in pivot_owner:
                slot = pivot_owner[piv]
                other = cols[slot]
                if len(other) == 0:
                    other = _cofacet_column(lazy_u[slot], lazy_v[slot],
                                            n, adj, dm, vrank, shift)
                col = _symdiff(col, other)
            else:
                slot = np.int64(len(cols))
                pivot_owner[piv] = slot
                cols.append(col)
                lazy_u.append(np.int64(-1))
                lazy_v.append(np.int64(-1))
                birth_edges.append(np.int64(idx))
                death_keys.append(piv)
                break

    out_b = np.empty(len(birth_edges), dtype=np.int64)
    out_d = np.empty(len(death_keys), dtype=np.int64)
    for i in range(len(birth_edges)):
        out_b[i] = birth_edges[i]
        out_d[i] = death_keys[i]
    return out_b, out_d


def h1_pairs(dm: np.ndarray, max_scale: float) -> np.ndarray:
    """Degree-1 persistence pairs of the truncated Rips filtration.

    Zero-persistence pairs are dropped; classes alive at the truncation
    scale are capped there.  Returns an (n, 2) array sorted by (birth,
    death).
    """
    n = dm.shape[0]
    if n < 3:
        return np.empty((0, 2), dtype=np.float64)
    iu, ju = np.triu_indices(n, 1)
    lens = dm[iu, ju]
    keep = lens <= max_scale
    eu = iu[keep].astype(np.int64)
    ev = ju[keep].astype(np.int64)
    elen = lens[keep]
    if len(eu) == 0:
        return np.empty((0, 2), dtype=np.float64)

    order = np.lexsort((ev, eu, elen))
    eu, ev, elen = eu[order], ev[order], elen[order]
    uniq, inv = np.unique(elen, return_inverse=True)
    vrank = np.full((n, n), -1, dtype=np.int64)
    vrank[eu, ev] = inv
    vrank[ev, eu] = inv

    adj = dm <= max_scale
    np.fill_diagonal(adj, False)
    shift = np.int64(max(n * n * n - 1, 1).bit_length())

    births, deaths = _reduce(n, adj, dm, eu, ev, vrank, shift)
    if len(births) == 0:
        return np.empty((0, 2), dtype=np.float64)
    b = elen[births]
    d = np.where(deaths < 0, max_scale, uniq[np.maximum(deaths, 0) >> shift])
    keep = d > b
    pairs = np.column_stack([b[keep], d[keep]])
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return pairs[order]
