"""Cell preorders and partitions, the a-function and Duflo involutions.

The left preorder is generated by one-generator multiplications: for each
simple s and element x, every basis element in the canonical support of
H'_s H'_x sits above x.  Positivity of the structure constants makes
these generator edges generate the full preorder (the quadratic
definition is kept as a small-rank test, not as the algorithm).  Strongly
connected components are the cells; ids are numbered by their first
member in enumeration order.

The a-function is the exact double maximum max_{x,y} deg h_{x,y,z},
reduced per target over streamed products.  The opt-in fast mode
restricts (x, y) to the two-sided cell of z and re-checks itself against
the full mode on rank <= 3.

>>> from cellkit import create_system
>>> from cellkit.hecke import KLTable
>>> W = create_system("A", 2)
>>> dec = compute_cells(KLTable(W))
>>> [sorted(w.word for w in cell) for cell in left_cells(dec)]
[['e'], ['1', '21'], ['12', '2'], ['121']]
>>> a_value(dec, W.element("121"))
3
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, List, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from cellkit.coxeter import Element
from cellkit.hecke import KLTable, sweep

__all__ = [
    "CellDecomposition",
    "compute_cells",
    "leq_L",
    "leq_R",
    "leq_J",
    "a_value",
    "a_values",
    "is_duflo",
    "duflo_elements",
    "duflo_of_left_cell",
    "stabilizer",
    "h_cell_max",
    "left_cells",
    "right_cells",
    "twosided_cells",
    "h_cells",
]


def _renumber(labels: np.ndarray) -> np.ndarray:
    """Renumber component labels so ids follow the first member's index."""
    first = {}
    for i, lab in enumerate(labels):
        first.setdefault(int(lab), i)
    order = sorted(first, key=first.get)
    remap = {lab: new for new, lab in enumerate(order)}
    return np.array([remap[int(lab)] for lab in labels], dtype=np.int32)


def _members(labels: np.ndarray) -> List[List[int]]:
    out: List[List[int]] = [[] for _ in range(int(labels.max()) + 1)]
    for i, lab in enumerate(labels):
        out[int(lab)].append(i)
    return out


def _cell_closure(labels: np.ndarray, edges) -> np.ndarray:
    """Transitive closure of the condensation DAG, as a boolean matrix."""
    nc = int(labels.max()) + 1
    r = np.eye(nc, dtype=bool)
    for a, b in edges:
        r[labels[a], labels[b]] = True
    while True:
        nxt = (r.astype(np.uint8) @ r.astype(np.uint8) > 0) | r
        if np.array_equal(nxt, r):
            return r
        r = nxt


class CellDecomposition:
    """Immutable cell data for one system; built by :func:`compute_cells`."""

    def __init__(self, table: KLTable):
        self.table = table
        self.system = table.system
        system = self.system
        n = system.size
        lengths = system.lengths
        mu_col = table._mu_col

        left_edges = []
        right_edges = []
        for x in range(n):
            lt: set = set()
            rt: set = set()
            rows, _ = mu_col(x)
            for j in range(system.rank):
                sx = int(system.left_mult[x, j])
                if lengths[sx] > lengths[x]:
                    lt.add(sx)
                    lt.update(
                        int(z) for z in rows
                        if lengths[system.left_mult[z, j]] < lengths[z]
                    )
                xs = int(system.right_mult[x, j])
                if lengths[xs] > lengths[x]:
                    rt.add(xs)
                    rt.update(
                        int(z) for z in rows
                        if lengths[system.right_mult[z, j]] < lengths[z]
                    )
            lt.discard(x)
            rt.discard(x)
            left_edges.append(sorted(lt))
            right_edges.append(sorted(rt))
        self.adjacency = {"left": left_edges, "right": right_edges}

        def scc(adj_lists, extra=None):
            src, dst = [], []
            for x, targets in enumerate(adj_lists):
                src.extend([x] * len(targets))
                dst.extend(targets)
            if extra is not None:
                for x, targets in enumerate(extra):
                    src.extend([x] * len(targets))
                    dst.extend(targets)
            g = sp.csr_matrix(
                (np.ones(len(src), dtype=np.int8), (src, dst)), shape=(n, n)
            )
            _, labels = csgraph.connected_components(
                g, directed=True, connection="strong"
            )
            return _renumber(labels)

        self.left_id = scc(left_edges)
        self.right_id = scc(right_edges)
        self.twosided_id = scc(left_edges, right_edges)

        pair_ids = {}
        h = np.empty(n, dtype=np.int32)
        for i in range(n):
            key = (int(self.left_id[i]), int(self.right_id[i]))
            h[i] = pair_ids.setdefault(key, len(pair_ids))
        self.h_id = _renumber(h)

        self._left_members = _members(self.left_id)
        self._right_members = _members(self.right_id)
        self._two_members = _members(self.twosided_id)
        self._h_members = _members(self.h_id)

        def edge_pairs(adj_lists):
            return ((x, t) for x, targets in enumerate(adj_lists) for t in targets)

        self._left_reach = _cell_closure(self.left_id, edge_pairs(left_edges))
        self._right_reach = _cell_closure(self.right_id, edge_pairs(right_edges))
        self._two_reach = _cell_closure(
            self.twosided_id,
            list(edge_pairs(left_edges)) + list(edge_pairs(right_edges)),
        )

        self._a: Optional[np.ndarray] = None
        self._a_cell_cache: dict = {}
        self._duflo: Optional[np.ndarray] = None
        self._lock = threading.RLock()

    # ------------------------------------------------------------ cell views

    def members(self, kind: str, cell_id: int) -> List[Element]:
        table = {
            "left": self._left_members,
            "right": self._right_members,
            "twosided": self._two_members,
            "h": self._h_members,
        }[kind]
        return [self.system.from_index(i) for i in table[cell_id]]

    def cell_counts(self) -> dict:
        return {
            "left": len(self._left_members),
            "right": len(self._right_members),
            "twosided": len(self._two_members),
            "h": len(self._h_members),
        }

    # ------------------------------------------------------------ a-function

    def _reduce_sweep_max_deg(
        self, tensor: np.ndarray, w_rows=None, targets=None
    ) -> np.ndarray:
        """Per-target max degree over the given product rows; -1 if absent."""
        L = self.table.w0_length
        t = tensor if w_rows is None else tensor[w_rows]
        hit = np.logical_or.reduce(t != 0, axis=0)
        if targets is not None:
            hit = hit[targets]
        any_hit = hit.any(axis=1)
        top = hit.shape[1] - 1 - np.argmax(hit[:, ::-1], axis=1)
        deg = np.where(any_hit, top - L, -1)
        return deg.astype(np.int64)

    def _compute_a_full(self, threads: int = 1, progress=None) -> np.ndarray:
        n = self.system.size
        indices = list(range(n))

        def chunk_job(chunk):
            buf = None
            acc = np.full(n, -1, dtype=np.int64)
            for x in chunk:
                buf = sweep(self.table, x, out=buf)
                np.maximum(acc, self._reduce_sweep_max_deg(buf), out=acc)
                if progress is not None:
                    progress(f"a-scan {self.system.cartan_type}{self.system.rank}: "
                             f"swept {self.system._word_strs[x]}")
            return acc

        if threads <= 1:
            acc = chunk_job(indices)
        else:
            chunks = [indices[i::threads] for i in range(threads)]
            acc = np.full(n, -1, dtype=np.int64)
            with ThreadPoolExecutor(max_workers=threads) as pool:
                for part in pool.map(chunk_job, chunks):
                    np.maximum(acc, part, out=acc)
        if acc.min() < 0:
            raise RuntimeError("a-function scan missed a target element")
        return acc

    def _compute_a_cell(self, cell_id: int) -> dict:
        rows = self._two_members[cell_id]
        targets = np.array(rows)
        acc = np.full(len(rows), -1, dtype=np.int64)
        buf = None
        for x in rows:
            buf = sweep(self.table, x, out=buf)
            np.maximum(
                acc, self._reduce_sweep_max_deg(buf, w_rows=targets, targets=targets),
                out=acc,
            )
        if acc.min() < 0:
            raise RuntimeError("cell-restricted a-scan missed a target element")
        return {int(z): int(v) for z, v in zip(rows, acc)}

    def install_a_values(self, values: np.ndarray):
        """Adopt a-values computed elsewhere by the same full reduction."""
        with self._lock:
            if self._a is None:
                self._a = np.asarray(values, dtype=np.int64)

    def ensure_a_values(self, threads: int = 1, progress=None) -> np.ndarray:
        with self._lock:
            if self._a is None:
                self._a = self._compute_a_full(threads=threads, progress=progress)
            return self._a

    # ---------------------------------------------------------------- duflo

    def duflo_mask(self) -> np.ndarray:
        with self._lock:
            if self._duflo is None:
                a = self.ensure_a_values()
                pe = self.table.p_array()[0]
                if not pe.any(axis=1).all():
                    raise RuntimeError("p(e, w) vanished unexpectedly")
                min_exp = np.argmax(pe != 0, axis=1)
                mask = min_exp == a
                if not np.array_equal(pe[mask, min_exp[mask]],
                                      np.ones(int(mask.sum()), dtype=pe.dtype)):
                    raise RuntimeError("Duflo criterion: leading coefficient is not 1")
                for cell in self._left_members:
                    if int(mask[cell].sum()) != 1:
                        raise RuntimeError("left cell without unique Duflo element")
                self._duflo = mask
            return self._duflo


def compute_cells(table: KLTable) -> CellDecomposition:
    """Partition the group into left/right/two-sided/H cells."""
    return CellDecomposition(table)


def _check(dec: CellDecomposition, *elts: Element):
    for w in elts:
        if w.system is not dec.system:
            raise ValueError("element does not belong to this decomposition")


def leq_L(dec: CellDecomposition, x: Element, y: Element) -> bool:
    """x <=_L y (identity lowest, longest element highest)."""
    _check(dec, x, y)
    return bool(dec._left_reach[dec.left_id[x.index], dec.left_id[y.index]])


def leq_R(dec: CellDecomposition, x: Element, y: Element) -> bool:
    _check(dec, x, y)
    return bool(dec._right_reach[dec.right_id[x.index], dec.right_id[y.index]])


def leq_J(dec: CellDecomposition, x: Element, y: Element) -> bool:
    _check(dec, x, y)
    return bool(dec._two_reach[dec.twosided_id[x.index], dec.twosided_id[y.index]])


def a_values(
    dec: CellDecomposition, *, threads: int = 1, progress=None
) -> np.ndarray:
    """All a-values by the full streamed double maximum (cached)."""
    return dec.ensure_a_values(threads=threads, progress=progress)


def a_value(dec: CellDecomposition, z: Element, *, fast: bool = False) -> int:
    """max_{x,y} deg h_{x,y,z}.

    fast=True restricts (x, y) to the two-sided cell of z; on rank <= 3
    the result is re-checked against the unrestricted scan.
    """
    _check(dec, z)
    if not fast:
        return int(dec.ensure_a_values()[z.index])
    cid = int(dec.twosided_id[z.index])
    with dec._lock:
        cached = dec._a_cell_cache.get(cid)
    if cached is None:
        cached = dec._compute_a_cell(cid)
        with dec._lock:
            dec._a_cell_cache.setdefault(cid, cached)
    result = cached[z.index]
    if dec.system.rank <= 3:
        full = int(dec.ensure_a_values()[z.index])
        if result != full:
            raise RuntimeError(
                f"fast a-mode disagrees with full scan at {z.word}: "
                f"{result} != {full}"
            )
    return result


def is_duflo(dec: CellDecomposition, w: Element) -> bool:
    """Minimal exponent of p(e,w) equals a(w) (with coefficient 1)."""
    _check(dec, w)
    return bool(dec.duflo_mask()[w.index])


def duflo_elements(dec: CellDecomposition) -> List[Element]:
    mask = dec.duflo_mask()
    return [dec.system.from_index(int(i)) for i in np.nonzero(mask)[0]]


def duflo_of_left_cell(dec: CellDecomposition, cell_id: int) -> Element:
    mask = dec.duflo_mask()
    for i in dec._left_members[cell_id]:
        if mask[i]:
            return dec.system.from_index(i)
    raise RuntimeError("left cell without Duflo element")


def stabilizer(dec: CellDecomposition, gammas, y: Element) -> List[Element]:
    """Support of t_y t_{y^{-1}}: the stabilizing subset of the diagonal
    H-cell attached to y's row (sorted)."""
    _check(dec, y)
    inv = dec.system.from_index(int(dec.system.inverse_index[y.index]))
    return sorted(gammas.t_product(y, inv))


def h_cell_max(dec: CellDecomposition, y: Element) -> bool:
    """Is |H-cell of y| maximal among H-cells of its two-sided cell?"""
    _check(dec, y)
    size = len(dec._h_members[dec.h_id[y.index]])
    two = dec.twosided_id[y.index]
    best = max(
        len(members)
        for hid, members in enumerate(dec._h_members)
        if dec.twosided_id[members[0]] == two
    )
    return size == best


def left_cells(dec: CellDecomposition) -> List[List[Element]]:
    return [ [dec.system.from_index(i) for i in cell] for cell in dec._left_members ]


def right_cells(dec: CellDecomposition) -> List[List[Element]]:
    return [ [dec.system.from_index(i) for i in cell] for cell in dec._right_members ]


def twosided_cells(dec: CellDecomposition) -> List[List[Element]]:
    return [ [dec.system.from_index(i) for i in cell] for cell in dec._two_members ]


def h_cells(dec: CellDecomposition) -> List[List[Element]]:
    return [ [dec.system.from_index(i) for i in cell] for cell in dec._h_members ]


if __name__ == "__main__":
    import doctest

    doctest.testmod()
