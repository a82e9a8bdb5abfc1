"""Top-degree structure constants and the asymptotic t-basis ring.

Each product column h_{x,y,.} is degree-bounded by the a-function of the
target; gamma_{x,y,z} picks out the coefficient exactly at that bound:

    t_x t_y = sum_z gamma(x, y, z^{-1}) t_z,
    gamma(x, y, z) = [v^{a(z)}] h_{x,y,z^{-1}}.

The ring splits into blocks indexed by two-sided cells; each t_x acts as
zero outside the block of x, and the Duflo element of a right cell is a
left identity on it.

>>> from cellkit import create_system
>>> from cellkit.hecke import KLTable
>>> from cellkit.cells import compute_cells
>>> W = create_system("G", 2)
>>> g = GammaTable(compute_cells(KLTable(W)))
>>> {z.word: c for z, c in sorted(t_multiply(g, W.element("12"), W.element("21")).items())}
{'1': 1, '121': 1}
>>> gamma(g, W.element("12"), W.element("21"), W.element("1"))
1
"""

from __future__ import annotations

import threading
from typing import Dict

import numpy as np

from cellkit.coxeter import Element
from cellkit.cells import CellDecomposition, a_values
from cellkit.hecke import sweep

__all__ = ["GammaTable", "gamma", "t_multiply"]


class GammaTable:
    """Lazy store of t-basis structure constants for one decomposition.

    A first query with left factor x runs the streamed product pass for x
    once and keeps every nonzero column top coefficient; later queries
    with the same left factor are lookups.  Individually precomputed
    products can be installed with :meth:`seed` to skip the pass.
    """

    def __init__(self, decomposition: CellDecomposition):
        self.cells = decomposition
        self.table = decomposition.table
        self.system = decomposition.system
        self._pairs: Dict[tuple, Dict[int, int]] = {}
        self._full_rows: set = set()
        self._buf = None
        self._lock = threading.RLock()

    def seed(self, x_index: int, y_index: int, column: Dict[int, int]):
        """Install one precomputed product column {z_index: coefficient}."""
        with self._lock:
            self._pairs[(x_index, y_index)] = dict(column)

    def _sweep_row(self, xi: int):
        n = self.system.size
        a = a_values(self.cells)
        with self._lock:
            self._buf = sweep(self.table, xi, out=self._buf)
            tops = self._buf[:, np.arange(n), self.table.w0_length + a]
            for yi, zi in zip(*np.nonzero(tops)):
                key = (xi, int(yi))
                self._pairs.setdefault(key, {})[int(zi)] = int(tops[yi, zi])
            self._full_rows.add(xi)

    def product_column(self, x_index: int, y_index: int) -> Dict[int, int]:
        """{z_index: coefficient of t_z in t_x t_y}, possibly empty."""
        key = (x_index, y_index)
        with self._lock:
            if key in self._pairs:
                return dict(self._pairs[key])
            if x_index in self._full_rows:
                return {}
        self._sweep_row(x_index)
        with self._lock:
            return dict(self._pairs.get(key, {}))

    def t_product(self, x: Element, y: Element) -> Dict[Element, int]:
        col = self.product_column(x.index, y.index)
        return {self.system.from_index(z): c for z, c in col.items()}


def _check(g: GammaTable, *elts: Element):
    for w in elts:
        if w.system is not g.system:
            raise ValueError("element does not belong to this table")


def gamma(g: GammaTable, x: Element, y: Element, z: Element) -> int:
    """Top coefficient [v^{a(z)}] of the product column at z^{-1}.

    Equivalently the coefficient of t_{z^{-1}} in t_x t_y; zero whenever
    the column degree stays below the bound.
    """
    _check(g, x, y, z)
    zi_inv = int(g.system.inverse_index[z.index])
    return g.product_column(x.index, y.index).get(zi_inv, 0)


def t_multiply(g: GammaTable, x: Element, y: Element) -> Dict[Element, int]:
    """t_x t_y expanded in the t-basis as {z: coefficient}."""
    _check(g, x, y)
    return g.t_product(x, y)


if __name__ == "__main__":
    import doctest

    doctest.testmod()
