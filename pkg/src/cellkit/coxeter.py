"""Finite Weyl groups of types A, B/C, D and G2 as concrete permutation models.

Elements are stored as tuples describing a faithful action: plain
permutations of the points 0..n for type A, signed permutations for types
B/C and D (entry i is the image of i+1, negatives mark sign flips), and
the action on the six vertices of a hexagon for G2.  A system enumerates
its group once, breadth first, and keeps index tables for multiplication,
inversion and descent queries; everything downstream works with dense
integer indices into that enumeration.

The enumeration order is a public contract: elements are sorted by
(length, ShortLex word), where the ShortLex word repeatedly peels off the
smallest left descent.  The identity prints as "e".

>>> W = create_system("A", 2)
>>> [w.word for w in W.elements()]
['e', '1', '2', '12', '21', '121']
>>> longest_element(W).word
'121'
>>> bruhat_leq(W.element("1"), W.element("21"))
True
>>> left_descents(W.element("121"))
('1', '2')
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

__all__ = [
    "CoxeterSystem",
    "Element",
    "create_system",
    "multiply",
    "inverse",
    "length",
    "left_descents",
    "right_descents",
    "longest_element",
    "bruhat_leq",
]

Tuple_ = tuple  # element encodings are plain tuples of ints


def _plain_compose(a: tuple, b: tuple) -> tuple:
    return tuple(a[i] for i in b)


def _plain_invert(a: tuple) -> tuple:
    out = [0] * len(a)
    for i, v in enumerate(a):
        out[v] = i
    return tuple(out)


def _signed_compose(a: tuple, b: tuple) -> tuple:
    return tuple(a[v - 1] if v > 0 else -a[-v - 1] for v in b)


def _signed_invert(a: tuple) -> tuple:
    out = [0] * len(a)
    for i, v in enumerate(a, start=1):
        if v > 0:
            out[v - 1] = i
        else:
            out[-v - 1] = -i
    return tuple(out)


def _model(cartan_type: str, rank: int):
    """Simple reflections, identity, compose and invert for one type."""
    if cartan_type == "A":
        n = rank + 1
        identity = tuple(range(n))
        gens = []
        for i in range(rank):
            t = list(identity)
            t[i], t[i + 1] = t[i + 1], t[i]
            gens.append(tuple(t))
        return gens, identity, _plain_compose, _plain_invert
    if cartan_type in ("B", "C"):
        n = rank
        identity = tuple(range(1, n + 1))
        gens = []
        for i in range(n - 1):
            t = list(identity)
            t[i], t[i + 1] = t[i + 1], t[i]
            gens.append(tuple(t))
        t = list(identity)
        t[n - 1] = -n
        gens.append(tuple(t))
        return gens, identity, _signed_compose, _signed_invert
    if cartan_type == "D":
        n = rank
        identity = tuple(range(1, n + 1))
        gens = []
        for i in range(n - 1):
            t = list(identity)
            t[i], t[i + 1] = t[i + 1], t[i]
            gens.append(tuple(t))
        t = list(identity)
        t[n - 2], t[n - 1] = -n, -(n - 1)
        gens.append(tuple(t))
        return gens, identity, _signed_compose, _signed_invert
    if cartan_type == "G":
        identity = tuple(range(6))
        s1 = tuple((-i) % 6 for i in range(6))
        s2 = tuple((1 - i) % 6 for i in range(6))
        return [s1, s2], identity, _plain_compose, _plain_invert
    raise ValueError(f"unsupported Cartan type {cartan_type!r}")


def _coxeter_matrix(cartan_type: str, rank: int) -> tuple:
    m = [[2] * rank for _ in range(rank)]
    for i in range(rank):
        m[i][i] = 1
    if cartan_type == "A":
        for i in range(rank - 1):
            m[i][i + 1] = m[i + 1][i] = 3
    elif cartan_type in ("B", "C"):
        for i in range(rank - 2):
            m[i][i + 1] = m[i + 1][i] = 3
        m[rank - 2][rank - 1] = m[rank - 1][rank - 2] = 4
    elif cartan_type == "D":
        for i in range(rank - 2):
            m[i][i + 1] = m[i + 1][i] = 3
        m[rank - 3][rank - 1] = m[rank - 1][rank - 3] = 3
    elif cartan_type == "G":
        m[0][1] = m[1][0] = 6
    return tuple(tuple(row) for row in m)


_MIN_RANK = {"A": 1, "B": 2, "C": 2, "D": 3, "G": 2}
_MAX_G_RANK = 2


@dataclass(frozen=True)
class Element:
    """One group element, identified by its index in the enumeration order."""

    system: "CoxeterSystem"
    index: int

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Element)
            and self.system is other.system
            and self.index == other.index
        )

    def __hash__(self) -> int:
        return hash((id(self.system), self.index))

    def __lt__(self, other: "Element") -> bool:
        if self.system is not other.system:
            raise ValueError("cannot compare elements of different systems")
        return self.index < other.index

    @property
    def word(self) -> str:
        """ShortLex normal form as a string; the identity is "e"."""
        return self.system._word_strs[self.index]

    @property
    def word_tuple(self) -> tuple:
        return self.system._words[self.index]

    @property
    def canonical(self) -> tuple:
        """The faithful encoding (a permutation or signed permutation tuple)."""
        return self.system._tuples[self.index]

    @property
    def length(self) -> int:
        return int(self.system.lengths[self.index])

    def __repr__(self) -> str:
        return f"<{self.system.cartan_type}{self.system.rank} {self.word}>"


class CoxeterSystem:
    """A finite Weyl group with its enumeration and index tables.

    Use :func:`create_system`; the constructor does the one-off BFS over
    the faithful model and freezes the (length, ShortLex) enumeration.
    """

    def __init__(self, cartan_type: str, rank: int):
        cartan_type = cartan_type.upper()
        if cartan_type not in _MIN_RANK:
            raise ValueError(
                f"unsupported Cartan type {cartan_type!r}; expected A, B, C, D or G"
            )
        if rank < _MIN_RANK[cartan_type]:
            raise ValueError(
                f"type {cartan_type} needs rank >= {_MIN_RANK[cartan_type]}, got {rank}"
            )
        if cartan_type == "G" and rank != _MAX_G_RANK:
            raise ValueError("type G is only supported at rank 2")
        self.cartan_type = cartan_type
        self.rank = rank
        self.coxeter_matrix = _coxeter_matrix(cartan_type, rank)
        gens, identity, compose, invert = _model(cartan_type, rank)
        self._compose = compose
        self._invert = invert

        lengths = {identity: 0}
        frontier = [identity]
        while frontier:
            nxt = []
            for t in frontier:
                for g in gens:
                    u = compose(t, g)
                    if u not in lengths:
                        lengths[u] = lengths[t] + 1
                        nxt.append(u)
            frontier = nxt

        def shortlex(t: tuple) -> tuple:
            out = []
            while lengths[t] > 0:
                for j, g in enumerate(gens):
                    u = compose(g, t)
                    if lengths[u] < lengths[t]:
                        out.append(j + 1)
                        t = u
                        break
            return tuple(out)

        words = {t: shortlex(t) for t in lengths}
        order = sorted(lengths, key=lambda t: (lengths[t], words[t]))
        self.size = len(order)
        self._tuples = order
        self._index = {t: i for i, t in enumerate(order)}
        self._words = [words[t] for t in order]
        self._word_strs = [self._format_word(w) for w in self._words]
        self.lengths = np.array([lengths[t] for t in order], dtype=np.int32)

        n, r = self.size, rank
        self.left_mult = np.empty((n, r), dtype=np.int32)
        self.right_mult = np.empty((n, r), dtype=np.int32)
        self.inverse_index = np.empty(n, dtype=np.int32)
        for i, t in enumerate(order):
            self.inverse_index[i] = self._index[invert(t)]
            for j, g in enumerate(gens):
                self.left_mult[i, j] = self._index[compose(g, t)]
                self.right_mult[i, j] = self._index[compose(t, g)]

        self._elements = [Element(self, i) for i in range(n)]
        self._bruhat_memo: dict = {}

    def _format_word(self, word: tuple) -> str:
        if not word:
            return "e"
        if self.rank <= 9:
            return "".join(str(s) for s in word)
        return ".".join(str(s) for s in word)

    def elements(self) -> list:
        """All elements sorted by (length, ShortLex word)."""
        return list(self._elements)

    def from_index(self, index: int) -> Element:
        return self._elements[index]

    @property
    def identity(self) -> Element:
        return self._elements[0]

    @property
    def simple_labels(self) -> tuple:
        return tuple(str(i) for i in range(1, self.rank + 1))

    def generator(self, label: str) -> Element:
        i = self._label_number(label)
        return self._elements[self.left_mult[0, i - 1]]

    def _label_number(self, label: str) -> int:
        try:
            i = int(label)
        except ValueError:
            i = 0
        if not 1 <= i <= self.rank:
            raise ValueError(
                f"invalid generator {label!r} for type {self.cartan_type}{self.rank}"
            )
        return i

    def element(self, word: str) -> Element:
        """Parse a word in generator labels; "e" is the identity.

        The parse is strict: any token outside 1..rank raises a ValueError
        naming the offending position.  Words need not be reduced.
        """
        if word == "e" or word == "":
            return self.identity
        tokens = word.split(".") if "." in word else list(word)
        idx = 0
        for pos, tok in enumerate(tokens, start=1):
            try:
                i = int(tok)
                ok = 1 <= i <= self.rank
            except ValueError:
                ok = False
            if not ok:
                raise ValueError(
                    f"invalid generator {tok!r} at position {pos} "
                    f"for type {self.cartan_type}{self.rank}"
                )
            idx = int(self.right_mult[idx, i - 1])
        return self._elements[idx]

    def __repr__(self) -> str:
        return f"CoxeterSystem({self.cartan_type!r}, {self.rank}, size={self.size})"


def create_system(cartan_type: str, rank: int) -> CoxeterSystem:
    """Build the Weyl group of the given type and rank.

    B and C are accepted as distinct labels for the same system; the label
    is recorded and echoed in outputs.
    """
    return CoxeterSystem(cartan_type, rank)


def _same_system(x: Element, y: Element) -> CoxeterSystem:
    if x.system is not y.system:
        raise ValueError("elements belong to different systems")
    return x.system

def multiply(x: Element, y: Element) -> Element:
    """Group product x*y (functions composed left to right on words)."""
    sys = _same_system(x, y)
    t = sys._compose(sys._tuples[x.index], sys._tuples[y.index])
    return sys._elements[sys._index[t]]


def inverse(w: Element) -> Element:
    return w.system._elements[w.system.inverse_index[w.index]]


def length(w: Element) -> int:
    return int(w.system.lengths[w.index])


def left_descents(w: Element) -> tuple:
    """Labels s with l(s*w) < l(w), ascending."""
    sys = w.system
    lw = sys.lengths[w.index]
    return tuple(
        str(j + 1)
        for j in range(sys.rank)
        if sys.lengths[sys.left_mult[w.index, j]] < lw
    )


def right_descents(w: Element) -> tuple:
    """Labels s with l(w*s) < l(w), ascending."""
    sys = w.system
    lw = sys.lengths[w.index]
    return tuple(
        str(j + 1)
        for j in range(sys.rank)
        if sys.lengths[sys.right_mult[w.index, j]] < lw
    )


def longest_element(system: CoxeterSystem, subset: Optional[Iterable[str]] = None) -> Element:
    """Longest element of the standard parabolic subgroup on `subset` labels.

    With subset None the whole label set is used.  Greedy ascent: repeatedly
    right-multiply by any subset generator that increases length.
    """
    if subset is None:
        cols = list(range(system.rank))
    else:
        cols = sorted({system._label_number(s) - 1 for s in subset})
    idx = 0
    changed = True
    while changed:
        changed = False
        for j in cols:
            nxt = int(system.right_mult[idx, j])
            if system.lengths[nxt] > system.lengths[idx]:
                idx = nxt
                changed = True
    return system._elements[idx]


def bruhat_leq(y: Element, w: Element) -> bool:
    """Bruhat order test y <= w, by descent recursion with memoisation."""
    sys = _same_system(y, w)
    memo = sys._bruhat_memo
    lengths = sys.lengths
    left = sys.left_mult

    def rec(yi: int, wi: int) -> bool:
        if yi == wi:
            return True
        if lengths[yi] >= lengths[wi]:
            return False
        key = (yi, wi)
        cached = memo.get(key)
        if cached is not None:
            return cached
        lw = lengths[wi]
        s = 0
        while lengths[left[wi, s]] >= lw:
            s += 1
        swi = int(left[wi, s])
        syi = int(left[yi, s])
        if lengths[syi] < lengths[yi]:
            result = rec(syi, swi)
        else:
            result = rec(yi, swi)
        memo[key] = result
        return result

    return rec(y.index, w.index)


if __name__ == "__main__":
    import doctest

    doctest.testmod()
