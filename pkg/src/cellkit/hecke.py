"""Iwahori-Hecke algebra over Z[v, v^-1] with its canonical basis.

Conventions.  The standard basis H_w satisfies H_w H_s = H_{ws} when the
product is longer and H_{ws} + (v^{-1} - v) H_w otherwise.  The bar
involution fixes each canonical basis element H'_w = H_w +
sum_{y < w} p_{y,w} H_y, and the normalisation is self-dual: every
p_{y,w} lies in v Z_{>=0}[v] with degree at most l(w) - l(y).  Structure
constants h_{x,y,z} are defined by H'_x H'_y = sum_z h_{x,y,z} H'_z; each
is symmetric in v <-> v^{-1}.

Two independent product routes are kept deliberately separate:
:func:`h_constants` multiplies out standard-basis expansions and converts
back (a slow, transparent reference), while
:func:`products_with_fixed_left` streams all products H'_z H'_w for fixed
z through a one-generator-at-a-time recursion on dense integer
coefficient arrays.  Tests compare the two exhaustively on small groups.

Coefficient arithmetic runs in int64 with an a-priori bound check before
every step, so an overflow is impossible rather than merely unobserved.

>>> W = create_system("A", 2)
>>> T = KLTable(W)
>>> str(kl_polynomial(T, W.element("2"), W.element("121")))
'v^2'
>>> [(u.word, str(p)) for u, p in sorted(h_constants(T, W.element("1"), W.element("2")).items())]
[('12', '1')]
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from cellkit.coxeter import CoxeterSystem, Element, create_system

__all__ = [
    "LaurentPoly",
    "HeckeElt",
    "KLTable",
    "CacheError",
    "multiply_standard",
    "bar_involution",
    "kl_polynomial",
    "mu",
    "kl_basis",
    "h_constants",
    "products_with_fixed_left",
    "cache_path",
    "save_cache",
    "load_cache",
    "verify_cache",
]

_INT64_GUARD = 1 << 62


class LaurentPoly:
    """Immutable Laurent polynomial in v with integer coefficients."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Optional[dict] = None):
        self._c = {int(e): int(c) for e, c in (coeffs or {}).items() if c != 0}

    @classmethod
    def zero(cls) -> "LaurentPoly":
        return cls()

    @classmethod
    def one(cls) -> "LaurentPoly":
        return cls({0: 1})

    @classmethod
    def v_power(cls, e: int, c: int = 1) -> "LaurentPoly":
        return cls({e: c})

    def items(self):
        return self._c.items()

    def coefficient(self, e: int) -> int:
        return self._c.get(e, 0)

    @property
    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self) -> bool:
        return bool(self._c)

    @property
    def degree(self) -> Optional[int]:
        """Largest exponent, None for the zero polynomial."""
        return max(self._c) if self._c else None

    @property
    def min_exp(self) -> Optional[int]:
        return min(self._c) if self._c else None

    def bar(self) -> "LaurentPoly":
        """Substitute v -> v^{-1}."""
        return LaurentPoly({-e: c for e, c in self._c.items()})

    def shifted(self, k: int) -> "LaurentPoly":
        return LaurentPoly({e + k: c for e, c in self._c.items()})

    def __add__(self, other) -> "LaurentPoly":
        other = _as_poly(other)
        out = dict(self._c)
        for e, c in other._c.items():
            out[e] = out.get(e, 0) + c
        return LaurentPoly(out)

    def __radd__(self, other) -> "LaurentPoly":
        return self.__add__(other)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly({e: -c for e, c in self._c.items()})

    def __sub__(self, other) -> "LaurentPoly":
        return self.__add__(-_as_poly(other))

    def __mul__(self, other) -> "LaurentPoly":
        other = _as_poly(other)
        out: Dict[int, int] = {}
        for e1, c1 in self._c.items():
            for e2, c2 in other._c.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return LaurentPoly(out)

    def __rmul__(self, other) -> "LaurentPoly":
        return self.__mul__(other)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = LaurentPoly({0: other})
        return isinstance(other, LaurentPoly) and self._c == other._c

    def __hash__(self) -> int:
        return hash(tuple(sorted(self._c.items())))

    def __str__(self) -> str:
        if not self._c:
            return "0"
        parts = []
        for e in sorted(self._c):
            c = self._c[e]
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                vpart = "v" if e == 1 else f"v^{e}"
                body = vpart if mag == 1 else f"{mag}{vpart}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"LaurentPoly({self})"

    _TERM_RE = re.compile(r"^(\d+)?(v(?:\^(-?\d+))?)?$")

    @classmethod
    def parse(cls, text: str) -> "LaurentPoly":
        """Inverse of str(); accepts e.g. "v + v^3", "2v^-2 - 1", "0"."""
        text = text.strip()
        if text in ("0", ""):
            return cls.zero()
        if text.startswith("-"):
            text = "~" + text[1:]
        text = text.replace(" + ", "|+").replace(" - ", "|~")
        out: Dict[int, int] = {}
        for chunk in text.split("|"):
            sign = 1
            if chunk.startswith("+"):
                chunk = chunk[1:]
            elif chunk.startswith("~"):
                sign, chunk = -1, chunk[1:]
            m = cls._TERM_RE.match(chunk.strip())
            if not m or not chunk.strip():
                raise ValueError(f"cannot parse Laurent term {chunk!r}")
            coeff = int(m.group(1)) if m.group(1) else 1
            if m.group(2) is None:
                e = 0
            else:
                e = int(m.group(3)) if m.group(3) is not None else 1
            out[e] = out.get(e, 0) + sign * coeff
        return cls(out)


def _as_poly(x) -> LaurentPoly:
    if isinstance(x, LaurentPoly):
        return x
    if isinstance(x, int):
        return LaurentPoly({0: x})
    raise TypeError(f"cannot coerce {type(x).__name__} to LaurentPoly")


V_PLUS_VINV = LaurentPoly({1: 1, -1: 1})
VINV_MINUS_V = LaurentPoly({-1: 1, 1: -1})
V_MINUS_VINV = LaurentPoly({1: 1, -1: -1})


@dataclass(frozen=True, eq=False)
class HeckeElt:
    """A Hecke algebra element: coefficients on either basis.

    basis is "standard" (H_w) or "kl" (canonical H'_w); coeffs maps
    Element -> LaurentPoly and is stored zero-free.
    """

    system: CoxeterSystem
    basis: str
    coeffs: dict

    def __post_init__(self):
        if self.basis not in ("standard", "kl"):
            raise ValueError(f"unknown basis {self.basis!r}")
        clean = {w: p for w, p in self.coeffs.items() if p}
        object.__setattr__(self, "coeffs", clean)

    def support(self) -> list:
        return sorted(self.coeffs)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, HeckeElt)
            and self.system is other.system
            and self.basis == other.basis
            and self.coeffs == other.coeffs
        )

    def __add__(self, other: "HeckeElt") -> "HeckeElt":
        self._check_compatible(other)
        out = dict(self.coeffs)
        for w, p in other.coeffs.items():
            out[w] = out.get(w, LaurentPoly.zero()) + p
        return HeckeElt(self.system, self.basis, out)

    def __sub__(self, other: "HeckeElt") -> "HeckeElt":
        return self + other.scale(LaurentPoly({0: -1}))

    def scale(self, p) -> "HeckeElt":
        p = _as_poly(p)
        return HeckeElt(self.system, self.basis, {w: q * p for w, q in self.coeffs.items()})

    def _check_compatible(self, other: "HeckeElt"):
        if self.system is not other.system or self.basis != other.basis:
            raise ValueError("incompatible Hecke elements")

    def __repr__(self) -> str:
        terms = ", ".join(f"{w.word}: {p}" for w, p in sorted(self.coeffs.items()))
        return f"HeckeElt[{self.basis}]({{{terms}}})"


def _std_times_gen(system: CoxeterSystem, coeffs: dict, col: int) -> dict:
    """Right-multiply an index-keyed standard-basis dict by H_s."""
    out: dict = {}
    lengths = system.lengths
    right = system.right_mult
    for wi, c in coeffs.items():
        ws = int(right[wi, col])
        out[ws] = out.get(ws, LaurentPoly.zero()) + c
        if lengths[ws] < lengths[wi]:
            out[wi] = out.get(wi, LaurentPoly.zero()) + c * VINV_MINUS_V
    return {wi: p for wi, p in out.items() if p}


def multiply_standard(a: HeckeElt, b: HeckeElt) -> HeckeElt:
    """Product of two standard-basis elements, expanding b along words."""
    a._check_compatible(b)
    if a.basis != "standard":
        raise ValueError("multiply_standard needs standard-basis operands")
    system = a.system
    acc: dict = {}
    a_idx = {w.index: p for w, p in a.coeffs.items()}
    for w, c in b.coeffs.items():
        part = {wi: p * c for wi, p in a_idx.items()}
        for letter in w.word_tuple:
            part = _std_times_gen(system, part, letter - 1)
        for wi, p in part.items():
            acc[wi] = acc.get(wi, LaurentPoly.zero()) + p
    out = {system.from_index(wi): p for wi, p in acc.items() if p}
    return HeckeElt(system, "standard", out)


def bar_involution(a: HeckeElt) -> HeckeElt:
    """v -> v^{-1}, H_w -> product of inverse generators along a word."""
    if a.basis != "standard":
        raise ValueError("bar_involution needs a standard-basis element")
    system = a.system
    acc: dict = {}
    for w, c in a.coeffs.items():
        part = {0: c.bar()}
        for letter in w.word_tuple:
            col = letter - 1
            bumped = _std_times_gen(system, part, col)
            for wi, p in part.items():
                extra = p * V_MINUS_VINV
                bumped[wi] = bumped.get(wi, LaurentPoly.zero()) + extra
            part = {wi: p for wi, p in bumped.items() if p}
        for wi, p in part.items():
            acc[wi] = acc.get(wi, LaurentPoly.zero()) + p
    out = {system.from_index(wi): p for wi, p in acc.items() if p}
    return HeckeElt(system, "standard", out)


class KLTable:
    """All canonical-basis expansions of one system, built in one pass.

    The dense array p[y, w, e] holds the coefficient of v^e in p_{y,w}
    (exponents 0..l(w0)); mu[y, w] is its coefficient of v^1.
    """

    def __init__(self, system: CoxeterSystem):
        self.system = system
        self._L = int(system.lengths.max())
        self._p: Optional[np.ndarray] = None
        self._mu: Optional[np.ndarray] = None
        self._mu_cols: dict = {}
        self._right_mats: dict = {}
        self._lock = threading.RLock()

    # ------------------------------------------------------------- building

    def _ensure_built(self):
        with self._lock:
            if self._p is not None:
                return
            self._p = self._build()
            self._mu = np.ascontiguousarray(self._p[:, :, 1])

    def _build(self) -> np.ndarray:
        system = self.system
        n, L = system.size, self._L
        p = np.zeros((n, n, L + 1), dtype=np.int64)
        p[0, 0, 0] = 1
        colmax = np.zeros(n, dtype=np.int64)
        colmax[0] = 1
        lengths = system.lengths
        left = system.left_mult
        for w in range(1, n):
            col = system._words[w][0] - 1
            u = int(left[w, col])
            cu = p[:, u, :]
            perm = left[:, col]
            desc = lengths[perm] < lengths
            asc = ~desc
            # H'_s H_y = H_{sy} + v^{+-1} H_y, exponent sign by descent side
            if np.any(cu[desc, 0]) or np.any(cu[asc, -1]):
                raise RuntimeError("exponent window tripwire hit in column build")
            b = cu[perm].copy()
            b[asc, 1:] += cu[asc, :-1]
            b[desc, :-1] += cu[desc, 1:]
            murows = np.nonzero(p[:, u, 1])[0]
            murows = murows[desc[murows]]
            muvals = p[murows, u, 1]
            projected = 2 * int(colmax[u]) + int(muvals @ colmax[murows])
            if projected >= _INT64_GUARD:
                raise RuntimeError("coefficient bound exceeded; refusing lossy arithmetic")
            for z, m in zip(murows, muvals):
                b -= int(m) * p[:, z, :]
            if b[w, 0] != 1 or np.count_nonzero(b[:, 0]) != 1 or b.min() < 0:
                raise RuntimeError("canonical-basis invariant violated (triangularity)")
            p[:, w, :] = b
            colmax[w] = int(b.max())
        return p

    # -------------------------------------------------------------- queries

    def p_array(self) -> np.ndarray:
        self._ensure_built()
        return self._p

    def mu_array(self) -> np.ndarray:
        self._ensure_built()
        return self._mu

    @property
    def w0_length(self) -> int:
        return self._L

    def _mu_col(self, w: int) -> Tuple[np.ndarray, np.ndarray]:
        """Nonzero (rows, values) of mu(., w)."""
        cached = self._mu_cols.get(w)
        if cached is None:
            self._ensure_built()
            rows = np.nonzero(self._mu[:, w])[0]
            cached = (rows, self._mu[rows, w])
            self._mu_cols[w] = cached
        return cached

    def _right_matrix(self, col: int):
        """Sparse action of right multiplication by H'_s on ascent rows.

        Returns (A, desc, colsum): A[target, source] collects H'_{us} and
        mu-correction terms for ascent rows u; desc marks rows with us < u
        (handled by an exponent shift); colsum bounds the absolute column
        sums of the whole action for overflow projection.
        """
        cached = self._right_mats.get(col)
        if cached is None:
            self._ensure_built()
            system = self.system
            n = system.size
            lengths = system.lengths
            right = system.right_mult[:, col]
            desc = lengths[right] < lengths
            src, dst, val = [], [], []
            for u in np.nonzero(~desc)[0]:
                src.append(u)
                dst.append(int(right[u]))
                val.append(1)
                rows, vals = self._mu_col(int(u))
                for z, m in zip(rows, vals):
                    if desc[z]:
                        src.append(u)
                        dst.append(int(z))
                        val.append(int(m))
            a = sp.csr_matrix(
                (np.asarray(val, dtype=np.int64), (dst, src)), shape=(n, n)
            )
            # max absolute row sum bounds any output entry of a @ c; the +2
            # covers the two exponent shifts added into descent rows
            rowsum = int(np.abs(a).sum(axis=1).max()) + 2
            cached = (a, desc, rowsum)
            self._right_mats[col] = cached
        return cached

    def __repr__(self) -> str:
        state = "built" if self._p is not None else "lazy"
        return f"KLTable({self.system!r}, {state})"


def kl_polynomial(table: KLTable, y: Element, w: Element) -> LaurentPoly:
    """p_{y,w} in the self-dual normalisation (1 at y == w, 0 unless y <= w)."""
    _check_system(table, y, w)
    col = table.p_array()[y.index, w.index]
    return _poly_from_row(col, 0)


def mu(table: KLTable, y: Element, w: Element) -> int:
    """Coefficient of v in p_{y,w}."""
    _check_system(table, y, w)
    return int(table.mu_array()[y.index, w.index])


def kl_basis(table: KLTable, w: Element) -> HeckeElt:
    """The canonical basis element H'_w expanded in the standard basis."""
    _check_system(table, w)
    system = table.system
    col = table.p_array()[:, w.index, :]
    out = {}
    for y in np.nonzero(col.any(axis=1))[0]:
        out[system.from_index(int(y))] = _poly_from_row(col[y], 0)
    return HeckeElt(system, "standard", out)


def to_kl(table: KLTable, a: HeckeElt) -> HeckeElt:
    """Rewrite a standard-basis element over the canonical basis."""
    if a.basis != "standard":
        raise ValueError("to_kl needs a standard-basis element")
    system = table.system
    rest = {w.index: p for w, p in a.coeffs.items()}
    out = {}
    p_arr = table.p_array()
    while rest:
        w = max(rest, key=lambda i: (int(system.lengths[i]), i))
        c = rest.pop(w)
        out[system.from_index(w)] = c
        col = p_arr[:, w, :]
        for y in np.nonzero(col.any(axis=1))[0]:
            y = int(y)
            if y == w:
                continue
            q = rest.get(y, LaurentPoly.zero()) - c * _poly_from_row(col[y], 0)
            if q:
                rest[y] = q
            else:
                rest.pop(y, None)
    return HeckeElt(system, "kl", out)


def h_constants(table: KLTable, x: Element, y: Element) -> dict:
    """Structure constants h_{x,y,.}: the product H'_x H'_y over the
    canonical basis, as {Element: LaurentPoly}.

    Transparent reference route (standard-basis expansion and triangular
    conversion); quadratic in the Bruhat interval sizes.  The streaming
    route :func:`products_with_fixed_left` must agree with it exactly.
    """
    _check_system(table, x, y)
    prod = multiply_standard(kl_basis(table, x), kl_basis(table, y))
    return dict(to_kl(table, prod).coeffs)


def _check_system(table: KLTable, *elts: Element):
    for w in elts:
        if w.system is not table.system:
            raise ValueError("element does not belong to this table's system")


def _poly_from_row(row: np.ndarray, offset: int) -> LaurentPoly:
    return LaurentPoly({e - offset: int(c) for e, c in enumerate(row) if c})


# ----------------------------------------------------------------- streaming


def sweep(table: KLTable, z_index: int, out: Optional[np.ndarray] = None) -> np.ndarray:
    """All products H'_z H'_w, w in enumeration order, as one int64 tensor.

    Returns t with t[w, u, k] = coefficient of v^(k - l(w0)) of h_{z,w,u}.
    Every intermediate row is itself an exact product expansion, so the
    exponent window [-l(w0), l(w0)] cannot be left; shift tripwires and an
    a-priori magnitude projection guard each step.
    """
    table._ensure_built()
    system = table.system
    n, L = system.size, table._L
    e_dim = 2 * L + 1
    if out is None:
        out = np.zeros((n, n, e_dim), dtype=np.int64)
    else:
        out[:] = 0
    out[0, z_index, L] = 1
    bound = 1
    lengths = system.lengths
    right = system.right_mult
    for w in range(1, n):
        col = system._words[w][-1] - 1
        wp = int(right[w, col])
        a, desc, rowsum = table._right_matrix(col)
        rows, vals = table._mu_col(wp)
        if rows.size:
            keep = lengths[right[rows, col]] < lengths[rows]
            rows, vals = rows[keep], vals[keep]
        projected = bound * (rowsum + int(vals.sum()))
        if projected >= _INT64_GUARD:
            raise RuntimeError("coefficient bound exceeded; refusing lossy arithmetic")
        c = out[wp]
        r = a @ np.where(desc[:, None], 0, c)
        cd = c[desc]
        if np.any(cd[:, 0]) or np.any(cd[:, -1]):
            raise RuntimeError("exponent window tripwire hit")
        r[desc, 1:] += cd[:, :-1]
        r[desc, :-1] += cd[:, 1:]
        for u, m in zip(rows, vals):
            r -= int(m) * out[int(u)]
        out[w] = r
        bound = max(bound, int(r.max()), -int(r.min()))
    return out


def products_with_fixed_left(table: KLTable, z: Element) -> Iterator[Tuple[Element, dict]]:
    """Stream (w, {u: h_{z,w,u}}) for every w in enumeration order."""
    _check_system(table, z)
    system = table.system
    t = sweep(table, z.index)
    L = table._L
    for w in range(system.size):
        row = t[w]
        prod = {}
        for u in np.nonzero(row.any(axis=1))[0]:
            prod[system.from_index(int(u))] = _poly_from_row(row[u], L)
        yield system.from_index(w), prod


# --------------------------------------------------------------------- cache


class CacheError(Exception):
    """Raised when a canonical-basis cache file cannot be trusted."""


_CACHE_FORMAT = 1
_NORMALIZATION = "selfdual-v"


def cache_path(cache_dir, system: CoxeterSystem) -> Path:
    return Path(cache_dir) / f"klcache_{system.cartan_type}{system.rank}.json"


def _cache_payload(table: KLTable) -> dict:
    system = table.system
    p = table.p_array()
    cols = []
    for w in range(system.size):
        entries = []
        col = p[:, w, :]
        for y in np.nonzero(col.any(axis=1))[0]:
            terms = [[int(e), str(int(c))] for e, c in enumerate(col[y]) if c]
            entries.append([system._word_strs[int(y)], terms])
        cols.append([system._word_strs[w], entries])
    return {
        "format_version": _CACHE_FORMAT,
        "cartan_type": system.cartan_type,
        "rank": system.rank,
        "normalization": _NORMALIZATION,
        "size": system.size,
        "columns": cols,
    }


def _checksum(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def save_cache(table: KLTable, path) -> Path:
    """Write the full canonical-basis table as checksummed JSON."""
    path = Path(path)
    payload = _cache_payload(table)
    payload["checksum"] = _checksum({k: v for k, v in payload.items()})
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(payload, separators=(",", ":")))
    tmp.replace(path)
    return path


def _read_payload(system: CoxeterSystem, path) -> dict:
    path = Path(path)
    advice = f"delete {path} and re-warm with 'cellkit cache warm'"
    try:
        payload = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CacheError(f"unreadable cache {path}: {exc}; {advice}") from None
    stored = payload.pop("checksum", None)
    if stored is None or stored != _checksum(payload):
        raise CacheError(f"checksum mismatch in {path}; {advice}")
    if payload.get("format_version") != _CACHE_FORMAT:
        raise CacheError(f"unsupported cache format in {path}; {advice}")
    if (
        payload.get("cartan_type") != system.cartan_type
        or payload.get("rank") != system.rank
        or payload.get("normalization") != _NORMALIZATION
        or payload.get("size") != system.size
    ):
        raise CacheError(
            f"cache {path} does not match {system.cartan_type}{system.rank} "
            f"({_NORMALIZATION}); {advice}"
        )
    return payload


def load_cache(system: CoxeterSystem, path) -> KLTable:
    """Rebuild a KLTable from a cache file, refusing anything inconsistent."""
    payload = _read_payload(system, path)
    n, L = system.size, int(system.lengths.max())
    p = np.zeros((n, n, L + 1), dtype=np.int64)
    try:
        for w_word, entries in payload["columns"]:
            w = system.element(w_word).index
            for y_word, terms in entries:
                y = system.element(y_word).index
                for e, c in terms:
                    p[y, w, int(e)] = int(c)
    except (ValueError, KeyError, IndexError) as exc:
        raise CacheError(f"malformed cache {path}: {exc}") from None
    table = KLTable(system)
    table._p = p
    table._mu = np.ascontiguousarray(p[:, :, 1])
    return table


def verify_cache(system: CoxeterSystem, path) -> dict:
    """Checksum and header check; returns the header metadata."""
    payload = _read_payload(system, path)
    return {k: payload[k] for k in ("format_version", "cartan_type", "rank", "normalization", "size")}


if __name__ == "__main__":
    import doctest

    doctest.testmod()
