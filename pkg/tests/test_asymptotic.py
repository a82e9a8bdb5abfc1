"""Top-coefficient structure constants and the t-basis ring."""

import doctest

import pytest

import cellkit.asymptotic
from cellkit.asymptotic import GammaTable, gamma, t_multiply
from cellkit.cells import duflo_elements, duflo_of_left_cell, stabilizer
from cellkit.coxeter import inverse, longest_element, multiply


@pytest.fixture(scope="module")
def gam_factory(dec_factory):
    cache = {}

    def get(t, r):
        if (t, r) not in cache:
            cache[(t, r)] = GammaTable(dec_factory(t, r))
        return cache[(t, r)]

    return get


def _linear_product(g, coeffs, y):
    """(sum_x coeffs[x] t_x) * t_y expanded in the t-basis."""
    out = {}
    for x, c in coeffs.items():
        for z, d in g.t_product(x, y).items():
            out[z] = out.get(z, 0) + c * d
    return {z: c for z, c in out.items() if c}


def test_doctests():
    results = doctest.testmod(cellkit.asymptotic)
    assert results.failed == 0


def test_unit_gamma(gam_factory, sys_factory):
    g = gam_factory("A", 2)
    e = sys_factory("A", 2).identity
    assert gamma(g, e, e, e) == 1
    assert t_multiply(g, e, e) == {e: 1}


def test_identity_t_acts_only_on_its_cell(gam_factory, sys_factory):
    g = gam_factory("A", 3)
    W = sys_factory("A", 3)
    for w in W.elements():
        expected = {w: 1} if w == W.identity else {}
        assert t_multiply(g, W.identity, w) == expected


def test_g2_frozen_products(gam_factory, sys_factory):
    g = gam_factory("G", 2)
    W = sys_factory("G", 2)
    x, y = W.element("12"), W.element("21")
    assert {z.word: c for z, c in t_multiply(g, x, y).items()} == {"1": 1, "121": 1}
    assert {z.word: c for z, c in t_multiply(g, y, x).items()} == {"2": 1, "212": 1}
    assert gamma(g, x, y, W.element("1")) == 1
    assert gamma(g, x, y, inverse(W.element("121"))) == 1
    assert gamma(g, x, y, W.element("2")) == 0
    w0 = longest_element(W)
    assert t_multiply(g, w0, w0) == {w0: 1}


def test_a2_cross_cell_product_vanishes(gam_factory, sys_factory):
    g = gam_factory("A", 2)
    W = sys_factory("A", 2)
    assert t_multiply(g, W.element("1"), W.element("2")) == {}


def test_duflo_left_identity_on_right_cell(gam_factory):
    for t, r in [("A", 3), ("G", 2)]:
        g = gam_factory(t, r)
        dec = g.cells
        for d in duflo_elements(dec):
            rid = dec.right_id[d.index]
            for i in dec._right_members[rid]:
                x = dec.system.from_index(i)
                assert t_multiply(g, d, x) == {x: 1}
                assert gamma(g, d, x, inverse(x)) == 1


def test_duflo_squares(gam_factory):
    g = gam_factory("A", 2)
    for d in duflo_elements(g.cells):
        assert t_multiply(g, d, d) == {d: 1}


def test_support_in_common_twosided_cell(gam_factory):
    for t, r in [("A", 3), ("G", 2)]:
        g = gam_factory(t, r)
        dec = g.cells
        for x in dec.system.elements():
            for y in dec.system.elements():
                prod = t_multiply(g, x, y)
                for z in prod:
                    assert dec.twosided_id[z.index] == dec.twosided_id[x.index]
                    assert dec.twosided_id[z.index] == dec.twosided_id[y.index]
                if prod:
                    assert dec.twosided_id[x.index] == dec.twosided_id[y.index]


def test_left_right_compatibility_of_support(gam_factory):
    """Nonzero products require y and x^{-1} in the same right cell; the
    support then sits in L(y) intersect R(x)."""
    for t, r in [("A", 3), ("G", 2)]:
        g = gam_factory(t, r)
        dec = g.cells
        inv = dec.system.inverse_index
        for x in dec.system.elements():
            for y in dec.system.elements():
                prod = t_multiply(g, x, y)
                if prod:
                    assert dec.right_id[y.index] == dec.right_id[inv[x.index]]
                for z in prod:
                    assert dec.left_id[z.index] == dec.left_id[y.index]
                    assert dec.right_id[z.index] == dec.right_id[x.index]


def test_gamma_transpose_symmetry(gam_factory):
    g = gam_factory("G", 2)
    dec = g.cells
    for x in dec.system.elements():
        for y in dec.system.elements():
            for z in dec.system.elements():
                assert gamma(g, x, y, z) == gamma(
                    g, inverse(y), inverse(x), inverse(z)
                )


def test_associativity_within_twosided_cells_b3(gam_factory):
    g = gam_factory("B", 3)
    dec = g.cells
    for cell in dec._two_members:
        elems = [dec.system.from_index(i) for i in cell]
        for x in elems:
            for y in elems:
                xy = g.t_product(x, y)
                for z in elems:
                    lhs = _linear_product(g, xy, z)
                    rhs = {}
                    for u, c in g.t_product(y, z).items():
                        for w, d in g.t_product(x, u).items():
                            rhs[w] = rhs.get(w, 0) + c * d
                    rhs = {w: c for w, c in rhs.items() if c}
                    assert lhs == rhs


def test_inverse_pair_product_contains_duflo_once(gam_factory):
    for t, r in [("A", 3), ("G", 2)]:
        g = gam_factory(t, r)
        dec = g.cells
        for x in dec.system.elements():
            d = duflo_of_left_cell(dec, int(dec.left_id[x.index]))
            prod = t_multiply(g, inverse(x), x)
            assert prod.get(d) == 1


def test_stabilizer_g2_frozen(gam_factory, sys_factory):
    g = gam_factory("G", 2)
    W = sys_factory("G", 2)
    assert [w.word for w in stabilizer(g.cells, g, W.element("12"))] == ["1", "121"]
    assert [w.word for w in stabilizer(g.cells, g, W.identity)] == ["e"]
    w0 = longest_element(W)
    assert stabilizer(g.cells, g, w0) == [w0]


def test_stabilizer_sits_in_diagonal_h_cell(gam_factory):
    g = gam_factory("A", 3)
    dec = g.cells
    for y in dec.system.elements():
        rid = dec.right_id[y.index]
        for m in stabilizer(dec, g, y):
            assert dec.right_id[m.index] == rid
            assert dec.right_id[dec.system.inverse_index[m.index]] == rid


def test_diagonal_h_cells_are_elementary_2_groups_b3(gam_factory):
    g = gam_factory("B", 3)
    dec = g.cells
    for d in duflo_elements(dec):
        cell = [
            i
            for i in dec._h_members[dec.h_id[d.index]]
        ]
        elems = [dec.system.from_index(i) for i in cell]
        for u in elems:
            assert t_multiply(g, u, u) == {d: 1}
            for w in elems:
                prod = t_multiply(g, u, w)
                assert len(prod) == 1 and set(prod.values()) == {1}
                assert t_multiply(g, w, u) == prod


def test_idempotent_purity_b3(gam_factory):
    g = gam_factory("B", 3)
    dec = g.cells
    for y in dec.system.elements():
        e = g.t_product(y, inverse(y))
        square = {}
        for u, c in e.items():
            part = _linear_product(g, e, u)
            for z, d in part.items():
                square[z] = square.get(z, 0) + c * d
        square = {z: c for z, c in square.items() if c}
        if square == e:
            d = duflo_of_left_cell(dec, int(dec.left_id[inverse(y).index]))
            assert e == {d: 1}


def test_seeded_column_is_used(dec_factory, sys_factory):
    g = GammaTable(dec_factory("A", 2))
    W = sys_factory("A", 2)
    x = W.element("1")
    g.seed(x.index, x.index, {x.index: 1})
    assert t_multiply(g, x, x) == {x: 1}
    assert x.index not in g._full_rows
