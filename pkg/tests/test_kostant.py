"""Kostant-type classifiers, the KM certificate ladder, and cell reports."""

import doctest
import json
import pathlib

import pytest

import cellkit.kostant
from cellkit.asymptotic import GammaTable
from cellkit.cells import (
    duflo_elements,
    duflo_of_left_cell,
    h_cell_max,
    stabilizer,
)
from cellkit.coxeter import inverse, longest_element
from cellkit.hecke import h_constants
from cellkit.kostant import (
    CONDITIONAL_ON,
    Verdict,
    cell_report,
    conjectural_kostant,
    kh_bracket,
    kh_bracket_literal,
    km_proxy,
    summand_decomposition,
)

GOLDEN = pathlib.Path(__file__).parent / "golden"


def load_golden(name):
    with open(GOLDEN / f"{name}.json") as fh:
        return json.load(fh)


@pytest.fixture(scope="module")
def gam_factory(dec_factory):
    cache = {}

    def get(t, r):
        if (t, r) not in cache:
            cache[(t, r)] = GammaTable(dec_factory(t, r))
        return cache[(t, r)]

    return get


@pytest.fixture(scope="module")
def report_factory(table_factory, dec_factory, gam_factory):
    cache = {}

    def get(t, r, threads=1):
        if (t, r) not in cache:
            cache[(t, r)] = cell_report(
                table_factory(t, r), dec_factory(t, r), gam_factory(t, r),
                threads=threads,
            )
        return cache[(t, r)]

    return get


def _index_of(system, word):
    return system.element("" if word == "e" else word).index


def _class_sets(system, report):
    out = {}
    for e in report.elements:
        out.setdefault(e.klass, set()).add(_index_of(system, e.word))
    return out


def test_doctests():
    results = doctest.testmod(cellkit.kostant)
    assert results.failed == 0


# --------------------------------------------------------------- G2 table


def test_g2_wallcrossing_table(table_factory, dec_factory, gam_factory, sys_factory):
    """Frozen five-row summary of the rank-2 wall-crossing summands."""
    W = sys_factory("G", 2)
    table = table_factory("G", 2)
    dec = dec_factory("G", 2)
    g = gam_factory("G", 2)
    for row in load_golden("g2_wallcrossing")["rows"]:
        y = W.element(row["y"])
        d, summands = summand_decomposition(dec, g, y)
        assert d.word == row["functor"]
        assert {z.word: c for z, c in summands.items()} == dict(row["summands"])
        assert km_proxy(table, g, y) is row["km"]
        assert kh_bracket(table, dec, y) is row["kh"]
        assert bool(conjectural_kostant(table, dec, g, y)) is row["k"]


def test_g2_kostant_set(table_factory, dec_factory, gam_factory, sys_factory):
    W = sys_factory("G", 2)
    table = table_factory("G", 2)
    dec = dec_factory("G", 2)
    g = gam_factory("G", 2)
    positives = {
        w.word for w in W.elements()
        if conjectural_kostant(table, dec, g, w)
    }
    assert positives == {"e", "1", "2", "12121", "21212", "121212"}


def test_verdict_carries_assumption(table_factory, dec_factory, gam_factory, sys_factory):
    W = sys_factory("G", 2)
    v = conjectural_kostant(
        table_factory("G", 2), dec_factory("G", 2), gam_factory("G", 2),
        W.element("12"),
    )
    assert isinstance(v, Verdict)
    assert v.conditional_on == CONDITIONAL_ON
    assert bool(v) is False


# --------------------------------------------------- flags, small ranks


def test_type_a_km_proxy_everywhere(table_factory, gam_factory, sys_factory):
    for t, r in [("A", 2), ("A", 3)]:
        W = sys_factory(t, r)
        table = table_factory(t, r)
        g = gam_factory(t, r)
        assert all(km_proxy(table, g, w) for w in W.elements())


def test_b2_km_proxy_fails_somewhere(table_factory, gam_factory, sys_factory):
    W = sys_factory("B", 2)
    table = table_factory("B", 2)
    g = gam_factory("B", 2)
    assert not all(km_proxy(table, g, w) for w in W.elements())


def test_a3_kostant_negative_at_13(table_factory, dec_factory, gam_factory, sys_factory):
    W = sys_factory("A", 3)
    table = table_factory("A", 3)
    dec = dec_factory("A", 3)
    g = gam_factory("A", 3)
    assert not conjectural_kostant(table, dec, g, W.element("13"))
    assert not kh_bracket(table, dec, W.element("13"))
    assert km_proxy(table, g, W.element("13"))


def test_non_maximal_h_cell_blocks_both_flags(
    table_factory, dec_factory, gam_factory
):
    """Exhaustive on B3 and D4: y below the maximal H-cell size of its
    two-sided cell never passes the character or multiplicity flag."""
    for t, r in [("B", 3), ("D", 4)]:
        table = table_factory(t, r)
        dec = dec_factory(t, r)
        g = gam_factory(t, r)
        for w in dec.system.elements():
            if not h_cell_max(dec, w):
                assert not km_proxy(table, g, w)
                assert not kh_bracket(table, dec, w)


def test_stabilizer_size_matches_diagonal_support(
    report_factory, gam_factory, dec_factory, sys_factory
):
    rep = report_factory("B", 3)
    W = sys_factory("B", 3)
    dec = dec_factory("B", 3)
    g = gam_factory("B", 3)
    for e in rep.elements:
        y = W.element("" if e.word == "e" else e.word)
        assert e.stabilizer_size == len(stabilizer(dec, g, y))


def test_diagonal_support_is_left_cell_duflo(dec_factory, gam_factory, sys_factory):
    """For supp-1 elements the product t_{y^{-1}} t_y collapses onto the
    Duflo element of the left cell of y (row transport anchor)."""
    for t, r in [("B", 3), ("G", 2)]:
        W = sys_factory(t, r)
        dec = dec_factory(t, r)
        g = gam_factory(t, r)
        for y in W.elements():
            prod = g.t_product(inverse(y), y)
            if len(prod) == 1 and set(prod.values()) == {1}:
                (d,) = prod
                assert d == duflo_of_left_cell(dec, int(dec.left_id[y.index]))


# ------------------------------------------------------ variant bracket


def _brute_injective(table, dec, y, use_inverse):
    """Oracle: pairwise-distinct maps x -> (z -> h-coefficient at y)."""
    W = dec.system
    inv = W.inverse_index
    domain = [
        x for x in W.elements()
        if dec._left_reach[dec.left_id[inv[x.index]], dec.left_id[y.index]]
    ]
    chars = []
    for x in domain:
        functor = inverse(x) if use_inverse else x
        col = {}
        for z in W.elements():
            h = h_constants(table, z, functor).get(y)
            if h is not None:
                col[z.word] = tuple(sorted(h.items()))
        chars.append(col)
    return all(
        chars[i] != chars[j]
        for i in range(len(chars))
        for j in range(i + 1, len(chars))
    )


def test_bracket_matches_brute_force_rank2(table_factory, dec_factory):
    for t, r in [("A", 2), ("B", 2), ("G", 2)]:
        table = table_factory(t, r)
        dec = dec_factory(t, r)
        for y in dec.system.elements():
            assert kh_bracket(table, dec, y) == _brute_injective(
                table, dec, y, use_inverse=True
            )


def test_literal_variant_matches_brute_force_rank2(table_factory, dec_factory):
    for t, r in [("A", 2), ("B", 2), ("G", 2)]:
        table = table_factory(t, r)
        dec = dec_factory(t, r)
        for d in duflo_elements(dec):
            assert kh_bracket_literal(table, dec, d) == _brute_injective(
                table, dec, d, use_inverse=False
            )


def test_variant_mismatch_lists_frozen(report_factory):
    assert report_factory("A", 2).kh_variant_mismatches == []
    assert report_factory("B", 2).kh_variant_mismatches == []
    assert report_factory("G", 2).kh_variant_mismatches == ["1", "2"]
    assert report_factory("B", 3).kh_variant_mismatches == [
        "1", "2", "3", "121", "321323", "2323", "2132132", "123213",
        "12132132",
    ]


def test_variants_agree_on_kh_false_duflos(report_factory):
    for t, r in [("B", 3), ("D", 4)]:
        rep = report_factory(t, r, threads=2)
        kh_false = {
            e.word for e in rep.elements if e.duflo and not e.kh_bracket
        }
        assert kh_false
        assert not kh_false & set(rep.kh_variant_mismatches)


# ------------------------------------------------------------- reports


def _golden_grid_structures(system, tables):
    twos, lefts, rights, hcells, duflos = set(), set(), set(), set(), set()
    for grid in tables:
        tset = set()
        ncols = max(len(row) for row in grid)
        colsets = [set() for _ in range(ncols)]
        for rr, row in enumerate(grid):
            rowset = set()
            for cc, box in enumerate(row):
                idxs = [_index_of(system, w) for w in box]
                hcells.add(frozenset(idxs))
                rowset.update(idxs)
                colsets[cc].update(idxs)
                if rr == cc:
                    duflos.add(idxs[0])
            lefts.add(frozenset(rowset))
            tset.update(rowset)
        for cs in colsets:
            rights.add(frozenset(cs))
        twos.add(frozenset(tset))
    return twos, lefts, rights, hcells, duflos


def _report_grid_structures(system, report):
    lefts, rights, hcells, twos = {}, {}, {}, {}
    for e in report.elements:
        i = _index_of(system, e.word)
        lefts.setdefault(e.left_cell, set()).add(i)
        rights.setdefault(e.right_cell, set()).add(i)
        hcells.setdefault((e.left_cell, e.right_cell), set()).add(i)
    for grid in report.grids:
        members = set()
        for cell in grid["cells"]:
            members.update(_index_of(system, w) for w in cell["members"])
        twos[grid["twosided_cell"]] = members
    return (
        {frozenset(s) for s in twos.values()},
        {frozenset(s) for s in lefts.values()},
        {frozenset(s) for s in rights.values()},
        {frozenset(s) for s in hcells.values()},
    )


@pytest.mark.parametrize(
    "t,r,golden_name,threads",
    [("G", 2, "g2_cells", 1), ("B", 3, "b3_cells", 1), ("D", 4, "d4_cells", 2)],
)
def test_grid_partitions_match_golden(
    report_factory, sys_factory, t, r, golden_name, threads
):
    system = sys_factory(t, r)
    rep = report_factory(t, r, threads=threads)
    gt, gl, gr, gh, gd = _golden_grid_structures(
        system, load_golden(golden_name)["tables"]
    )
    rt, rl, rr_, rh = _report_grid_structures(system, rep)
    assert rt == gt
    assert rl == gl
    assert rr_ == gr
    assert rh == gh
    duflo_set = {
        _index_of(system, e.word) for e in rep.elements if e.duflo
    }
    assert duflo_set == gd


def test_b3_classes_match_golden(report_factory, sys_factory):
    system = sys_factory("B", 3)
    rep = report_factory("B", 3)
    golden = load_golden("b3_cells")
    klass = _class_sets(system, rep)
    class1 = {_index_of(system, w) for w in golden["class1"]}
    class2 = {_index_of(system, w) for w in golden["class2"]}
    assert klass.get("class1", set()) == class1
    assert klass.get("class2", set()) == class2
    assert klass.get("class3", set()) == (
        set(range(system.size)) - class1 - class2
    )
    assert "undecided" not in klass


def test_d4_classes_match_golden(report_factory, sys_factory):
    system = sys_factory("D", 4)
    rep = report_factory("D", 4, threads=2)
    golden = load_golden("d4_cells")
    klass = _class_sets(system, rep)
    class1 = {_index_of(system, w) for w in golden["class1"]}
    class2 = {_index_of(system, w) for w in golden["class2"]}
    assert len(class1) == 137 and len(class2) == 22
    assert klass.get("class1", set()) == class1
    assert klass.get("class2", set()) == class2
    assert klass.get("class3", set()) == (
        set(range(system.size)) - class1 - class2
    )
    assert "undecided" not in klass


def test_class1_equals_conjectural_positives(report_factory):
    for t, r in [("G", 2), ("B", 3), ("D", 4)]:
        rep = report_factory(t, r, threads=2)
        positives = {e.word for e in rep.elements if e.k_conjectural}
        class1 = {e.word for e in rep.elements if e.klass == "class1"}
        assert positives == class1


def test_flags_constant_on_h_cells(report_factory, dec_factory, sys_factory):
    for t, r in [("B", 3), ("D", 4)]:
        rep = report_factory(t, r, threads=2)
        dec = dec_factory(t, r)
        system = sys_factory(t, r)
        per_h = {}
        for e in rep.elements:
            hid = int(dec.h_id[_index_of(system, e.word)])
            key = (e.kh_bracket, e.km_proxy, e.k_conjectural, e.klass)
            per_h.setdefault(hid, set()).add(key)
        assert all(len(v) == 1 for v in per_h.values())


def test_km_module_constant_on_left_cells(report_factory):
    for t, r in [("B", 3), ("D", 4)]:
        rep = report_factory(t, r, threads=2)
        per_left = {}
        for e in rep.elements:
            if e.km_proxy:
                per_left.setdefault(e.left_cell, set()).add(e.km_module)
        assert all(len(v) == 1 for v in per_left.values())


def test_km_module_false_without_proxy(report_factory):
    for t, r in [("B", 3), ("D", 4)]:
        for e in report_factory(t, r, threads=2).elements:
            if not e.km_proxy:
                assert e.km_module is False
            if e.k_conjectural:
                assert e.km_module is True


def test_duflo_rules_frozen_b3(report_factory):
    rules = report_factory("B", 3).duflo_rules
    assert rules["e"] == "rigid"
    assert rules["121321323"] == "rigid"
    assert {d for d, rule in rules.items() if rule == "endo2"} == {
        "13", "2132", "13213"
    }
    assert "table" not in rules.values()
    assert "open" not in rules.values()


def test_duflo_rules_frozen_d4(report_factory):
    rules = report_factory("D", 4, threads=2).duflo_rules
    assert {d for d, rule in rules.items() if rule == "endo1"} == {
        "13", "14", "34", "134"
    }
    assert {d for d, rule in rules.items() if rule == "table"} == {
        "121321", "121421", "232423", "12324213", "13214213", "13421324"
    }
    assert "open" not in rules.values()
    assert "endo2" not in rules.values()


def test_certificates_close_type_a(report_factory):
    rules = report_factory("A", 3).duflo_rules
    assert set(rules.values()) <= {"rigid", "kh", "endo1"}
    klass = {e.klass for e in report_factory("A", 3).elements}
    assert klass == {"class1", "class2"}


def test_report_json_schema(report_factory):
    doc = report_factory("G", 2).to_json_dict()
    assert set(doc) == {
        "cartan_type", "rank", "conditional_on", "elements",
        "kh_variant_mismatches", "grids",
    }
    for entry in doc["elements"]:
        assert set(entry) == {
            "word", "duflo", "kh_bracket", "km_proxy", "k_conjectural",
            "left_cell", "right_cell", "a",
        }
    assert doc["conditional_on"] == CONDITIONAL_ON


def test_identity_and_longest_always_class1(report_factory, sys_factory):
    for t, r in [("G", 2), ("B", 3)]:
        rep = report_factory(t, r)
        W = sys_factory(t, r)
        w0 = longest_element(W).word
        for e in rep.elements:
            if e.word in ("e", w0):
                assert e.klass == "class1"


def test_summand_words_live_in_right_cell(dec_factory, gam_factory, sys_factory):
    W = sys_factory("B", 3)
    dec = dec_factory("B", 3)
    g = gam_factory("B", 3)
    for y in W.elements():
        d, summands = summand_decomposition(dec, g, y)
        rid = int(dec.right_id[y.index])
        assert int(dec.right_id[d.index]) == rid
        for z in summands:
            assert int(dec.right_id[z.index]) == rid
            assert int(dec.left_id[z.index]) == int(
                dec.left_id[inverse(y).index]
            )
