import pytest

from sigmapi import (
    AtomTheory,
    TypeCheckError,
    check,
    classify,
    dual,
    dualize,
    enumerate_cut_free,
    identity_term,
    parse_protocol,
    parse_sequent,
    parse_term,
)
from sigmapi.typecheck import (
    TCot,
    TId,
    TInj,
    TTup,
    assert_well_typed,
    dual_sequent,
    is_cut_free,
    term_size,
)
from helpers import enum_terms, typed, universal_genmap


def test_thesis_identity_shaped_term_accepted():
    t = typed(
        "alpha{a => beta![c](beta(g => alpha![e](id), h => alpha![f](id))),"
        " b => beta![d](id)}",
        "alpha:{a:(e:A,f:B),b:C} |- beta:{c:(g:A,h:B),d:C}",
    )
    assert_well_typed(t)


def test_identity_axiom():
    t = typed("id", "a:A |- b:A")
    assert isinstance(t, TId)


def test_identity_needs_matching_atoms():
    with pytest.raises(TypeCheckError):
        typed("id", "a:A |- b:B")


def test_injection_into_empty_sum_rejected():
    s = parse_sequent("a:A |- b:{}")
    with pytest.raises(TypeCheckError) as e:
        check(parse_term("b![x](id)", s, None), s, None)
    assert "empty index" in str(e.value)


def test_branch_set_mismatch_reports_events():
    s = parse_sequent("a:{x:A, y:A} |- b:A")
    with pytest.raises(TypeCheckError) as e:
        check(parse_term("a{x => id}", s, None), s, None)
    assert "missing ['y']" in str(e.value)


def test_error_path_points_into_the_term():
    s = parse_sequent("a:{x:A, y:B} |- b:A")
    with pytest.raises(TypeCheckError) as e:
        check(parse_term("a{x => id, y => id}", s, None), s, None)
    assert e.value.path == (1,)  # the y branch, in sorted order


def test_cotuple_on_wrong_side_rejected():
    s = parse_sequent("a:(x:A) |- b:A")
    with pytest.raises(TypeCheckError):
        check(parse_term("a{x => id}", s, None), s, None)


def test_atomic_map_binding_by_channel_order():
    th = AtomTheory.parse("f: A A -> B")
    t = typed("#f", "x:A, z:A |- y:B", th)
    assert t.dom_chs == ("x", "z")


def test_atomic_signature_mismatch():
    th = AtomTheory.parse("f: A A -> B")
    s = parse_sequent("x:A |- y:B")
    with pytest.raises(TypeCheckError):
        check(parse_term("#f", s, th), s, th)


def test_identity_term_matches_thesis_display():
    p = parse_protocol("{a:A, b:{d:B, e:()}, c:(f:C, g:{})}")
    t = identity_term(p, "alpha", "beta")
    expected = typed(
        "alpha{a => beta![a](id),"
        " b => beta![b](alpha{d => beta![d](id), e => beta![e](beta())}),"
        " c => beta![c](beta(f => alpha![f](id), g => alpha![g](alpha{})))}",
        f"alpha:{p} |- beta:{p}",
    )
    assert t == expected


def test_identity_on_atom_and_units():
    assert isinstance(identity_term(parse_protocol("A")), TId)
    stub = identity_term(parse_protocol("{}"), "a", "b")
    assert isinstance(stub, TCot) and not stub.branches
    unit = identity_term(parse_protocol("()"), "a", "b")
    assert isinstance(unit, TTup) and not unit.branches


def test_identity_terms_check_for_generated_protocols():
    for text in ["A", "{}", "()", "{x:A, y:(p:B, q:{})}", "(u:{v:A}, w:())"]:
        t = identity_term(parse_protocol(text), "l", "r")
        assert_well_typed(t)


def test_classify_output_sequent():
    c = classify(parse_sequent("a:(x:A, y:B) |- b:{u:C, v:D}"))
    assert c.output_sequent
    assert c.output_index == {("a", "x"), ("a", "y"), ("b", "u"), ("b", "v")}
    assert not c.has_source_unit


def test_classify_domain_sum_is_not_output():
    assert not classify(parse_sequent("a:{x:A} |- b:A")).output_sequent


def test_classify_all_atomic_is_not_output():
    assert not classify(parse_sequent("a:A |- b:B")).output_sequent


def test_classify_output_index_reads_events():
    c = classify(parse_sequent("a:(a:{p:(), q:(), r:{}}, b:{}) |- z:A"))
    assert c.output_index == {("a", "a"), ("a", "b")}


def test_classify_source_unit_is_root_level_only():
    assert classify(parse_sequent("a:{} |- b:A")).has_source_unit
    assert classify(parse_sequent("a:A |- b:()")).has_source_unit
    assert not classify(parse_sequent("a:{x:{}} |- b:A")).has_source_unit


def test_enumerate_identity_only():
    assert [str(t) for t in enum_terms("a:A |- b:A", 5)] == ["id"]


def test_enumerate_single_cotuple():
    terms = enum_terms("a:{x:A, y:A} |- b:A", 8)
    assert [str(t) for t in terms] == ["a{x => id, y => id}"]


def test_enumerate_two_injections():
    terms = enum_terms("a:A |- b:{x:A, y:A}", 8)
    assert [str(t) for t in terms] == ["b![x](id)", "b![y](id)"]


def test_enumeration_is_complete_and_typed(utheory):
    terms = enum_terms("a:{x:A, y:(p:A, q:A)} |- b:{m:A, n:A}", 8, utheory)
    assert len(terms) == len(set(terms))
    for t in terms:
        assert_well_typed(t)
        assert is_cut_free(t)
        assert term_size(t) <= 8


def test_enumeration_within_bound_is_prefix_of_larger_bound(utheory):
    small = enum_terms("a:{x:A, y:A} |- b:{m:A}", 5, utheory)
    big = enum_terms("a:{x:A, y:A} |- b:{m:A}", 7, utheory)
    assert set(small) <= set(big)


def test_dual_sequent_and_dualize(utheory):
    t = typed(
        "a{x => b![m](id), y => b![n](#g1_1)}",
        "a:{x:A, y:A} |- b:{m:A, n:A}",
        utheory,
    )
    d = dualize(t, universal_genmap(utheory))
    assert_well_typed(d)
    assert d.sequent == dual_sequent(t.sequent)
    assert isinstance(d, TTup)
    assert dualize(d, universal_genmap(utheory)) == t


def test_check_cut_with_unmentioned_channel(utheory):
    # c is mentioned by neither side; checking must still find a split
    t = typed(
        "cut g:A (g![x](id))(a{})",
        "b:{x:A}, a:{}, c:A |-",
        utheory,
        syntax="compact",
    )
    assert_well_typed(t)
