import pytest

from sigmapi import ParseError, dual, format_term, parse_protocol, parse_sequent, parse_term
from sigmapi.syntax import Atom, Product, Sum
from helpers import enum_terms, typed, universal_theory


X_TEXT = "{a:{d:A}, b:(e:B,f:C), c:{g:D,h:E}}"


def test_parse_protocol_example():
    p = parse_protocol(X_TEXT)
    assert isinstance(p, Sum)
    assert p.events == ("a", "b", "c")
    assert p.branch("b") == Product((("e", Atom("B")), ("f", Atom("C"))))


def test_empty_sum_is_unit():
    p = parse_protocol("{}")
    assert isinstance(p, Sum) and not p.branches
    assert str(p) == "{}"


def test_duplicate_event_rejected():
    with pytest.raises(ParseError):
        parse_protocol("{a:A, a:B}")


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as e:
        parse_protocol("{a:}")
    assert e.value.pos is not None


def test_dual_swaps_structure():
    p = parse_protocol(X_TEXT)
    d = dual(p)
    assert str(d) == "(a:(d:A), b:{e:B, f:C}, c:(g:D, h:E))"


def test_dual_involution():
    for text in [X_TEXT, "{}", "()", "A", "(x:{y:(z:A)})"]:
        p = parse_protocol(text)
        assert dual(dual(p)) == p


def test_dual_of_units():
    assert str(dual(parse_protocol("{}"))) == "()"
    assert str(dual(parse_protocol("()"))) == "{}"


def test_branch_order_is_irrelevant_for_equality():
    assert parse_protocol("{a:A, b:B}") == parse_protocol("{b:B, a:A}")
    assert parse_protocol("{a:A, b:B}") != parse_protocol("(a:A, b:B)")
    assert hash(parse_protocol("{a:A, b:B}")) == hash(parse_protocol("{b:B, a:A}"))


def test_protocol_roundtrip():
    for text in [X_TEXT, "{}", "()", "A", "(x:{y:(z:A)}, w:{})"]:
        p = parse_protocol(text)
        assert parse_protocol(str(p)) == p


def test_sequent_parse_and_sides():
    s = parse_sequent("a:A, b:{x:B} |- c:(y:C)")
    assert s.side_of("a") == "domain"
    assert s.side_of("c") == "codomain"
    assert str(parse_sequent(str(s))) == str(s)


def test_sequent_empty_sides():
    assert parse_sequent("|- a:A").domain == ()
    assert parse_sequent("a:A |-").codomain == ()


def test_sequent_duplicate_channel_rejected():
    with pytest.raises(ParseError):
        parse_sequent("a:A |- a:B")


def test_unknown_channel_rejected():
    s = parse_sequent("a:{x:A} |- b:A")
    with pytest.raises(ParseError):
        parse_term("z{x => id}", s, None)


def test_unknown_atomic_map_rejected():
    s = parse_sequent("a:A |- b:B")
    with pytest.raises(ParseError):
        parse_term("#nosuch", s, universal_theory())


def test_term_roundtrip_compact_and_verbose(utheory):
    texts = [
        ("a{x => #g1_1, y => id}", "a:{x:A, y:A} |- b:A"),
        ("b(u => a![p](id), v => a![q](id))", "a:(p:A, q:A) |- b:(u:A, v:A)"),
        ("a{}", "a:{}, c:A |- b:A"),
        ("b()", "a:A |- b:()"),
        ("cut g:{x:A} (g![x](id))(g{x => id})", "b:A |- c:A"),
    ]
    for term_text, seq_text in texts:
        t = typed(term_text, seq_text, utheory)
        for syntax in ("compact", "verbose"):
            printed = format_term(t, syntax)
            again = typed(printed, seq_text, utheory, syntax=syntax)
            assert again == t, (term_text, syntax, printed)


def test_verbose_examples_from_term_language():
    s = parse_sequent("alpha:{a:(e:A,f:B),b:C} |- beta:{c:(g:A,h:B),d:C}")
    compact = typed(
        "alpha{a => beta![c](beta(g => alpha![e](id), h => alpha![f](id))),"
        " b => beta![d](id)}",
        str(s),
    )
    verbose = typed(
        """input on alpha of
             | a => (output c on beta then (input on beta of
                      | g => (output e on alpha then id)
                      | h => (output f on alpha then id)))
             | b => (output d on beta then id)""",
        str(s),
        syntax="verbose",
    )
    assert compact == verbose


def test_roundtrip_on_enumerated_terms(utheory):
    for t in enum_terms("a:{x:A, y:(p:A, q:A)} |- b:{m:A, n:A}", 8, utheory):
        assert typed(format_term(t), str(t.sequent), utheory) == t
