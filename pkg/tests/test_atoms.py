import itertools

import pytest

from sigmapi import AtomTheory, CompositionError, Generator, atom_compose
from sigmapi.atoms import (
    bound_key,
    canonical_key,
    generator_graph,
    identity_graph,
    permute_boundary,
)


@pytest.fixture
def theory():
    return AtomTheory.parse(
        """
        i: A E -> G I
        j: G B -> K L
        k: K -> M
        m: I L -> N
        """
    )


def G(theory, name):
    return generator_graph(theory.generators[name])


def test_theory_parse_roundtrip(theory):
    again = AtomTheory.parse(str(theory))
    assert str(again) == str(theory)


def test_glue_two_generators(theory):
    gi, gj = G(theory, "i"), G(theory, "j")
    # i: A,E -> G,I and j: G,B -> K,L glued on G
    glued = atom_compose(gi, 0, gj, 0)
    assert glued.dom_atoms == ("A", "E", "B")
    assert glued.cod_atoms == ("K", "L", "I")
    assert len(glued.nodes) == 2
    assert len(glued.edges) == 1


def test_atom_mismatch_rejected(theory):
    gi, gj = G(theory, "i"), G(theory, "j")
    with pytest.raises(CompositionError):
        atom_compose(gi, 1, gj, 0)  # I vs G


def test_identity_law(theory):
    gi = G(theory, "i")
    ident = identity_graph("G")
    assert atom_compose(gi, 0, ident, 0) == gi
    ident_a = identity_graph("A")
    assert atom_compose(ident_a, 0, gi, 0) == gi


def test_identity_composed_with_identity():
    a, b = identity_graph("A"), identity_graph("A")
    assert atom_compose(a, 0, b, 0) == identity_graph("A")


def test_associativity_three_generator_chain(theory):
    gi, gj, gk = G(theory, "i"), G(theory, "j"), G(theory, "k")
    left = atom_compose(atom_compose(gi, 0, gj, 0), 0, gk, 0)
    right = atom_compose(gi, 0, atom_compose(gj, 0, gk, 0), 0)
    assert left == right
    assert canonical_key(left) == canonical_key(right)


def test_associativity_all_orders_up_to_four(theory):
    # chain i ; j ; k ; m over the internal atoms G, K, I, L
    gi, gj, gk, gm = (G(theory, n) for n in "ijkm")
    # ((i;j);k);m vs (i;(j;k));m vs (i;j);(k on its own)... all gluing orders
    a = atom_compose(atom_compose(atom_compose(gi, 0, gj, 0), 0, gk, 0), 2, gm, 0)
    b = atom_compose(atom_compose(gi, 0, atom_compose(gj, 0, gk, 0), 0), 2, gm, 0)
    assert a == b


def test_interchange_up_to_boundary_permutation(theory):
    # f with two codomain ports G, I feeding j (on G) and m' (on I)
    th = AtomTheory.parse("f: A -> G I\ng: G -> B\nh: I -> C")
    gf = generator_graph(th.generators["f"])
    gg = generator_graph(th.generators["g"])
    gh = generator_graph(th.generators["h"])
    fg_h = atom_compose(atom_compose(gf, 0, gg, 0), 1, gh, 0)
    fh_g = atom_compose(atom_compose(gf, 1, gh, 0), 0, gg, 0)
    assert fg_h == fh_g  # boundaries splice in place
    assert fg_h == permute_boundary(fg_h, [0], [0, 1])


def test_bound_key_ignores_port_order(theory):
    th = AtomTheory.parse("f: A A -> B")
    g = generator_graph(th.generators["f"])
    k1 = bound_key(g, ("x", "y"), ("z",))
    k2 = bound_key(permute_boundary(g, [1, 0], [0]), ("y", "x"), ("z",))
    assert k1 == k2
    # crossing the wires is a different map
    k3 = bound_key(permute_boundary(g, [1, 0], [0]), ("x", "y"), ("z",))
    assert k1 != k3


def test_wire_to_wire_composition():
    a = identity_graph("A")
    th = AtomTheory.parse("f: A -> A")
    g = generator_graph(th.generators["f"])
    # wiring through identities on both sides leaves the generator alone
    assert atom_compose(atom_compose(a, 0, g, 0), 0, identity_graph("A"), 0) == g


def test_closed_component_canonicalization():
    th = AtomTheory.parse("u: -> A\nv: A ->")
    gu = generator_graph(th.generators["u"])
    gv = generator_graph(th.generators["v"])
    scalar = atom_compose(gu, 0, gv, 0)
    assert scalar.dom_atoms == () and scalar.cod_atoms == ()
    assert scalar == atom_compose(gu, 0, gv, 0)
