"""Shared test utilities: independent oracles and corpus generators."""

from __future__ import annotations

import random

from sigmapi import (
    AtomTheory,
    Generator,
    Sequent,
    all_conversion_moves,
    check,
    cut,
    enumerate_cut_free,
    parse_sequent,
    parse_term,
)
from sigmapi.syntax import Atom, Product, Sum
from sigmapi.typecheck import TypedTerm, make_map
from sigmapi.atoms import generator_graph
from sigmapi.typecheck import TCot, TId, TInj, TProj, TTup


def typed(term_text, sequent_text, theory=None, syntax="compact"):
    s = parse_sequent(sequent_text)
    return check(parse_term(term_text, s, theory, syntax=syntax), s, theory)


def enum_terms(sequent_text, max_nodes, theory=None):
    return list(enumerate_cut_free(parse_sequent(sequent_text), theory, max_nodes))


def conversion_closure(t: TypedTerm, cap=200_000):
    """Exhaustive closure of a term under single conversions: the
    independent oracle for the decision procedure."""
    seen = {t}
    frontier = [t]
    while frontier:
        nxt = []
        for u in frontier:
            for _, _, _, _, v in all_conversion_moves(u):
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        if len(seen) > cap:
            raise RuntimeError("conversion closure exceeded the cap")
        frontier = nxt
    return seen


# ---------------------------------------------------------------------------
# The one-atom theory with a generator for every small signature, so
# random generation never dead-ends at an atomic residual.

UNIVERSAL_ARITY = 4


def universal_theory(arity=UNIVERSAL_ARITY):
    gens = []
    for m in range(arity + 1):
        for n in range(arity + 1):
            gens.append(Generator(f"g{m}_{n}", ("A",) * m, ("A",) * n))
    return AtomTheory(atoms={"A"}, generators=gens)


def universal_genmap(theory):
    """Transposition map on the universal theory (it is self-dual)."""

    def genmap(g):
        return theory.generators[f"g{len(g.cod)}_{len(g.dom)}"]

    return genmap


# ---------------------------------------------------------------------------
# Random corpus of typed terms with cuts


def random_protocol(rng: random.Random, depth: int, max_branches: int = 3):
    if depth <= 0 or rng.random() < 0.35:
        return Atom("A")
    cls = Sum if rng.random() < 0.5 else Product
    n = rng.randint(0 if rng.random() < 0.12 else 1, max_branches)
    evs = [f"e{i}" for i in range(n)]
    return cls(tuple((ev, random_protocol(rng, depth - 1, max_branches)) for ev in evs))


def random_sequent(rng: random.Random, extra, depth=2):
    names = iter(["a", "b", "c", "d", "e", "f"])
    dom = tuple((next(names), random_protocol(rng, depth)) for _ in range(rng.randint(1, 2)))
    cod = tuple((next(names), random_protocol(rng, depth)) for _ in range(rng.randint(1, 2)))
    dom += tuple(extra.get("domain", ()))
    cod += tuple(extra.get("codomain", ()))
    return Sequent(dom, cod)


def random_cut_free(rng: random.Random, s: Sequent, th: AtomTheory) -> TypedTerm:
    """A random complete term; recursion always shrinks the sequent."""
    if s.all_atomic():
        dom_atoms = sorted(p.name for _, p in s.domain)
        cod_atoms = sorted(p.name for _, p in s.codomain)
        names = [
            name
            for name, g in sorted(th.generators.items())
            if sorted(g.dom) == dom_atoms and sorted(g.cod) == cod_atoms
        ]
        if (
            len(s.domain) == 1
            and len(s.codomain) == 1
            and s.domain[0][1] == s.codomain[0][1]
            and rng.random() < 0.5
        ):
            return TId(s)
        return make_map(s, generator_graph(th.generators[rng.choice(names)]))
    moves = []
    for ch, p in s.domain:
        if isinstance(p, Sum):
            moves.append(("cot", ch, p))
        elif isinstance(p, Product) and p.branches:
            moves.append(("proj", ch, p))
    for ch, p in s.codomain:
        if isinstance(p, Product):
            moves.append(("tup", ch, p))
        elif isinstance(p, Sum) and p.branches:
            moves.append(("inj", ch, p))
    kind, ch, p = rng.choice(moves)
    if kind in ("cot", "tup"):
        cls = TCot if kind == "cot" else TTup
        branches = tuple(
            (ev, random_cut_free(rng, s.with_protocol(ch, sub), th))
            for ev, sub in p.sorted_branches()
        )
        return cls(s, ch, branches)
    ev, sub = rng.choice(p.sorted_branches())
    cls = TInj if kind == "inj" else TProj
    return cls(s, ch, ev, random_cut_free(rng, s.with_protocol(ch, sub), th))


def random_term_with_cuts(rng: random.Random, th: AtomTheory, max_cuts=3):
    """A typed term assembled from random cut-free pieces joined by cuts."""
    shared = random_protocol(rng, rng.randint(0, 2))
    left_seq = random_sequent(rng, {"codomain": (("z", shared),)})
    t = random_cut_free(rng, left_seq, th)
    n_cuts = rng.randint(0, max_cuts)
    for i in range(n_cuts):
        cods = [ch for ch, _ in t.sequent.codomain]
        if not cods:
            break
        ch = rng.choice(cods)
        proto = t.sequent.cod_map[ch]
        names = iter(["p", "q", "r", "s", "t", "u"])
        right_seq = Sequent(
            ((f"w{i}", proto),)
            + tuple(
                (f"{next(names)}{i}", random_protocol(rng, 1))
                for _ in range(rng.randint(0, 1))
            ),
            tuple(
                (f"{next(names)}{i}", random_protocol(rng, 1))
                for _ in range(rng.randint(1, 2))
            ),
        )
        g = random_cut_free(rng, right_seq, th)
        t = cut(t, ch, g, f"w{i}")
    return t


def build_corpus(seed: int, size: int, th: AtomTheory):
    rng = random.Random(seed)
    return [random_term_with_cuts(rng, th) for _ in range(size)]
