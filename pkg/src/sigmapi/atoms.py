"""The base theory of atoms: generators and their wiring-graph composites.

A composite map between lists of atoms is represented by a wiring graph:
generator instances as nodes, internal edges joining one codomain port
of a node to one domain port of another, and an ordered boundary of
unconnected ports.  Pass-through wires (identities on atoms) are kept
explicitly so that the identity map has a graph too.

Canonical form relabels the internal nodes by a breadth-first traversal
from the boundary ports (domain left to right, then codomain); equality
of graphs is equality of canonical forms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import CompositionError, ParseError
from .syntax import ATOM_RE, IDENT_RE


@dataclass(frozen=True)
class Generator:
    name: str
    dom: tuple[str, ...]
    cod: tuple[str, ...]

    def __str__(self):
        return f"{self.name}: {' '.join(self.dom)} -> {' '.join(self.cod)}"


class AtomTheory:
    """A set of atoms plus named generators between atom lists."""

    def __init__(self, atoms=(), generators=()):
        self.generators = {}
        self.atoms = set(atoms)
        for g in generators:
            self.add_generator(g)

    def add_atom(self, name):
        if not ATOM_RE.fullmatch(name):
            raise ParseError(f"bad atom name {name!r}")
        self.atoms.add(name)

    def add_generator(self, g: Generator):
        if g.name in self.generators:
            raise ParseError(f"duplicate generator name {g.name!r}")
        for a in g.dom + g.cod:
            self.add_atom(a)
        self.generators[g.name] = g

    @classmethod
    def parse(cls, text: str) -> "AtomTheory":
        """One generator per line: ``name: ATOM* -> ATOM*``.

        Lines that are blank, comments (#) or a bare atom name just
        declare atoms.
        """
        th = cls()
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if ":" not in line:
                for a in line.split():
                    th.add_atom(a)
                continue
            name, _, sig = line.partition(":")
            name = name.strip()
            if not IDENT_RE.fullmatch(name):
                raise ParseError(f"line {lineno}: bad generator name {name!r}")
            if "->" not in sig:
                raise ParseError(f"line {lineno}: missing '->'")
            dom_s, _, cod_s = sig.partition("->")
            th.add_generator(Generator(name, tuple(dom_s.split()), tuple(cod_s.split())))
        return th

    def __str__(self):
        lines = [str(g) for _, g in sorted(self.generators.items())]
        loose = self.atoms - {a for g in self.generators.values() for a in g.dom + g.cod}
        if loose:
            lines.append(" ".join(sorted(loose)))
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Wiring graphs
#
# Boundary ports are ('n', node_index, port_index) for an open generator
# port or ('w', wire_index) for a pass-through wire.  Edges run from a
# codomain port of one node to a domain port of another.


@dataclass(frozen=True, eq=False)
class WiringGraph:
    nodes: tuple[Generator, ...]
    edges: frozenset  # of (src_node, src_port, dst_node, dst_port)
    wires: tuple[str, ...]  # atom carried by each pass-through wire
    dom: tuple  # boundary ports, ordered
    cod: tuple

    def dom_atom(self, i):
        return self._port_atom(self.dom[i], "dom")

    def cod_atom(self, i):
        return self._port_atom(self.cod[i], "cod")

    def _port_atom(self, port, side):
        if port[0] == "w":
            return self.wires[port[1]]
        _, n, p = port
        sig = self.nodes[n].dom if side == "dom" else self.nodes[n].cod
        return sig[p]

    @property
    def dom_atoms(self):
        return tuple(self.dom_atom(i) for i in range(len(self.dom)))

    @property
    def cod_atoms(self):
        return tuple(self.cod_atom(i) for i in range(len(self.cod)))

    def display_name(self):
        if not self.nodes and len(self.wires) == 1:
            return f"1_{self.wires[0]}"
        if not self.nodes:
            return "1"
        return ";".join(g.name for g in self.nodes)

    def __eq__(self, other):
        return isinstance(other, WiringGraph) and canonical_key(self) == canonical_key(other)

    def __hash__(self):
        return hash(canonical_key(self))


def identity_graph(atom: str) -> WiringGraph:
    return WiringGraph((), frozenset(), (atom,), (("w", 0),), (("w", 0),))


def generator_graph(g: Generator) -> WiringGraph:
    return WiringGraph(
        (g,),
        frozenset(),
        (),
        tuple(("n", 0, i) for i in range(len(g.dom))),
        tuple(("n", 0, i) for i in range(len(g.cod))),
    )


def _shift_port(port, dn, dw):
    if port[0] == "w":
        return ("w", port[1] + dw)
    return ("n", port[1] + dn, port[2])


def atom_compose(f: WiringGraph, out_port: int, g: WiringGraph, in_port: int) -> WiringGraph:
    """Glue f's codomain port to g's domain port; atoms must match.

    Boundaries splice in place: g's domain replaces the consumed port
    inside f's codomain and vice versa, so identity, associativity and
    the interchange law hold on the nose.
    """
    if f.cod_atom(out_port) != g.dom_atom(in_port):
        raise CompositionError(
            f"atom mismatch at ports: {f.cod_atom(out_port)} vs {g.dom_atom(in_port)}"
        )
    dn, dw = len(f.nodes), len(f.wires)
    nodes = f.nodes + g.nodes
    wires = list(f.wires + g.wires)
    edges = set(f.edges) | {
        (sn + dn, sp, tn + dn, tp) for (sn, sp, tn, tp) in g.edges
    }
    fdom = list(f.dom)
    fcod = list(f.cod)
    gdom = [_shift_port(p, dn, dw) for p in g.dom]
    gcod = [_shift_port(p, dn, dw) for p in g.cod]
    a = fcod[out_port]
    b = gdom[in_port]

    def _replace(ports, old, new):
        return [new if p == old else p for p in ports]

    if a[0] == "n" and b[0] == "n":
        edges.add((a[1], a[2], b[1], b[2]))
    elif a[0] == "w" and b[0] == "n":
        fdom = _replace(fdom, a, b)
    elif a[0] == "n" and b[0] == "w":
        gcod = _replace(gcod, b, a)
    else:  # wire to wire: a single pass-through from f's domain to g's codomain
        fdom = _replace(fdom, a, b)
    dom = gdom[:in_port] + fdom + gdom[in_port + 1 :]
    cod = fcod[:out_port] + gcod + fcod[out_port + 1 :]
    graph = WiringGraph(nodes, frozenset(edges), tuple(wires), tuple(dom), tuple(cod))
    return canonicalize_graph(graph)


def _renumber(graph: WiringGraph, node_order, wire_order) -> WiringGraph:
    node_new = {old: new for new, old in enumerate(node_order)}
    wire_new = {old: new for new, old in enumerate(wire_order)}

    def port(p):
        if p[0] == "w":
            return ("w", wire_new[p[1]])
        return ("n", node_new[p[1]], p[2])

    return WiringGraph(
        tuple(graph.nodes[i] for i in node_order),
        frozenset(
            (node_new[sn], sp, node_new[tn], tp) for (sn, sp, tn, tp) in graph.edges
        ),
        tuple(graph.wires[i] for i in wire_order),
        tuple(port(p) for p in graph.dom),
        tuple(port(p) for p in graph.cod),
    )


def _traversal_order(graph: WiringGraph):
    """Stable node order reachable from the boundary, then leftovers."""
    into = {}  # (node, dom_port) -> (src node, src port)
    outof = {}
    for sn, sp, tn, tp in sorted(graph.edges):
        outof[(sn, sp)] = tn
        into[(tn, tp)] = sn
    order = []
    seen = set()

    def visit(n):
        if n in seen:
            return
        seen.add(n)
        order.append(n)

    for p in graph.dom + graph.cod:
        if p[0] == "n":
            visit(p[1])
    i = 0
    while i < len(order):
        n = order[i]
        i += 1
        for p in range(len(graph.nodes[n].dom)):
            if (n, p) in into:
                visit(into[(n, p)])
        for p in range(len(graph.nodes[n].cod)):
            if (n, p) in outof:
                visit(outof[(n, p)])
    rest = [n for n in range(len(graph.nodes)) if n not in seen]
    return order, rest


def _encode(graph: WiringGraph):
    return (
        tuple((g.name, g.dom, g.cod) for g in graph.nodes),
        tuple(sorted(graph.edges)),
        graph.wires,
        graph.dom,
        graph.cod,
    )


def canonicalize_graph(graph: WiringGraph) -> WiringGraph:
    """Renumber nodes by boundary traversal and wires by first appearance.

    Closed components not reachable from the boundary are ordered by the
    minimal encoding over their permutations (they are tiny in practice).
    """
    order, rest = _traversal_order(graph)
    wire_order = []
    for p in graph.dom + graph.cod:
        if p[0] == "w" and p[1] not in wire_order:
            wire_order.append(p[1])
    if not rest:
        return _renumber(graph, order, wire_order)
    if len(rest) > 6:
        raise CompositionError("closed component too large to canonicalize")
    best = None
    for perm in itertools.permutations(rest):
        cand = _renumber(graph, order + list(perm), wire_order)
        key = _encode(cand)
        if best is None or key < best[0]:
            best = (key, cand)
    return best[1]


def canonical_key(graph: WiringGraph):
    key = graph.__dict__.get("_ckey")
    if key is None:
        key = _encode(canonicalize_graph(graph))
        object.__setattr__(graph, "_ckey", key)
    return key


def permute_boundary(graph: WiringGraph, dom_perm, cod_perm) -> WiringGraph:
    """Reorder boundary ports; perm[i] gives the old index of new port i."""
    return WiringGraph(
        graph.nodes,
        graph.edges,
        graph.wires,
        tuple(graph.dom[i] for i in dom_perm),
        tuple(graph.cod[i] for i in cod_perm),
    )


def bound_key(graph: WiringGraph, dom_chs, cod_chs):
    """Canonical key of a graph whose boundary ports are bound to channels.

    The boundary is reordered by channel name first, so the key does not
    depend on how ports happened to be ordered.
    """
    dperm = sorted(range(len(dom_chs)), key=lambda i: dom_chs[i])
    cperm = sorted(range(len(cod_chs)), key=lambda i: cod_chs[i])
    g = permute_boundary(graph, dperm, cperm)
    return (
        canonical_key(g),
        tuple(sorted(dom_chs)),
        tuple(sorted(cod_chs)),
    )


def transpose_graph(graph: WiringGraph, genmap) -> WiringGraph:
    """Swap the two sides of a graph, mapping each generator through genmap.

    genmap sends a generator to one with the opposite signature; used to
    dualize terms.
    """
    nodes = tuple(genmap(g) for g in graph.nodes)
    for old, new in zip(graph.nodes, nodes):
        if new.dom != old.cod or new.cod != old.dom:
            raise CompositionError(f"genmap does not transpose {old.name}")
    return WiringGraph(
        nodes,
        frozenset((tn, tp, sn, sp) for (sn, sp, tn, tp) in graph.edges),
        graph.wires,
        graph.cod,
        graph.dom,
    )
