"""Typed terms: formation-rule checking, identities, sequent classification.

A typed term annotates every node with the sequent it proves.  The node
kinds mirror the formation rules: identity on an atom, an atomic map
(a wiring graph bound to channels), cotupling on a domain sum, tupling
on a codomain product, injection into a codomain sum, projection from a
domain product, and cut on one shared internal channel.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import syntax
from .atoms import (
    AtomTheory,
    WiringGraph,
    bound_key,
    generator_graph,
    identity_graph,
    transpose_graph,
)
from .errors import TypeCheckError
from .syntax import (
    Atom,
    Product,
    Protocol,
    RAtomic,
    RCut,
    RIdentity,
    RInput,
    ROutput,
    RawTerm,
    Sequent,
    Sum,
    raw_channels,
)


@dataclass(frozen=True, eq=False)
class TypedTerm:
    sequent: Sequent

    def children(self):
        return ()

    def child(self, i):
        return self.children()[i]

    def at_path(self, path):
        node = self
        for i in path:
            node = node.child(i)
        return node

    def __eq__(self, other):
        return type(self) is type(other) and self._key() == other._key()

    def __hash__(self):
        return hash((type(self).__name__, self._key()))

    def __str__(self):
        return syntax.format_term(self)


@dataclass(frozen=True, eq=False)
class TId(TypedTerm):
    """Identity axiom on an atom."""

    @property
    def in_channel(self):
        return self.sequent.domain[0][0]

    @property
    def out_channel(self):
        return self.sequent.codomain[0][0]

    @property
    def atom(self):
        return self.sequent.domain[0][1].name

    def as_graph(self):
        return (identity_graph(self.atom), (self.in_channel,), (self.out_channel,))

    def _key(self):
        return (self.sequent,)


@dataclass(frozen=True, eq=False)
class TMap(TypedTerm):
    """Atomic map: a wiring graph with each boundary port bound to a channel."""

    graph: WiringGraph
    dom_chs: tuple[str, ...]
    cod_chs: tuple[str, ...]

    def as_graph(self):
        return (self.graph, self.dom_chs, self.cod_chs)

    def display_name(self):
        return self.graph.display_name()

    def _key(self):
        return (self.sequent, bound_key(self.graph, self.dom_chs, self.cod_chs))


@dataclass(frozen=True, eq=False)
class TCot(TypedTerm):
    """Cotupling on a domain sum channel; may have zero branches."""

    channel: str
    branches: tuple[tuple[str, TypedTerm], ...]

    def sorted_branches(self):
        return tuple(sorted(self.branches))

    def branch(self, event):
        for ev, sub in self.branches:
            if ev == event:
                return sub
        raise KeyError(event)

    def children(self):
        return tuple(sub for _, sub in self.sorted_branches())

    def _key(self):
        return (self.sequent, self.channel, self.sorted_branches())


@dataclass(frozen=True, eq=False)
class TTup(TCot):
    """Tupling on a codomain product channel; may have zero branches."""


@dataclass(frozen=True, eq=False)
class TInj(TypedTerm):
    """Injection: output an event into a codomain sum (nonempty)."""

    channel: str
    event: str
    body: TypedTerm

    def children(self):
        return (self.body,)

    def _key(self):
        return (self.sequent, self.channel, self.event, self.body)


@dataclass(frozen=True, eq=False)
class TProj(TInj):
    """Projection: output an event on a domain product (nonempty)."""


@dataclass(frozen=True, eq=False)
class TCut(TypedTerm):
    """Cut on one shared internal channel."""

    channel: str
    left: TypedTerm
    right: TypedTerm

    def children(self):
        return (self.left, self.right)

    def _key(self):
        return (self.sequent, self.channel, self.left, self.right)


def is_stub(t: TypedTerm) -> bool:
    """A nullary cotuple or tuple."""
    return isinstance(t, TCot) and not t.branches


def is_atomic_leaf(t: TypedTerm) -> bool:
    return isinstance(t, (TId, TMap))


def term_channels(t: TypedTerm) -> set:
    """All channel names in the term, including internal cut channels."""
    out = set(t.sequent.channels())
    if isinstance(t, TCut):
        out |= term_channels(t.left) | term_channels(t.right)
    else:
        for c in t.children():
            out |= term_channels(c)
    return out


def term_size(t: TypedTerm) -> int:
    return 1 + sum(term_size(c) for c in t.children())


def is_cut_free(t: TypedTerm) -> bool:
    if isinstance(t, TCut):
        return False
    return all(is_cut_free(c) for c in t.children())


# ---------------------------------------------------------------------------
# Checking


def _bind_atomic(s: Sequent, dom_atoms, cod_atoms, path):
    """Deterministic channel<->port bijection preserving atoms and sides.

    Within each atom, ports keep their order and channels are taken in
    name order.
    """

    def bind(entries, atoms, side):
        groups = {}
        for ch, p in entries:
            if not isinstance(p, Atom):
                raise TypeCheckError(
                    f"atomic map used at non-atomic {side} channel {ch}", path, "atomic"
                )
            groups.setdefault(p.name, []).append(ch)
        out = [None] * len(atoms)
        used = {}
        for i, a in enumerate(atoms):
            chans = groups.get(a, [])
            j = used.get(a, 0)
            if j >= len(chans):
                raise TypeCheckError(
                    f"atomic signature mismatch on {side}: needs {atoms}, sequent has "
                    f"{tuple(p.name for _, p in entries)}",
                    path,
                    "atomic",
                )
            out[i] = chans[j]
            used[a] = j + 1
        if sum(used.values()) != len(entries):
            raise TypeCheckError(
                f"atomic signature mismatch on {side}: needs {atoms}, sequent has "
                f"{tuple(p.name for _, p in entries)}",
                path,
                "atomic",
            )
        return tuple(out)

    return bind(s.domain, dom_atoms, "domain"), bind(s.codomain, cod_atoms, "codomain")


def make_map(s: Sequent, graph: WiringGraph, path=()) -> TMap:
    dom_chs, cod_chs = _bind_atomic(s, graph.dom_atoms, graph.cod_atoms, path)
    return TMap(s, graph, dom_chs, cod_chs)


def check(t: RawTerm, s: Sequent, th: AtomTheory) -> TypedTerm:
    """Check a raw term against a sequent, producing the typed term."""
    return _check(t, s, th, ())


def _check(t: RawTerm, s: Sequent, th: AtomTheory, path) -> TypedTerm:
    if isinstance(t, RIdentity):
        if (
            len(s.domain) == 1
            and len(s.codomain) == 1
            and isinstance(s.domain[0][1], Atom)
            and s.domain[0][1] == s.codomain[0][1]
        ):
            return TId(s)
        raise TypeCheckError(f"identity needs A |- A, got {s}", path, "identity")

    if isinstance(t, RAtomic):
        if th is None or t.name not in th.generators:
            raise TypeCheckError(f"unknown atomic map {t.name!r}", path, "atomic")
        g = th.generators[t.name]
        return make_map(s, generator_graph(g), path)

    if isinstance(t, RInput):
        try:
            side = s.side_of(t.channel)
        except KeyError:
            raise TypeCheckError(f"unknown channel {t.channel!r}", path, "input") from None
        proto = s.proto(t.channel)
        if side == "domain" and isinstance(proto, Sum):
            if t.shape == "parens":
                raise TypeCheckError(
                    f"tuple written on domain sum channel {t.channel}", path, "cotuple"
                )
            cls = TCot
        elif side == "codomain" and isinstance(proto, Product):
            if t.shape == "braces":
                raise TypeCheckError(
                    f"cotuple written on codomain product channel {t.channel}",
                    path,
                    "tuple",
                )
            cls = TTup
        else:
            raise TypeCheckError(
                f"channel {t.channel} ({side} {proto}) does not accept input",
                path,
                "cotuple" if isinstance(proto, Sum) else "tuple",
            )
        have = tuple(ev for ev, _ in t.branches)
        want = proto.events
        if sorted(have) != sorted(want):
            missing = sorted(set(want) - set(have))
            extra = sorted(set(have) - set(want))
            raise TypeCheckError(
                f"branch events {sorted(have)} do not match protocol events "
                f"{sorted(want)} (missing {missing}, extra {extra})",
                path,
                "cotuple" if cls is TCot else "tuple",
            )
        order = {ev: i for i, (ev, _) in enumerate(sorted(t.branches))}
        branches = tuple(
            (ev, _check(sub, s.with_protocol(t.channel, proto.branch(ev)), th,
                        path + (order[ev],)))
            for ev, sub in t.branches
        )
        return cls(s, t.channel, branches)

    if isinstance(t, ROutput):
        try:
            side = s.side_of(t.channel)
        except KeyError:
            raise TypeCheckError(f"unknown channel {t.channel!r}", path, "output") from None
        proto = s.proto(t.channel)
        if side == "codomain" and isinstance(proto, Sum):
            cls = TInj
            rule = "injection"
        elif side == "domain" and isinstance(proto, Product):
            cls = TProj
            rule = "projection"
        else:
            raise TypeCheckError(
                f"channel {t.channel} ({side} {proto}) does not accept output",
                path,
                "output",
            )
        if not proto.branches:
            raise TypeCheckError(
                f"{rule} into empty index set on {t.channel}", path, rule
            )
        if t.event not in proto.events:
            raise TypeCheckError(
                f"event {t.event!r} not a branch of {t.channel}:{proto}", path, rule
            )
        body = _check(
            t.body, s.with_protocol(t.channel, proto.branch(t.event)), th, path + (0,)
        )
        return cls(s, t.channel, t.event, body)

    if isinstance(t, RCut):
        return _check_cut(t, s, th, path)

    raise TypeCheckError(f"unknown raw node {t!r}", path)


def _check_cut(t: RCut, s: Sequent, th, path) -> TypedTerm:
    gamma = t.out_channel
    right_raw = t.right
    if t.in_channel != gamma:
        right_raw = _raw_rename(right_raw, t.in_channel, gamma)
    if gamma in s.channels():
        raise TypeCheckError(
            f"cut channel {gamma} collides with an ambient channel", path, "cut"
        )
    lmention = raw_channels(t.left) - {gamma}
    rmention = raw_channels(right_raw) - {gamma}
    shared = lmention & rmention
    if shared:
        raise TypeCheckError(
            f"channels {sorted(shared)} used on both sides of the cut", path, "cut"
        )
    ambient = set(s.channels())
    if not lmention <= ambient or not rmention <= ambient:
        bad = sorted((lmention | rmention) - ambient)
        raise TypeCheckError(f"unknown channels {bad} under cut", path, "cut")
    free = sorted(ambient - lmention - rmention)
    # Channels mentioned by neither side can sit on either side of the
    # cut; try the assignments deterministically, left side first.
    last_err = None
    for mask in range(2 ** len(free)):
        to_left = lmention | {c for i, c in enumerate(free) if not (mask >> i) & 1}
        to_right = rmention | {c for i, c in enumerate(free) if (mask >> i) & 1}
        ls = Sequent(
            tuple((c, p) for c, p in s.domain if c in to_left),
            tuple((c, p) for c, p in s.codomain if c in to_left)
            + ((gamma, t.protocol),),
        )
        rs = Sequent(
            tuple((c, p) for c, p in s.domain if c in to_right)
            + ((gamma, t.protocol),),
            tuple((c, p) for c, p in s.codomain if c in to_right),
        )
        try:
            left = _check(t.left, ls, th, path + (0,))
            right = _check(right_raw, rs, th, path + (1,))
            return TCut(s, gamma, left, right)
        except TypeCheckError as e:
            last_err = e
    raise last_err


def _raw_rename(t: RawTerm, old, new) -> RawTerm:
    if isinstance(t, (RIdentity, RAtomic)):
        return t
    if isinstance(t, RInput):
        return RInput(
            new if t.channel == old else t.channel,
            tuple((ev, _raw_rename(sub, old, new)) for ev, sub in t.branches),
            t.shape,
        )
    if isinstance(t, ROutput):
        return ROutput(
            new if t.channel == old else t.channel, t.event, _raw_rename(t.body, old, new)
        )
    if isinstance(t, RCut):
        if old in (t.out_channel, t.in_channel):
            return t
        return RCut(
            t.out_channel,
            _raw_rename(t.left, old, new),
            t.in_channel,
            _raw_rename(t.right, old, new),
            t.protocol,
        )
    raise TypeError(t)


def assert_well_typed(t: TypedTerm):
    """Re-validate every annotation of an already-typed term."""
    s = t.sequent
    if isinstance(t, TId):
        ok = (
            len(s.domain) == 1
            and len(s.codomain) == 1
            and isinstance(s.domain[0][1], Atom)
            and s.domain[0][1] == s.codomain[0][1]
        )
        if not ok:
            raise TypeCheckError(f"bad identity annotation {s}", rule="identity")
        return
    if isinstance(t, TMap):
        dom_chs, cod_chs = _bind_atomic(s, t.graph.dom_atoms, t.graph.cod_atoms, ())
        if sorted(dom_chs) != sorted(t.dom_chs) or sorted(cod_chs) != sorted(t.cod_chs):
            raise TypeCheckError("atomic map bound to channels outside its sequent")
        return
    if isinstance(t, TCot):
        side = "codomain" if isinstance(t, TTup) else "domain"
        proto = s.proto(t.channel)
        if s.side_of(t.channel) != side or not isinstance(
            proto, Product if isinstance(t, TTup) else Sum
        ):
            raise TypeCheckError(f"bad (co)tuple on {t.channel}:{proto}")
        if sorted(ev for ev, _ in t.branches) != sorted(proto.events):
            raise TypeCheckError(f"branch mismatch on {t.channel}")
        for ev, sub in t.branches:
            if sub.sequent != s.with_protocol(t.channel, proto.branch(ev)):
                raise TypeCheckError(f"bad branch annotation at {t.channel}[{ev}]")
            assert_well_typed(sub)
        return
    if isinstance(t, TInj):
        side = "domain" if isinstance(t, TProj) else "codomain"
        proto = s.proto(t.channel)
        if s.side_of(t.channel) != side or not isinstance(
            proto, Product if isinstance(t, TProj) else Sum
        ):
            raise TypeCheckError(f"bad output on {t.channel}:{proto}")
        if not proto.branches or t.event not in proto.events:
            raise TypeCheckError(f"bad output event {t.channel}[{t.event}]")
        if t.body.sequent != s.with_protocol(t.channel, proto.branch(t.event)):
            raise TypeCheckError(f"bad body annotation at {t.channel}[{t.event}]")
        assert_well_typed(t.body)
        return
    if isinstance(t, TCut):
        ls, rs = t.left.sequent, t.right.sequent
        if t.channel not in ls.cod_map or t.channel not in rs.dom_map:
            raise TypeCheckError(f"cut channel {t.channel} not shared")
        if ls.cod_map[t.channel] != rs.dom_map[t.channel]:
            raise TypeCheckError(f"cut protocols differ on {t.channel}")
        lks = set(ls.channels()) - {t.channel}
        rks = set(rs.channels()) - {t.channel}
        if lks & rks:
            raise TypeCheckError("cut sides share channels")
        merged = ls.drop(t.channel).merge(rs.drop(t.channel))
        if merged != s:
            raise TypeCheckError("cut annotation does not merge the sides")
        assert_well_typed(t.left)
        assert_well_typed(t.right)
        return
    raise TypeCheckError(f"unknown node {t!r}")


# ---------------------------------------------------------------------------
# Identity terms


def identity_term(p: Protocol, in_ch: str = "in'", out_ch: str = "out'") -> TypedTerm:
    """The inductively built identity proof of in_ch:p |- out_ch:p."""
    s = Sequent(((in_ch, p),), ((out_ch, p),))
    if isinstance(p, Atom):
        return TId(s)
    if isinstance(p, Sum):
        branches = tuple(
            (
                ev,
                TInj(
                    s.with_protocol(in_ch, sub),
                    out_ch,
                    ev,
                    identity_term(sub, in_ch, out_ch),
                ),
            )
            for ev, sub in p.sorted_branches()
        )
        return TCot(s, in_ch, branches)
    branches = tuple(
        (
            ev,
            TProj(
                s.with_protocol(out_ch, sub),
                in_ch,
                ev,
                identity_term(sub, in_ch, out_ch),
            ),
        )
        for ev, sub in p.sorted_branches()
    )
    return TTup(s, out_ch, branches)


# ---------------------------------------------------------------------------
# Sequent classification


@dataclass(frozen=True)
class Classification:
    has_source_unit: bool
    output_sequent: bool
    output_index: frozenset  # of (channel, event)


def classify(s: Sequent) -> Classification:
    has_source_unit = any(
        isinstance(p, Sum) and not p.branches for _, p in s.domain
    ) or any(isinstance(p, Product) and not p.branches for _, p in s.codomain)
    out_ok = all(isinstance(p, (Atom, Product)) for _, p in s.domain) and all(
        isinstance(p, (Atom, Sum)) for _, p in s.codomain
    )
    compound = any(not isinstance(p, Atom) for _, p in s.domain + s.codomain)
    index = set()
    for ch, p in s.domain:
        if isinstance(p, Product):
            index.update((ch, ev) for ev in p.events)
    for ch, p in s.codomain:
        if isinstance(p, Sum):
            index.update((ch, ev) for ev in p.events)
    return Classification(has_source_unit, out_ok and compound, frozenset(index))


# ---------------------------------------------------------------------------
# Bounded exhaustive enumeration of cut-free terms


def enumerate_cut_free(s: Sequent, th: AtomTheory, max_nodes: int):
    """Yield every cut-free typed term of s with at most max_nodes nodes.

    Deterministic: leaves first, then cotuples, tuples, injections and
    projections, channels and events in name order.
    """
    yield from _enum(s, th, max_nodes)


def _enum(s: Sequent, th: AtomTheory, budget: int):
    if budget <= 0:
        return
    if s.all_atomic():
        if (
            len(s.domain) == 1
            and len(s.codomain) == 1
            and s.domain[0][1] == s.codomain[0][1]
        ):
            yield TId(s)
        dom_atoms = sorted(p.name for _, p in s.domain)
        cod_atoms = sorted(p.name for _, p in s.codomain)
        if th is not None:
            for name in sorted(th.generators):
                g = th.generators[name]
                if sorted(g.dom) == dom_atoms and sorted(g.cod) == cod_atoms:
                    yield make_map(s, generator_graph(g))
        return
    # cotuples on domain sums
    for ch, p in s.domain:
        if isinstance(p, Sum):
            for branches in _enum_branches(s, th, ch, p.sorted_branches(), budget - 1):
                yield TCot(s, ch, branches)
    # tuples on codomain products
    for ch, p in s.codomain:
        if isinstance(p, Product):
            for branches in _enum_branches(s, th, ch, p.sorted_branches(), budget - 1):
                yield TTup(s, ch, branches)
    # injections into codomain sums
    for ch, p in s.codomain:
        if isinstance(p, Sum) and p.branches:
            for ev, sub in p.sorted_branches():
                for body in _enum(s.with_protocol(ch, sub), th, budget - 1):
                    yield TInj(s, ch, ev, body)
    # projections from domain products
    for ch, p in s.domain:
        if isinstance(p, Product) and p.branches:
            for ev, sub in p.sorted_branches():
                for body in _enum(s.with_protocol(ch, sub), th, budget - 1):
                    yield TProj(s, ch, ev, body)


def _enum_branches(s, th, ch, branch_protos, budget):
    if not branch_protos:
        yield ()
        return
    (ev, sub), rest = branch_protos[0], branch_protos[1:]
    sub_sequent = s.with_protocol(ch, sub)
    for size in range(1, budget - len(rest) + 1):
        for first in _enum(sub_sequent, th, size):
            if term_size(first) != size:
                continue
            for others in _enum_branches(s, th, ch, rest, budget - size):
                yield ((ev, first),) + others


# ---------------------------------------------------------------------------
# Duality


def dual_sequent(s: Sequent) -> Sequent:
    return Sequent(
        tuple((ch, syntax.dual(p)) for ch, p in s.codomain),
        tuple((ch, syntax.dual(p)) for ch, p in s.domain),
    )


def dualize(t: TypedTerm, genmap=None) -> TypedTerm:
    """The dual proof: swap sides, sums with products, inputs stay inputs.

    genmap maps each generator to one with the transposed signature;
    identities need no map.
    """
    s = dual_sequent(t.sequent)
    if isinstance(t, TId):
        return TId(s)
    if isinstance(t, TMap):
        if genmap is None:
            raise TypeCheckError("dualizing an atomic map needs a generator map")
        return TMap(s, transpose_graph(t.graph, genmap), t.cod_chs, t.dom_chs)
    if isinstance(t, TTup):
        return TCot(s, t.channel, tuple((ev, dualize(b, genmap)) for ev, b in t.branches))
    if isinstance(t, TCot):
        return TTup(s, t.channel, tuple((ev, dualize(b, genmap)) for ev, b in t.branches))
    if isinstance(t, TProj):
        return TInj(s, t.channel, t.event, dualize(t.body, genmap))
    if isinstance(t, TInj):
        return TProj(s, t.channel, t.event, dualize(t.body, genmap))
    if isinstance(t, TCut):
        return TCut(s, t.channel, dualize(t.right, genmap), dualize(t.left, genmap))
    raise TypeError(t)
