"""The entailment-set process semantics.

Protocol states get roles (source, sink, flow) that police which event
sequences are legal on a channel.  A behaviour records, per channel, a
legal sequence of direction-tagged events; its frontier is the residual
sequent.  An entailment licenses one output event or one atomic map
after an antecedent behaviour.  Sets of entailments satisfying EP-1 to
EP-3 are proto-processes; satisfying all of EP-1 to EP-7, extensional
processes.  Terms translate to proto-processes; closure under EP-4 to
EP-7 reaches the unique extensional process above them.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import lru_cache

from .atoms import WiringGraph, atom_compose, bound_key
from .errors import SigmaPiError, SizeError
from .rewrite import fresh_name
from .syntax import Atom, Product, Protocol, Sequent, Sum
from .typecheck import (
    TCot,
    TId,
    TInj,
    TMap,
    TProj,
    TypedTerm,
    identity_term,
    is_atomic_leaf,
    is_cut_free,
)

IN, OUT = "i", "o"

# Finiteness guard for behaviour enumeration and closure.
MAX_BEHAVIOURS = 100_000


class Role(enum.Enum):
    SOURCE = "source"
    SINK = "sink"
    FLOW = "flow"


@lru_cache(maxsize=None)
def role(p: Protocol, side: str) -> Role:
    """Inductive role of a protocol on a domain or codomain channel."""
    if side == "codomain":
        r = role(p, "domain")
        if r is Role.SOURCE:
            return Role.SINK
        if r is Role.SINK:
            return Role.SOURCE
        return Role.FLOW
    if isinstance(p, Atom):
        return Role.FLOW
    sub = [role(q, "domain") for _, q in p.branches]
    if isinstance(p, Sum):
        if all(r is Role.SOURCE for r in sub):
            return Role.SOURCE
        if sum(r is Role.SINK for r in sub) == 1 and all(
            r in (Role.SINK, Role.SOURCE) for r in sub
        ):
            return Role.SINK
        return Role.FLOW
    if not sub:
        return Role.SINK
    if sum(r is Role.SOURCE for r in sub) == 1 and all(
        r in (Role.SINK, Role.SOURCE) for r in sub
    ):
        return Role.SOURCE
    if all(r is Role.SINK for r in sub):
        return Role.SINK
    return Role.FLOW


def sequent_has_source(s: Sequent) -> bool:
    return any(role(p, "domain") is Role.SOURCE for _, p in s.domain) or any(
        role(p, "codomain") is Role.SOURCE for _, p in s.codomain
    )


def state_kind(p: Protocol, side: str) -> str:
    """'atomic', 'input' or 'output': who moves next at this state."""
    if isinstance(p, Atom):
        return "atomic"
    if isinstance(p, Sum):
        return "input" if side == "domain" else "output"
    return "output" if side == "domain" else "input"


def _legal_steps(p: Protocol, side: str):
    """Legal (direction, event, next state) transitions from state p."""
    if isinstance(p, Atom) or role(p, side) is not Role.FLOW:
        return
    direction = IN if state_kind(p, side) == "input" else OUT
    for ev, q in p.branches:
        r = role(q, side)
        if direction == IN and r is Role.SOURCE:
            continue
        if direction == OUT and r is Role.SINK:
            continue
        yield direction, ev, q


def channel_dual(seq):
    """A channel behaviour with inputs and outputs exchanged."""
    return tuple((OUT if d == IN else IN, ev) for d, ev in seq)


# ---------------------------------------------------------------------------
# Behaviours


@dataclass(frozen=True)
class Behaviour:
    """Per-channel legal event sequences over a sequent."""

    sequent: Sequent
    events: tuple  # sorted ((channel, ((dir, ev), ...)), ...), all channels

    @classmethod
    def empty(cls, s: Sequent) -> "Behaviour":
        return cls(s, tuple((ch, ()) for ch in sorted(s.channels())))

    @classmethod
    def make(cls, s: Sequent, table: dict) -> "Behaviour":
        evs = tuple((ch, tuple(table.get(ch, ()))) for ch in sorted(s.channels()))
        b = cls(s, evs)
        if not b.is_legal():
            raise SigmaPiError(f"illegal behaviour {table} over {s}")
        return b

    @property
    def table(self):
        return dict(self.events)

    def seq_for(self, ch):
        return self.table[ch]

    def _with(self, ch, seq):
        return Behaviour(
            self.sequent,
            tuple((c, seq if c == ch else s) for c, s in self.events),
        )

    def append(self, ch, d, ev):
        return self._with(ch, self.seq_for(ch) + ((d, ev),))

    def prepend(self, ch, d, ev):
        return self._with(ch, ((d, ev),) + self.seq_for(ch))

    def drop_last(self, ch):
        return self._with(ch, self.seq_for(ch)[:-1])

    def drop_channel(self, ch):
        return Behaviour(
            self.sequent.drop(ch), tuple((c, s) for c, s in self.events if c != ch)
        )

    def parallel(self, other: "Behaviour") -> "Behaviour":
        merged = self.sequent.merge(other.sequent)
        return Behaviour(merged, tuple(sorted(self.events + other.events)))

    def size(self):
        return sum(len(s) for _, s in self.events)

    def is_legal(self) -> bool:
        for ch, seq in self.events:
            side = self.sequent.side_of(ch)
            p = self.sequent.proto(ch)
            for d, ev in seq:
                step = next(
                    ((d2, e2, q) for d2, e2, q in _legal_steps(p, side) if e2 == ev),
                    None,
                )
                if step is None or step[0] != d:
                    return False
                p = step[2]
        return True

    def frontier_proto(self, ch) -> Protocol:
        p = self.sequent.proto(ch)
        for _, ev in self.seq_for(ch):
            p = p.branch(ev)
        return p

    def frontier(self) -> Sequent:
        return Sequent(
            tuple((ch, self.frontier_proto(ch)) for ch, _ in self.sequent.domain),
            tuple((ch, self.frontier_proto(ch)) for ch, _ in self.sequent.codomain),
        )

    def is_antecedent(self) -> bool:
        for ch in self.sequent.channels():
            side = self.sequent.side_of(ch)
            if role(self.frontier_proto(ch), side) is Role.SOURCE:
                return False
        return True

    def is_saturated(self) -> bool:
        """Every frontier state atomic, sink, or an output flow state."""
        for ch in self.sequent.channels():
            side = self.sequent.side_of(ch)
            p = self.frontier_proto(ch)
            if isinstance(p, Atom):
                continue
            r = role(p, side)
            if r is Role.SINK:
                continue
            if r is Role.FLOW and state_kind(p, side) == "output":
                continue
            return False
        return True

    def prefix(self, other: "Behaviour") -> bool:
        if self.sequent != other.sequent:
            return False
        for (c1, s1), (c2, s2) in zip(self.events, other.events):
            if s1 != s2[: len(s1)]:
                return False
        return True

    def _prefix_dir(self, other, d) -> bool:
        if not self.prefix(other):
            return False
        for (c, s1), (_, s2) in zip(self.events, other.events):
            if any(step[0] != d for step in s2[len(s1):]):
                return False
        return True

    def prefix_i(self, other) -> bool:
        return self._prefix_dir(other, IN)

    def prefix_o(self, other) -> bool:
        return self._prefix_dir(other, OUT)

    def compatible(self, other: "Behaviour") -> bool:
        if self.sequent != other.sequent:
            return False
        for (c, s1), (_, s2) in zip(self.events, other.events):
            n = min(len(s1), len(s2))
            if s1[:n] != s2[:n]:
                return False
        return True

    def join(self, other: "Behaviour") -> "Behaviour":
        if not self.compatible(other):
            raise SigmaPiError("joining incompatible behaviours")
        return Behaviour(
            self.sequent,
            tuple(
                (c1, s1 if len(s1) >= len(s2) else s2)
                for (c1, s1), (_, s2) in zip(self.events, other.events)
            ),
        )

    def dual(self) -> "Behaviour":
        """Same events with directions flipped, over the flipped sequent."""
        flipped = Sequent(tuple(self.sequent.codomain), tuple(self.sequent.domain))
        return Behaviour(flipped, tuple((c, channel_dual(s)) for c, s in self.events))

    def legal_inputs(self):
        """Legal input events (channel, event) at the frontier."""
        out = []
        for ch in sorted(self.sequent.channels()):
            side = self.sequent.side_of(ch)
            p = self.frontier_proto(ch)
            for d, ev, _ in _legal_steps(p, side):
                if d == IN:
                    out.append((ch, ev))
        return out

    def legal_outputs(self):
        out = []
        for ch in sorted(self.sequent.channels()):
            side = self.sequent.side_of(ch)
            p = self.frontier_proto(ch)
            for d, ev, _ in _legal_steps(p, side):
                if d == OUT:
                    out.append((ch, ev))
        return out

    def rename(self, subst):
        return Behaviour(
            self.sequent.rename(subst),
            tuple(sorted((subst.get(c, c), s) for c, s in self.events)),
        )

    def __str__(self):
        cells = []
        for ch, seq in self.events:
            evs = ",".join((("!" + e) if d == OUT else e) for d, e in seq)
            cells.append(f"{ch}:[{evs}]")
        return "(" + " ".join(cells) + ")"


# ---------------------------------------------------------------------------
# Entailments


@dataclass(frozen=True)
class OutputConcl:
    channel: str
    event: str

    def rename(self, subst):
        return OutputConcl(subst.get(self.channel, self.channel), self.event)

    def __str__(self):
        return f"!{self.channel}[{self.event}]"


@dataclass(frozen=True, eq=False)
class MapConcl:
    graph: WiringGraph
    dom_chs: tuple
    cod_chs: tuple

    def key(self):
        return bound_key(self.graph, self.dom_chs, self.cod_chs)

    def rename(self, subst):
        return MapConcl(
            self.graph,
            tuple(subst.get(c, c) for c in self.dom_chs),
            tuple(subst.get(c, c) for c in self.cod_chs),
        )

    def __eq__(self, other):
        return isinstance(other, MapConcl) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __str__(self):
        return self.graph.display_name()


@dataclass(frozen=True)
class Entailment:
    antecedent: Behaviour
    conclusion: object  # OutputConcl | MapConcl

    def validate(self):
        b = self.antecedent
        if not b.is_legal():
            raise SigmaPiError(f"illegal antecedent {b}")
        if not b.is_antecedent():
            raise SigmaPiError(f"antecedent has a source state at its frontier: {b}")
        if isinstance(self.conclusion, OutputConcl):
            ch, ev = self.conclusion.channel, self.conclusion.event
            after = b.append(ch, OUT, ev)
            if not after.is_legal():
                raise SigmaPiError(f"conclusion {self.conclusion} not legal after {b}")
        else:
            f = b.frontier()
            if not f.all_atomic():
                raise SigmaPiError(f"atomic conclusion on non-atomic frontier {f}")

    def is_hanging(self) -> bool:
        if not isinstance(self.conclusion, OutputConcl):
            return False
        ch = self.conclusion.channel
        side = self.antecedent.sequent.side_of(ch)
        after = self.antecedent.frontier_proto(ch).branch(self.conclusion.event)
        return role(after, side) is Role.SOURCE

    def rename(self, subst):
        return Entailment(self.antecedent.rename(subst), self.conclusion.rename(subst))

    def __str__(self):
        return f"{self.antecedent} |- {self.conclusion}"


def _sort_key(e: Entailment):
    concl = e.conclusion
    ckey = (
        ("out", concl.channel, concl.event)
        if isinstance(concl, OutputConcl)
        else ("map", str(concl), concl.key())
    )
    return (e.antecedent.events, ckey)


@dataclass(frozen=True, eq=False)
class EntailmentSet:
    sequent: Sequent
    entailments: frozenset
    _verified: set = field(default_factory=set, repr=False)

    def __post_init__(self):
        for e in self.entailments:
            if e.antecedent.sequent != self.sequent:
                raise SigmaPiError("entailment over a different sequent")

    @property
    def verified_rules(self):
        return frozenset(self._verified)

    def sorted(self):
        return sorted(self.entailments, key=_sort_key)

    def __len__(self):
        return len(self.entailments)

    def __iter__(self):
        return iter(self.sorted())

    def __contains__(self, e):
        return e in self.entailments

    def __eq__(self, other):
        return (
            isinstance(other, EntailmentSet)
            and self.sequent == other.sequent
            and self.entailments == other.entailments
        )

    def __hash__(self):
        return hash((self.sequent, self.entailments))

    def rename(self, subst):
        return EntailmentSet(
            self.sequent.rename(subst),
            frozenset(e.rename(subst) for e in self.entailments),
        )

    def antecedents(self):
        return {e.antecedent for e in self.entailments}

    def __str__(self):
        return format_entailment_set(self)


def ep_equal(a: EntailmentSet, b: EntailmentSet, renaming=None) -> bool:
    """Set equality under the canonical encoding; an explicit channel
    renaming may map b's channels onto a's."""
    if renaming:
        b = b.rename(renaming)
    if a.sequent != b.sequent:
        raise SigmaPiError(
            f"entailment sets over different sequents: {a.sequent} vs {b.sequent}"
        )
    return a.entailments == b.entailments


# ---------------------------------------------------------------------------
# Justification and preantecedents


def _justified_occurrence(q, b: Behaviour, ch, idx) -> bool:
    """Is the output event at position idx of channel ch justified in q?"""
    prefix_seq = b.seq_for(ch)[:idx]
    for e in q.entailments:
        if not isinstance(e.conclusion, OutputConcl):
            continue
        if e.conclusion.channel != ch or e.conclusion.event != b.seq_for(ch)[idx][1]:
            continue
        u = e.antecedent
        if u.seq_for(ch) == prefix_seq and u.prefix(b):
            return True
    return False


def is_justified(q, b: Behaviour) -> bool:
    """All output events of b are q-justified (reachability)."""
    for ch, seq in b.events:
        for i, (d, ev) in enumerate(seq):
            if d == OUT and not _justified_occurrence(q, b, ch, i):
                return False
    return True


def enumerate_preantecedents(q: EntailmentSet, bound: int = None):
    """All q-justified antecedent behaviours, by breadth-first extension
    with legal inputs and q-justified outputs."""
    bound = bound or MAX_BEHAVIOURS
    s = q.sequent
    start = Behaviour.empty(s)
    if not start.is_antecedent():
        return set()
    seen = {start}
    queue = [start]
    while queue:
        b = queue.pop()
        if len(seen) > bound:
            raise SizeError(f"more than {bound} preantecedents; raise the bound")
        for ch, ev in b.legal_inputs():
            nb = b.append(ch, IN, ev)
            if nb not in seen and nb.is_antecedent():
                seen.add(nb)
                queue.append(nb)
        for ch, ev in b.legal_outputs():
            nb = b.append(ch, OUT, ev)
            if nb in seen or not nb.is_antecedent():
                continue
            if _justified_occurrence(q, nb, ch, len(b.seq_for(ch))):
                seen.add(nb)
                queue.append(nb)
    return seen


# ---------------------------------------------------------------------------
# Translation of cut-free terms


def translate(t: TypedTerm) -> EntailmentSet:
    """The inductive entailment set of a cut-free term."""
    if not is_cut_free(t):
        raise SigmaPiError("translate needs a cut-free term; normalize first")
    return EntailmentSet(t.sequent, frozenset(_translate(t)))


def _translate(t: TypedTerm):
    s = t.sequent
    if sequent_has_source(s):
        return []
    if isinstance(t, TId):
        g, d, c = t.as_graph()
        return [Entailment(Behaviour.empty(s), MapConcl(g, d, c))]
    if isinstance(t, TMap):
        return [Entailment(Behaviour.empty(s), MapConcl(t.graph, t.dom_chs, t.cod_chs))]
    if isinstance(t, TCot):  # cotuple or tuple: branch-prepended union
        out = []
        for ev, sub in t.branches:
            for e in _translate(sub):
                out.append(
                    Entailment(
                        _reroot(e.antecedent, s).prepend(t.channel, IN, ev),
                        e.conclusion,
                    )
                )
        return out
    if isinstance(t, TInj):  # injection or projection
        out = [Entailment(Behaviour.empty(s), OutputConcl(t.channel, t.event))]
        for e in _translate(t.body):
            out.append(
                Entailment(
                    _reroot(e.antecedent, s).prepend(t.channel, OUT, t.event),
                    e.conclusion,
                )
            )
        return out
    raise SigmaPiError(f"cannot translate {t!r}")


def _reroot(b: Behaviour, s: Sequent) -> Behaviour:
    return Behaviour(s, b.events)


# ---------------------------------------------------------------------------
# The EP rules


@dataclass
class Report:
    results: dict  # rule number -> (ok, detail)
    warnings: list

    @property
    def ok(self):
        return all(ok for ok, _ in self.results.values())

    def failed_rules(self):
        return sorted(r for r, (ok, _) in self.results.items() if not ok)

    def __str__(self):
        lines = []
        for rule in sorted(self.results):
            ok, detail = self.results[rule]
            line = f"EP-{rule}: {'pass' if ok else 'FAIL'}"
            if detail and not ok:
                line += f" ({detail})"
            lines.append(line)
        for w in self.warnings:
            lines.append(f"warning: {w}")
        return "\n".join(lines)


def _check_ep1(q):
    for e in q.sorted():
        if not is_justified(q, e.antecedent):
            return False, f"unjustified antecedent in {e}"
    return True, None


def _check_ep2(q):
    outs = [e for e in q.sorted() if isinstance(e.conclusion, OutputConcl)]
    for i, e1 in enumerate(outs):
        for e2 in outs[i + 1 :]:
            c1, c2 = e1.conclusion, e2.conclusion
            if c1.channel != c2.channel or c1.event == c2.event:
                continue
            p, r = e1.antecedent, e2.antecedent
            if p.seq_for(c1.channel) == r.seq_for(c1.channel) and p.compatible(r):
                return False, f"conflicting outputs: {e1} vs {e2}"
    return True, None


def _check_ep3(q, pre=None):
    # Every saturated preantecedent must have a licensed response at some
    # antecedent below it (separated by inputs only).  Requiring the
    # response above the smaller preantecedent as well would reject
    # translated terms whose outputs precede further inputs; input
    # padding (EP-5) closes the gap, and on EP-5-closed sets the two
    # readings agree.
    pre = pre if pre is not None else enumerate_preantecedents(q)
    ants = q.antecedents()
    for sat in sorted(pre, key=lambda x: x.events):
        if not sat.is_saturated():
            continue
        if not any(a.prefix_i(sat) for a in ants):
            return False, f"no response at saturated preantecedent {sat}"
    return True, None


def _check_ep4(q):
    outs = [e for e in q.sorted() if isinstance(e.conclusion, OutputConcl)]
    for e1 in outs:
        for e2 in outs:
            a, b = e1.conclusion, e2.conclusion
            if a.channel == b.channel:
                continue
            p, r = e1.antecedent, e2.antecedent
            if p.seq_for(a.channel) != r.seq_for(a.channel) or not p.prefix(r):
                continue
            ext = r.append(a.channel, OUT, a.event)
            if not ext.is_antecedent():
                continue
            if Entailment(ext, b) not in q:
                return False, f"missing replay: {ext} |- {b} (from {e1} and {e2})"
    return True, None


def _check_ep5(q):
    for e in q.sorted():
        if not isinstance(e.conclusion, OutputConcl):
            continue
        for ch, ev in e.antecedent.legal_inputs():
            if ch == e.conclusion.channel:
                continue
            ext = e.antecedent.append(ch, IN, ev)
            if Entailment(ext, e.conclusion) not in q:
                return False, f"missing input padding: {ext} |- {e.conclusion}"
    return True, None


def _check_ep6(q):
    for e in q.sorted():
        if not isinstance(e.conclusion, OutputConcl):
            continue
        for ch, seq in e.antecedent.events:
            if ch == e.conclusion.channel or not seq or seq[-1][0] != OUT:
                continue
            trimmed = e.antecedent.drop_last(ch)
            if Entailment(trimmed, e.conclusion) not in q:
                return False, f"missing trimmed entailment: {trimmed} |- {e.conclusion}"
    return True, None


def _check_ep7(q, pre=None):
    pre = pre if pre is not None else enumerate_preantecedents(q)
    for b in sorted(pre, key=lambda x: x.events):
        by_channel = {}
        for ch, ev in b.legal_inputs():
            by_channel.setdefault(ch, []).append(ev)
        for ch, evs in by_channel.items():
            shared = None
            for i, ev in enumerate(evs):
                ext = b.append(ch, IN, ev)
                concls = {
                    e.conclusion
                    for e in q.entailments
                    if isinstance(e.conclusion, OutputConcl)
                    and e.conclusion.channel != ch
                    and e.antecedent == ext
                }
                shared = concls if i == 0 else shared & concls
                if not shared:
                    break
            for concl in shared or ():
                if Entailment(b, concl) not in q:
                    return False, f"missing promotion: {b} |- {concl}"
    return True, None


def check_proto(q: EntailmentSet) -> Report:
    pre = enumerate_preantecedents(q)
    results = {
        1: _check_ep1(q),
        2: _check_ep2(q),
        3: _check_ep3(q, pre),
    }
    warnings = [f"hanging entailment {e}" for e in q.sorted() if e.is_hanging()]
    if results[1][0] and results[2][0] and results[3][0]:
        q._verified.update({1, 2, 3})
    return Report(results, warnings)


def check_extensional(q: EntailmentSet) -> Report:
    pre = enumerate_preantecedents(q)
    results = {
        1: _check_ep1(q),
        2: _check_ep2(q),
        3: _check_ep3(q, pre),
        4: _check_ep4(q),
        5: _check_ep5(q),
        6: _check_ep6(q),
        7: _check_ep7(q, pre),
    }
    warnings = [f"hanging entailment {e}" for e in q.sorted() if e.is_hanging()]
    if all(ok for ok, _ in results.values()):
        q._verified.update({1, 2, 3, 4, 5, 6, 7})
    return Report(results, warnings)


# ---------------------------------------------------------------------------
# Closure of a proto-process to the extensional process above it


def close(p: EntailmentSet, bound: int = None) -> EntailmentSet:
    """Least fixpoint of EP-4 (later-stage replay), EP-5 (input padding),
    EP-6 (output trimming) and EP-7 (input-complete promotion).

    Additions whose antecedent would not be an antecedent behaviour
    (hanging successors) are skipped; the universe is finite, so the
    iteration terminates.
    """
    bound = bound or MAX_BEHAVIOURS
    ents = set(p.entailments)
    while True:
        new = set()
        outs = [e for e in ents if isinstance(e.conclusion, OutputConcl)]
        # EP-5
        for e in outs:
            for ch, ev in e.antecedent.legal_inputs():
                if ch == e.conclusion.channel:
                    continue
                cand = Entailment(e.antecedent.append(ch, IN, ev), e.conclusion)
                if cand not in ents:
                    new.add(cand)
        # EP-6
        for e in outs:
            for ch, seq in e.antecedent.events:
                if ch == e.conclusion.channel or not seq or seq[-1][0] != OUT:
                    continue
                cand = Entailment(e.antecedent.drop_last(ch), e.conclusion)
                if cand not in ents:
                    new.add(cand)
        # EP-4
        for e1 in outs:
            a = e1.conclusion
            for e2 in outs:
                b = e2.conclusion
                if a.channel == b.channel:
                    continue
                pb, rb = e1.antecedent, e2.antecedent
                if pb.seq_for(a.channel) != rb.seq_for(a.channel) or not pb.prefix(rb):
                    continue
                ext = rb.append(a.channel, OUT, a.event)
                if not ext.is_antecedent():
                    continue
                cand = Entailment(ext, b)
                if cand not in ents:
                    new.add(cand)
        # EP-7
        current = EntailmentSet(p.sequent, frozenset(ents))
        for b in enumerate_preantecedents(current, bound):
            by_channel = {}
            for ch, ev in b.legal_inputs():
                by_channel.setdefault(ch, []).append(ev)
            for ch, evs in by_channel.items():
                shared = None
                for i, ev in enumerate(evs):
                    ext = b.append(ch, IN, ev)
                    concls = {
                        e.conclusion
                        for e in ents
                        if isinstance(e.conclusion, OutputConcl)
                        and e.conclusion.channel != ch
                        and e.antecedent == ext
                    }
                    shared = concls if i == 0 else shared & concls
                    if not shared:
                        break
                for concl in shared or ():
                    cand = Entailment(b, concl)
                    if cand not in ents:
                        new.add(cand)
        if not new:
            break
        ents |= new
        if len(ents) > bound:
            raise SizeError(f"closure exceeded {bound} entailments")
    return EntailmentSet(p.sequent, frozenset(ents))


# ---------------------------------------------------------------------------
# The polycategory structure on extensional processes


def compose_ep(
    f: EntailmentSet, f_ch: str, g: EntailmentSet, g_ch: str
) -> EntailmentSet:
    """Composite on one channel with matching protocols: dual-matching
    behaviours on the hidden channel are paired off."""
    if f_ch not in f.sequent.cod_map:
        raise SigmaPiError(f"{f_ch!r} is not a codomain channel of the left process")
    if g_ch not in g.sequent.dom_map:
        raise SigmaPiError(f"{g_ch!r} is not a domain channel of the right process")
    if f.sequent.cod_map[f_ch] != g.sequent.dom_map[g_ch]:
        raise SigmaPiError(
            f"protocol mismatch on composition: {f.sequent.cod_map[f_ch]} vs "
            f"{g.sequent.dom_map[g_ch]}"
        )
    used = set(f.sequent.channels()) | set(g.sequent.channels())
    subst = {}
    for ch in sorted(g.sequent.channels()):
        if ch == g_ch:
            continue
        if ch in f.sequent.channels() or ch == f_ch:
            nm = fresh_name(ch, used)
            subst[ch] = nm
            used.add(nm)
    if g_ch != f_ch:
        subst[g_ch] = f_ch
    if subst:
        g = g.rename(subst)
    gamma = f_ch
    merged = f.sequent.drop(gamma).merge(g.sequent.drop(gamma))
    f_pre = enumerate_preantecedents(f)
    g_pre = enumerate_preantecedents(g)
    out = set()

    def glue(p, q):
        return p.drop_channel(gamma).parallel(q.drop_channel(gamma))

    def duals_match(p, q):
        return p.seq_for(gamma) == channel_dual(q.seq_for(gamma))

    for e1 in f.entailments:
        if isinstance(e1.conclusion, MapConcl):
            for e2 in g.entailments:
                if not isinstance(e2.conclusion, MapConcl):
                    continue
                if not duals_match(e1.antecedent, e2.antecedent):
                    continue
                out.add(
                    Entailment(
                        glue(e1.antecedent, e2.antecedent),
                        _compose_maps(e1.conclusion, e2.conclusion, gamma),
                    )
                )
        elif e1.conclusion.channel != gamma:
            for q in g_pre:
                if duals_match(e1.antecedent, q):
                    out.add(Entailment(glue(e1.antecedent, q), e1.conclusion))
    for e2 in g.entailments:
        if isinstance(e2.conclusion, OutputConcl) and e2.conclusion.channel != gamma:
            for p in f_pre:
                if duals_match(p, e2.antecedent):
                    out.add(Entailment(glue(p, e2.antecedent), e2.conclusion))
    result = EntailmentSet(merged, frozenset(out))
    return result


def _compose_maps(m1: MapConcl, m2: MapConcl, gamma) -> MapConcl:
    i = m1.cod_chs.index(gamma)
    j = m2.dom_chs.index(gamma)
    graph = atom_compose(m1.graph, i, m2.graph, j)
    return MapConcl(
        graph,
        m2.dom_chs[:j] + m1.dom_chs + m2.dom_chs[j + 1 :],
        m1.cod_chs[:i] + m2.cod_chs + m1.cod_chs[i + 1 :],
    )


def identity_ep(p: Protocol, in_ch: str = "in'", out_ch: str = "out'") -> EntailmentSet:
    return close(translate(identity_term(p, in_ch, out_ch)))


def sum_ep(ch: str, parts, base_sequent: Sequent = None) -> EntailmentSet:
    """Coproduct on a domain channel: prepend each part's input event,
    then close.  parts is a sequence of (event, EntailmentSet)."""
    return _sum_or_product(ch, parts, base_sequent, "domain")


def product_ep(ch: str, parts, base_sequent: Sequent = None) -> EntailmentSet:
    return _sum_or_product(ch, parts, base_sequent, "codomain")


def _sum_or_product(ch, parts, base_sequent, side):
    cls = Sum if side == "domain" else Product
    parts = list(parts)
    if not parts:
        if base_sequent is None:
            raise SigmaPiError("a nullary sum/product needs the ambient sequent")
        if base_sequent.side_of(ch) != side or base_sequent.proto(ch) != cls(()):
            raise SigmaPiError(f"{ch} must carry the empty {cls.__name__.lower()}")
        return EntailmentSet(base_sequent, frozenset())
    protos = []
    rest = None
    for ev, part in parts:
        if part.sequent.side_of(ch) != side:
            raise SigmaPiError(f"{ch} on the wrong side in a part")
        protos.append((ev, part.sequent.proto(ch)))
        r = part.sequent.drop(ch)
        if rest is None:
            rest = r
        elif rest != r:
            raise SigmaPiError("parts differ away from the branch channel")
    combined = cls(tuple(protos))
    s = (
        Sequent(rest.domain + ((ch, combined),), rest.codomain)
        if side == "domain"
        else Sequent(rest.domain, rest.codomain + ((ch, combined),))
    )
    ents = set()
    for ev, part in parts:
        for e in part.entailments:
            ante = Behaviour(s, e.antecedent.events).prepend(ch, IN, ev)
            ents.add(Entailment(ante, e.conclusion))
    return close(EntailmentSet(s, frozenset(ents)))


def injection_ep(p: Sum, k: str, in_ch: str = "in'", out_ch: str = "out'"):
    """The k-th injection as an extensional process in:X_k |- out:Sum."""
    if not isinstance(p, Sum) or k not in p.events:
        raise SigmaPiError(f"{k!r} is not an event of {p}")
    sub = p.branch(k)
    ident = identity_ep(sub, in_ch, out_ch)
    s = Sequent(((in_ch, sub),), ((out_ch, p),))
    ents = {
        Entailment(Behaviour.empty(s), OutputConcl(out_ch, k)),
    }
    for e in ident.entailments:
        ents.add(
            Entailment(
                Behaviour(s, e.antecedent.events).prepend(out_ch, OUT, k),
                e.conclusion,
            )
        )
    return close(EntailmentSet(s, frozenset(ents)))


def projection_ep(p: Product, k: str, in_ch: str = "in'", out_ch: str = "out'"):
    """The k-th projection as an extensional process in:Product |- out:X_k."""
    if not isinstance(p, Product) or k not in p.events:
        raise SigmaPiError(f"{k!r} is not an event of {p}")
    sub = p.branch(k)
    ident = identity_ep(sub, in_ch, out_ch)
    s = Sequent(((in_ch, p),), ((out_ch, sub),))
    ents = {
        Entailment(Behaviour.empty(s), OutputConcl(in_ch, k)),
    }
    for e in ident.entailments:
        ents.add(
            Entailment(
                Behaviour(s, e.antecedent.events).prepend(in_ch, OUT, k),
                e.conclusion,
            )
        )
    return close(EntailmentSet(s, frozenset(ents)))


# ---------------------------------------------------------------------------
# Rendering


def format_entailment(e: Entailment) -> str:
    """Paper-style column table: events bottom-up, outputs !-prefixed."""
    s = e.antecedent.sequent
    dom = [ch for ch, _ in s.domain]
    cod = [ch for ch, _ in s.codomain]
    cols = dom + cod
    cells = {
        ch: [("!" + ev if d == OUT else ev) for d, ev in e.antecedent.seq_for(ch)]
        for ch in cols
    }
    height = max((len(c) for c in cells.values()), default=0)
    widths = {ch: max([len(ch)] + [len(c) for c in cells[ch]]) for ch in cols}

    def row(vals):
        left = " | ".join(vals[ch].ljust(widths[ch]) for ch in dom)
        right = " | ".join(vals[ch].ljust(widths[ch]) for ch in cod)
        if dom and cod:
            return f"  {left} || {right}".rstrip()
        return f"  {left}{right}".rstrip()

    lines = []
    for level in range(height - 1, -1, -1):
        lines.append(
            row({ch: (cells[ch][level] if level < len(cells[ch]) else "") for ch in cols})
        )
    lines.append(row({ch: "-" * widths[ch] for ch in cols}))
    lines.append(row({ch: ch for ch in cols}))
    lines.append(f"  |- {e.conclusion}")
    return "\n".join(lines)


def format_entailment_set(q: EntailmentSet, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(entailment_set_to_obj(q), indent=2, sort_keys=True)
    header = f"{len(q)} entailment(s) over {q.sequent}"
    blocks = [header]
    for e in q.sorted():
        blocks.append(format_entailment(e))
    return "\n\n".join(blocks)


def entailment_set_to_obj(q: EntailmentSet):
    def enc_beh(b):
        return {
            ch: [("!" + ev if d == OUT else ev) for d, ev in seq]
            for ch, seq in b.events
        }

    ents = []
    for e in q.sorted():
        if isinstance(e.conclusion, OutputConcl):
            concl = {"output": {"channel": e.conclusion.channel,
                                "event": e.conclusion.event}}
        else:
            concl = {
                "map": {
                    "name": str(e.conclusion),
                    "domain": list(e.conclusion.dom_chs),
                    "codomain": list(e.conclusion.cod_chs),
                }
            }
        ents.append({"antecedent": enc_beh(e.antecedent), "conclusion": concl})
    return {"sequent": str(q.sequent), "entailments": ents}
