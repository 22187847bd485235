"""Deciding equality of cut-free terms modulo the permuting conversions.

The procedure uses one term as a template: make its root constructor
principal in the other term (selecting input residuals, pulling
outputs), then recurse.

Two refinements beyond plain template pulling are needed for
completeness in the presence of the additive units:

* Over a sequent in which some protocol has a source role, every proof
  is convertible to a canonical "void" proof (the nullary conversions
  absorb everything), so equality is immediate.

* An output that lands in a source-role state (a hanging output) makes
  everything after it collapse; output wrappers in front of such an
  output can be inserted and erased freely by the nullary conversions.
  Pulling therefore falls back, where a plain pull fails, on any
  hanging output available on a different channel.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SigmaPiError
from .syntax import Product, Sequent, Sum
from .typecheck import (
    TCot,
    TId,
    TInj,
    TMap,
    TProj,
    TTup,
    TypedTerm,
    is_atomic_leaf,
    is_cut_free,
)
from .atoms import bound_key


def _require_cut_free(t):
    if not is_cut_free(t):
        raise SigmaPiError("equivalence is decided on cut-free terms; normalize first")


def _role(p, side):
    from .semantics import role

    return role(p, side)


def _is_source(p, side):
    from .semantics import Role

    return _role(p, side) is Role.SOURCE


def collapses(s: Sequent) -> bool:
    """All proofs of s are convertible iff some protocol has a source
    role; the root-level empty sum / empty product is the literal case."""
    return any(_is_source(p, "domain") for _, p in s.domain) or any(
        _is_source(p, "codomain") for _, p in s.codomain
    )


def void_term(s: Sequent) -> TypedTerm:
    """The canonical proof of a collapsing sequent, following the
    source-role protocol downward."""
    candidates = sorted(
        [ch for ch, p in s.domain if _is_source(p, "domain")]
        + [ch for ch, p in s.codomain if _is_source(p, "codomain")]
    )
    if not candidates:
        raise SigmaPiError(f"no source-role protocol in {s}")
    ch = candidates[0]
    side = s.side_of(ch)
    p = s.proto(ch)
    if side == "domain":
        if isinstance(p, Sum):  # all branches have source roles
            return TCot(
                s,
                ch,
                tuple(
                    (ev, void_term(s.with_protocol(ch, sub)))
                    for ev, sub in p.sorted_branches()
                ),
            )
        ev = next(
            ev for ev, sub in p.sorted_branches() if _is_source(sub, "domain")
        )
        return TProj(s, ch, ev, void_term(s.with_protocol(ch, p.branch(ev))))
    if isinstance(p, Product):  # all branches have source roles
        return TTup(
            s,
            ch,
            tuple(
                (ev, void_term(s.with_protocol(ch, sub)))
                for ev, sub in p.sorted_branches()
            ),
        )
    ev = next(ev for ev, sub in p.sorted_branches() if _is_source(sub, "codomain"))
    return TInj(s, ch, ev, void_term(s.with_protocol(ch, p.branch(ev))))


# ---------------------------------------------------------------------------
# Input residuals


def input_residual(t: TypedTerm, ch: str, ev: str) -> TypedTerm:
    """The proof of the sequent where ch's protocol is replaced by its
    ev-branch; always succeeds on cut-free terms."""
    _require_cut_free(t)
    s = t.sequent
    proto = s.proto(ch)
    side = s.side_of(ch)
    ok = (side == "domain" and isinstance(proto, Sum)) or (
        side == "codomain" and isinstance(proto, Product)
    )
    if not ok:
        raise SigmaPiError(f"{ch} is not at an input point in {s}")
    if ev not in proto.events:
        raise SigmaPiError(f"{ev!r} is not a branch of {ch}:{proto}")
    return _residual(t, ch, ev)


def _residual(t: TypedTerm, ch, ev) -> TypedTerm:
    s = t.sequent.with_protocol(ch, t.sequent.proto(ch).branch(ev))
    if isinstance(t, TCot) and t.channel == ch:
        return t.branch(ev)
    if isinstance(t, TCot):  # covers tuples; stubs keep their shape
        cls = TTup if isinstance(t, TTup) else TCot
        return cls(
            s, t.channel, tuple((e, _residual(sub, ch, ev)) for e, sub in t.branches)
        )
    if isinstance(t, TInj):
        cls = TProj if isinstance(t, TProj) else TInj
        return cls(s, t.channel, t.event, _residual(t.body, ch, ev))
    raise SigmaPiError(f"input residual hit an atomic leaf on compound {ch}")


# ---------------------------------------------------------------------------
# Output pulling


def _advance(s: Sequent, ch, ev) -> Sequent:
    return s.with_protocol(ch, s.proto(ch).branch(ev))


def _out_cls(s: Sequent, ch):
    return TInj if s.side_of(ch) == "codomain" else TProj


def _output_options(s):
    """All (channel, event) outputs available at the sequent."""
    out = []
    for ch, p in s.domain:
        if isinstance(p, Product) and p.branches:
            out.extend((ch, ev) for ev in p.events)
    for ch, p in s.codomain:
        if isinstance(p, Sum) and p.branches:
            out.extend((ch, ev) for ev in p.events)
    return sorted(out)


def _pull_plain(t: TypedTerm, ch, ev):
    """Pull by the permuting conversions alone, no unit absorptions."""
    s = _advance(t.sequent, ch, ev)
    if isinstance(t, TInj) and t.channel == ch:
        return t.body if t.event == ev else None
    if isinstance(t, TInj):
        body = _pull_plain(t.body, ch, ev)
        if body is None:
            return None
        return type(t)(s, t.channel, t.event, body)
    if isinstance(t, TCot):
        pulled = []
        for e, sub in t.branches:
            p = _pull_plain(sub, ch, ev)
            if p is None:
                return None
            pulled.append((e, p))
        cls = TTup if isinstance(t, TTup) else TCot
        return cls(s, t.channel, tuple(pulled))
    return None  # atomic leaf


def hanging_options(t: TypedTerm) -> frozenset:
    """Pullable outputs that land in a source-role (dead) state."""
    s = t.sequent
    out = set()
    for ch, ev in _output_options(s):
        side = s.side_of(ch)
        if not _is_source(s.proto(ch).branch(ev), side):
            continue
        if _pull_plain(t, ch, ev) is not None:
            out.add((ch, ev))
    return frozenset(out)


def _rescue(t: TypedTerm, ch, ev):
    """If t hangs on some other channel, everything after the hang is
    junk, so t converts to an output of (ch, ev) wrapping a hang."""
    for c, e in sorted(hanging_options(t)):
        if c == ch:
            continue
        s1 = _advance(t.sequent, ch, ev)
        s2 = _advance(s1, c, e)
        return _out_cls(s1, c)(s1, c, e, void_term(s2))
    return None


def _pull(t: TypedTerm, ch, ev):
    """Class-level pull: conversions plus unit absorptions."""
    s = _advance(t.sequent, ch, ev)
    if isinstance(t, TInj) and t.channel == ch:
        return t.body if t.event == ev else _rescue(t, ch, ev)
    if isinstance(t, TInj):
        body = _pull(t.body, ch, ev)
        if body is None:
            return _rescue(t, ch, ev)
        return type(t)(s, t.channel, t.event, body)
    if isinstance(t, TCot):
        pulled = []
        for e, sub in t.branches:
            p = _pull(sub, ch, ev)
            if p is None:
                return _rescue(t, ch, ev)
            pulled.append((e, p))
        cls = TTup if isinstance(t, TTup) else TCot
        return cls(s, t.channel, tuple(pulled))
    return None  # atomic leaf


def pull_output(t: TypedTerm, ch: str, ev: str):
    """If t is convertible to an output of ev on ch wrapping some t',
    return t'; otherwise None."""
    _require_cut_free(t)
    s = t.sequent
    proto = s.proto(ch)
    side = s.side_of(ch)
    ok = (side == "codomain" and isinstance(proto, Sum) and proto.branches) or (
        side == "domain" and isinstance(proto, Product) and proto.branches
    )
    if not ok:
        raise SigmaPiError(f"{ch} does not admit an output in {s}")
    if ev not in proto.events:
        raise SigmaPiError(f"{ev!r} is not a branch of {ch}:{proto}")
    return _pull(t, ch, ev)


# ---------------------------------------------------------------------------
# The decision procedure


@dataclass
class Witness:
    """Where the decision procedure failed: pulling (channel, event) to
    the root of the non-template term at the given template path."""

    path: tuple
    channel: str
    event: str

    def __str__(self):
        where = "/".join(str(i) for i in self.path) or "root"
        return f"cannot pull output {self.channel}[{self.event}] at {where}"


def _leaf_key(t: TypedTerm):
    if isinstance(t, TId):
        g, d, c = t.as_graph()
        return bound_key(g, d, c)
    return bound_key(t.graph, t.dom_chs, t.cod_chs)


def decide_equal_with_witness(t1: TypedTerm, t2: TypedTerm):
    _require_cut_free(t1)
    _require_cut_free(t2)
    if t1.sequent != t2.sequent:
        raise SigmaPiError(
            f"terms prove different sequents: {t1.sequent} vs {t2.sequent}"
        )
    return _decide(t1, t2, ())


def decide_equal(t1: TypedTerm, t2: TypedTerm) -> bool:
    eq, _ = decide_equal_with_witness(t1, t2)
    return eq


def _decide(t1, t2, path):
    if collapses(t1.sequent):
        return True, None
    if isinstance(t1, TCot):  # cotuple or tuple: recurse on residuals
        for i, (ev, sub) in enumerate(t1.sorted_branches()):
            eq, w = _decide(sub, _residual(t2, t1.channel, ev), path + (i,))
            if not eq:
                return False, w
        return True, None
    if isinstance(t1, TInj):
        pulled = _pull(t2, t1.channel, t1.event)
        if pulled is None:
            return False, Witness(path, t1.channel, t1.event)
        return _decide(t1.body, pulled, path + (0,))
    if is_atomic_leaf(t1):
        if not is_atomic_leaf(t2):
            return False, Witness(path, "*", "*")  # unreachable on typed inputs
        if _leaf_key(t1) == _leaf_key(t2):
            return True, None
        return False, Witness(path, "*", "*")
    raise SigmaPiError(f"unexpected node {t1!r}")


def canonicalize(t: TypedTerm) -> TypedTerm:
    """The canonical representative of t's conversion class.

    Collapsing sequents get the void proof; otherwise the least
    available constructor becomes principal: inputs by channel name,
    then outputs by (channel, event).
    """
    _require_cut_free(t)
    s = t.sequent
    if collapses(s):
        return void_term(s)
    inputs = sorted(
        ch
        for ch, p in s.domain + s.codomain
        if (s.side_of(ch) == "domain" and isinstance(p, Sum))
        or (s.side_of(ch) == "codomain" and isinstance(p, Product))
    )
    if inputs:
        ch = inputs[0]
        proto = s.proto(ch)
        cls = TCot if s.side_of(ch) == "domain" else TTup
        branches = tuple(
            (ev, canonicalize(_residual(t, ch, ev))) for ev in sorted(proto.events)
        )
        return cls(s, ch, branches)
    for ch, ev in _output_options(s):
        pulled = _pull(t, ch, ev)
        if pulled is not None:
            return _out_cls(s, ch)(s, ch, ev, canonicalize(pulled))
    # all-atomic sequent: a leaf; structural equality of leaves is
    # already up to boundary reordering, so only identities need care
    if isinstance(t, TId):
        return t
    if isinstance(t, TMap):
        if not t.graph.nodes and len(t.graph.wires) == 1:
            return TId(s)
        return t
    raise SigmaPiError(f"no constructor available for {t!r} over {s}")
