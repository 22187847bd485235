"""Cut elimination (rules 1-12 plus essential cuts), the permuting
conversions (13-22), channel renaming, cut formation, and the
termination measure.

Rule numbering follows the conversion table: (1)/(2) drop identities,
(3)/(4)/(9)/(10) move a cut through a (co)tuple on a side channel
(including the nullary absorptions), (5)-(8) move it through an output
on a side channel, (11)/(12) are the principal communication steps, and
rule 0 stands for discharging an essential cut into the atom theory.
Conversions (13)-(22) are bidirectional and never touch cuts.
"""

from __future__ import annotations

from .errors import CompositionError, RenameError, TypeCheckError
from .syntax import Product, Sequent, Sum
from .typecheck import (
    TCot,
    TCut,
    TId,
    TInj,
    TMap,
    TProj,
    TTup,
    TypedTerm,
    assert_well_typed,
    is_atomic_leaf,
    term_channels,
)
from .atoms import atom_compose

ESSENTIAL = 0


def fresh_name(base: str, used) -> str:
    """base, then base1, base2, ...: the least unused index."""
    if base not in used:
        return base
    i = 1
    while f"{base}{i}" in used:
        i += 1
    return f"{base}{i}"


# ---------------------------------------------------------------------------
# Renaming and cut formation


def rename_channels(t: TypedTerm, subst: dict) -> TypedTerm:
    """Simultaneous channel substitution over the whole term."""
    if not subst:
        return t
    keys = list(subst.keys())
    vals = list(subst.values())
    if len(set(keys)) != len(keys) or len(set(vals)) != len(vals):
        raise RenameError("substitution keys and values must each be distinct")
    stays = term_channels(t) - set(keys)
    clash = stays & set(vals)
    if clash:
        raise RenameError(f"substitution captures unreplaced channels {sorted(clash)}")
    return _rename(t, subst)


def _rename(t: TypedTerm, subst: dict) -> TypedTerm:
    s = t.sequent.rename(subst)
    if isinstance(t, TId):
        return TId(s)
    if isinstance(t, TMap):
        return TMap(
            s,
            t.graph,
            tuple(subst.get(c, c) for c in t.dom_chs),
            tuple(subst.get(c, c) for c in t.cod_chs),
        )
    if isinstance(t, TCot):
        cls = TTup if isinstance(t, TTup) else TCot
        return cls(
            s,
            subst.get(t.channel, t.channel),
            tuple((ev, _rename(sub, subst)) for ev, sub in t.branches),
        )
    if isinstance(t, TInj):
        cls = TProj if isinstance(t, TProj) else TInj
        return cls(s, subst.get(t.channel, t.channel), t.event, _rename(t.body, subst))
    if isinstance(t, TCut):
        return TCut(
            s,
            subst.get(t.channel, t.channel),
            _rename(t.left, subst),
            _rename(t.right, subst),
        )
    raise TypeError(t)


def cut(f: TypedTerm, out_ch: str, g: TypedTerm, in_ch: str) -> TypedTerm:
    """Plug f's codomain channel against g's domain channel.

    g's channels are freshened away from f's, and the cut channel gets
    f's name on both sides.
    """
    if out_ch not in f.sequent.cod_map:
        raise CompositionError(f"{out_ch!r} is not a codomain channel of the left term")
    if in_ch not in g.sequent.dom_map:
        raise CompositionError(f"{in_ch!r} is not a domain channel of the right term")
    if f.sequent.cod_map[out_ch] != g.sequent.dom_map[in_ch]:
        raise CompositionError(
            f"cut protocols differ: {f.sequent.cod_map[out_ch]} vs "
            f"{g.sequent.dom_map[in_ch]}"
        )
    used = term_channels(f) | term_channels(g)
    subst = {}
    for ch in sorted(term_channels(g)):
        if ch == in_ch:
            continue
        if ch in term_channels(f) or ch == out_ch:
            nm = fresh_name(ch, used)
            subst[ch] = nm
            used.add(nm)
    if in_ch != out_ch:
        subst[in_ch] = out_ch
    g2 = rename_channels(g, subst) if subst else g
    merged = f.sequent.drop(out_ch).merge(g2.sequent.drop(out_ch))
    return TCut(merged, out_ch, f, g2)


# ---------------------------------------------------------------------------
# Reduction rules 1-12 and the essential cut


def _rule_for_cut(t: TCut):
    """The unique reduction at this cut under the fixed priority, or None
    (children still contain cuts in outermost strategies)."""
    gamma, l, r = t.channel, t.left, t.right
    if isinstance(r, TId):
        return 1
    if isinstance(l, TId):
        return 2
    if isinstance(l, TInj) and not isinstance(l, TProj) and l.channel == gamma:
        if type(r) is TCot and r.channel == gamma:
            return 11
    if type(l) is TTup and l.channel == gamma:
        if isinstance(r, TProj) and r.channel == gamma:
            return 12
    if isinstance(l, TInj) and not isinstance(l, TProj) and l.channel != gamma:
        return 5
    if isinstance(r, TProj) and r.channel != gamma:
        return 6
    if isinstance(l, TProj):
        return 7
    if isinstance(r, TInj) and not isinstance(r, TProj):
        return 8
    if type(l) is TCot:
        return 3
    if type(r) is TTup:
        return 4
    if type(l) is TTup and l.channel != gamma:
        return 9
    if type(r) is TCot and r.channel != gamma:
        return 10
    if isinstance(l, TMap) and isinstance(r, TMap):
        return ESSENTIAL
    return None


def _apply_rule(t: TCut, rule: int) -> TypedTerm:
    s, gamma, l, r = t.sequent, t.channel, t.left, t.right
    if rule == 1:
        return rename_channels(l, {gamma: r.out_channel})
    if rule == 2:
        return rename_channels(r, {gamma: l.in_channel})
    if rule == 11:
        return TCut(s, gamma, l.body, r.branch(l.event))
    if rule == 12:
        return TCut(s, gamma, l.branch(r.event), r.body)
    if rule == 5:
        inner = s.with_protocol(l.channel, l.body.sequent.proto(l.channel))
        return TInj(s, l.channel, l.event, TCut(inner, gamma, l.body, r))
    if rule == 6:
        inner = s.with_protocol(r.channel, r.body.sequent.proto(r.channel))
        return TProj(s, r.channel, r.event, TCut(inner, gamma, l, r.body))
    if rule == 7:
        inner = s.with_protocol(l.channel, l.body.sequent.proto(l.channel))
        return TProj(s, l.channel, l.event, TCut(inner, gamma, l.body, r))
    if rule == 8:
        inner = s.with_protocol(r.channel, r.body.sequent.proto(r.channel))
        return TInj(s, r.channel, r.event, TCut(inner, gamma, l, r.body))
    if rule in (3, 9):
        cls = TCot if rule == 3 else TTup
        branches = tuple(
            (ev, TCut(s.with_protocol(l.channel, sub.sequent.proto(l.channel)),
                      gamma, sub, r))
            for ev, sub in l.branches
        )
        return cls(s, l.channel, branches)
    if rule in (4, 10):
        cls = TTup if rule == 4 else TCot
        branches = tuple(
            (ev, TCut(s.with_protocol(r.channel, sub.sequent.proto(r.channel)),
                      gamma, l, sub))
            for ev, sub in r.branches
        )
        return cls(s, r.channel, branches)
    if rule == ESSENTIAL:
        i = l.cod_chs.index(gamma)
        j = r.dom_chs.index(gamma)
        graph = atom_compose(l.graph, i, r.graph, j)
        dom_chs = r.dom_chs[:j] + l.dom_chs + r.dom_chs[j + 1 :]
        cod_chs = l.cod_chs[:i] + r.cod_chs + l.cod_chs[i + 1 :]
        return TMap(s, graph, dom_chs, cod_chs)
    raise ValueError(f"no such reduction rule {rule}")


def applicable_rules(t: TCut):
    """All reduction rules whose pattern matches this cut, not only the
    one the fixed priority would fire."""
    gamma, l, r = t.channel, t.left, t.right
    out = []
    if isinstance(r, TId):
        out.append(1)
    if isinstance(l, TId):
        out.append(2)
    if type(l) is TCot:
        out.append(3)
    if type(r) is TTup:
        out.append(4)
    if isinstance(l, TInj) and not isinstance(l, TProj) and l.channel != gamma:
        out.append(5)
    if isinstance(r, TProj) and r.channel != gamma:
        out.append(6)
    if isinstance(l, TProj):
        out.append(7)
    if isinstance(r, TInj) and not isinstance(r, TProj):
        out.append(8)
    if type(l) is TTup and l.channel != gamma:
        out.append(9)
    if type(r) is TCot and r.channel != gamma:
        out.append(10)
    if (
        isinstance(l, TInj)
        and not isinstance(l, TProj)
        and l.channel == gamma
        and type(r) is TCot
        and r.channel == gamma
    ):
        out.append(11)
    if (
        type(l) is TTup
        and l.channel == gamma
        and isinstance(r, TProj)
        and r.channel == gamma
    ):
        out.append(12)
    if isinstance(l, TMap) and isinstance(r, TMap):
        out.append(ESSENTIAL)
    return out


def reduce_at(t: TypedTerm, path, rule: int) -> TypedTerm:
    """Apply one specific reduction rule at the cut node at `path`."""
    node = t.at_path(path)
    if not isinstance(node, TCut):
        raise TypeCheckError(f"no cut at path {path}")
    if rule not in applicable_rules(node):
        raise TypeCheckError(f"rule ({rule}) does not match the cut at {path}")
    new = _apply_rule(node, rule)
    if __debug__:
        assert_well_typed(new)
    return _replace_at(t, path, new)


def _find_redex(t: TypedTerm, path, strategy):
    if strategy == "li":
        for i, c in enumerate(t.children()):
            found = _find_redex(c, path + (i,), strategy)
            if found:
                return found
        if isinstance(t, TCut):
            rule = _rule_for_cut(t)
            if rule is not None:
                return (path, rule)
        return None
    # rightmost-outermost
    if isinstance(t, TCut):
        rule = _rule_for_cut(t)
        if rule is not None:
            return (path, rule)
    kids = t.children()
    for i in range(len(kids) - 1, -1, -1):
        found = _find_redex(kids[i], path + (i,), strategy)
        if found:
            return found
    return None


def _replace_at(t: TypedTerm, path, new: TypedTerm) -> TypedTerm:
    if not path:
        return new
    i, rest = path[0], path[1:]
    if isinstance(t, TCot):
        cls = TTup if isinstance(t, TTup) else TCot
        target_ev = t.sorted_branches()[i][0]
        branches = tuple(
            (ev, _replace_at(sub, rest, new) if ev == target_ev else sub)
            for ev, sub in t.branches
        )
        return cls(t.sequent, t.channel, branches)
    if isinstance(t, TInj):
        cls = TProj if isinstance(t, TProj) else TInj
        return cls(t.sequent, t.channel, t.event, _replace_at(t.body, rest, new))
    if isinstance(t, TCut):
        if i == 0:
            return TCut(t.sequent, t.channel, _replace_at(t.left, rest, new), t.right)
        return TCut(t.sequent, t.channel, t.left, _replace_at(t.right, rest, new))
    raise ValueError(f"bad path through {type(t).__name__}")


def step(t: TypedTerm, strategy: str = "li"):
    """Apply one reduction; returns (term, rule_id, path) or None."""
    found = _find_redex(t, (), strategy)
    if not found:
        return None
    path, rule = found
    node = t.at_path(path)
    return _replace_at(t, path, _apply_rule(node, rule)), rule, path


def normalize(t: TypedTerm, strategy: str = "li", trace=None) -> TypedTerm:
    """Reduce to a cut-free term.  Each step strictly decreases the bag
    of cut heights (checked when assertions are enabled)."""
    while True:
        nxt = step(t, strategy)
        if nxt is None:
            if __debug__:
                assert not _has_cut(t), "normalize stopped with a cut left"
            return t
        new, rule, path = nxt
        if __debug__:
            h0, b0 = measures(t)
            h1, b1 = measures(new)
            assert h1 <= h0, f"rule {rule} increased height"
            assert multiset_less(b1, b0), f"rule {rule} did not shrink the cut bag"
            assert_well_typed(new)
            assert new.sequent == t.sequent
        if trace is not None:
            trace.append((rule, path, new))
        t = new


def _has_cut(t):
    return isinstance(t, TCut) or any(_has_cut(c) for c in t.children())


# ---------------------------------------------------------------------------
# Measures


def height(t: TypedTerm) -> int:
    if is_atomic_leaf(t):
        return 1
    if isinstance(t, TCot):
        return 1 + max((height(sub) for _, sub in t.branches), default=0)
    if isinstance(t, TInj):
        return 1 + height(t.body)
    if isinstance(t, TCut):
        return height(t.left) + height(t.right)
    raise TypeError(t)


def cut_bag(t: TypedTerm) -> tuple:
    """Multiset of the heights of all cuts, as a sorted tuple."""
    bag = []

    def walk(u):
        if isinstance(u, TCut):
            bag.append(height(u))
        for c in u.children():
            walk(c)

    walk(t)
    return tuple(sorted(bag))


def measures(t: TypedTerm):
    return height(t), cut_bag(t)


def multiset_less(a, b) -> bool:
    """Dershowitz-Manna ordering on multisets of naturals: a < b."""
    da = tuple(sorted(a, reverse=True))
    db = tuple(sorted(b, reverse=True))
    if da == db:
        return False
    for x, y in zip(da, db):
        if x != y:
            return x < y
    return len(da) < len(db)


# ---------------------------------------------------------------------------
# Permuting conversions (13)-(22)
#
# convert(t, rule, path, channel, event) rewrites the subterm at `path`
# so that afterwards its root is the constructor on `channel` (with
# `event`, for outputs), checking that the move is an instance of the
# given rule.  Conversions are bidirectional; the target channel picks
# the direction.


def _input_kind(s: Sequent, ch):
    """'cot' / 'tup' if ch is at an input point, else None."""
    side = s.side_of(ch)
    p = s.proto(ch)
    if side == "domain" and isinstance(p, Sum):
        return "cot"
    if side == "codomain" and isinstance(p, Product):
        return "tup"
    return None


def _output_kind(s: Sequent, ch):
    """'inj' / 'proj' if ch is at an output point, else None."""
    side = s.side_of(ch)
    p = s.proto(ch)
    if side == "codomain" and isinstance(p, Sum):
        return "inj"
    if side == "domain" and isinstance(p, Product):
        return "proj"
    return None


_SWAP_RULES = {("cot", "cot"): 13, ("tup", "tup"): 14, ("cot", "tup"): 19,
               ("tup", "cot"): 19}
_HOIST_RULES = {("cot", "inj"): 15, ("tup", "proj"): 16, ("cot", "proj"): 17,
                ("tup", "inj"): 18}
_OUT_RULES = {("inj", "inj"): 20, ("proj", "proj"): 21, ("inj", "proj"): 22,
              ("proj", "inj"): 22}

_INPUT_CLS = {"cot": TCot, "tup": TTup}
_OUTPUT_CLS = {"inj": TInj, "proj": TProj}


class ConvertError(TypeCheckError):
    pass


def _kind_of_node(u: TypedTerm):
    if isinstance(u, TTup):
        return "tup"
    if isinstance(u, TCot):
        return "cot"
    if isinstance(u, TProj):
        return "proj"
    if isinstance(u, TInj):
        return "inj"
    return None


def _swap_inputs(u, ch):
    """(13)/(14)/(19): make the input constructor on ch the root of u."""
    s = u.sequent
    my_kind = _kind_of_node(u)
    ch_kind = _input_kind(s, ch)
    branches = []
    for bev, bproto in s.proto(ch).sorted_branches():
        inner = []
        for aev, sub in u.sorted_branches():
            body = sub
            if not (_kind_of_node(body) == ch_kind and body.channel == ch):
                raise ConvertError(f"branch {aev} does not start on {ch}")
            inner.append((aev, body.branch(bev)))
        mid = s.with_protocol(ch, bproto)
        branches.append((bev, _INPUT_CLS[my_kind](mid, u.channel, tuple(inner))))
    rule = _SWAP_RULES[(my_kind, ch_kind)]
    return _INPUT_CLS[ch_kind](s, ch, tuple(branches)), rule


def _hoist_output(u, ch, event):
    """(15)-(18): pull the output ch[event] out of every branch of u."""
    s = u.sequent
    my_kind = _kind_of_node(u)
    ch_kind = _output_kind(s, ch)
    if event is None:
        evs = {sub.event for _, sub in u.branches
               if _kind_of_node(sub) == ch_kind and sub.channel == ch}
        if len(evs) != 1:
            raise ConvertError(f"output event on {ch} is ambiguous or absent; give one")
        event = next(iter(evs))
    if event not in s.proto(ch).events:
        raise ConvertError(f"{event!r} is not an event of {ch}")
    inner = []
    for aev, sub in u.sorted_branches():
        if not (
            _kind_of_node(sub) == ch_kind and sub.channel == ch and sub.event == event
        ):
            raise ConvertError(f"branch {aev} does not output {ch}[{event}]")
        inner.append((aev, sub.body))
    mid = s.with_protocol(ch, s.proto(ch).branch(event))
    body = _INPUT_CLS[my_kind](mid, u.channel, tuple(inner))
    rule = _HOIST_RULES[(my_kind, ch_kind)]
    return _OUTPUT_CLS[ch_kind](s, ch, event, body), rule


def _hoist_input(u, ch):
    """(15)-(18) right to left: pull the (co)tuple on ch over the output."""
    s = u.sequent
    my_kind = _kind_of_node(u)
    body = u.body
    ch_kind = _input_kind(s, ch)
    if not (_kind_of_node(body) == ch_kind and body.channel == ch):
        raise ConvertError(f"body does not start with the input constructor on {ch}")
    branches = []
    for bev, sub in body.sorted_branches():
        mid = s.with_protocol(ch, s.proto(ch).branch(bev))
        branches.append((bev, _OUTPUT_CLS[my_kind](mid, u.channel, u.event, sub)))
    rule = _HOIST_RULES[(ch_kind, my_kind)]
    return _INPUT_CLS[ch_kind](s, ch, tuple(branches)), rule


def _swap_outputs(u, ch):
    """(20)-(22): exchange two adjacent outputs on distinct channels."""
    s = u.sequent
    my_kind = _kind_of_node(u)
    body = u.body
    ch_kind = _output_kind(s, ch)
    if not (_kind_of_node(body) == ch_kind and body.channel == ch):
        raise ConvertError(f"body does not output on {ch}")
    mid = s.with_protocol(ch, s.proto(ch).branch(body.event))
    inner = _OUTPUT_CLS[my_kind](mid, u.channel, u.event, body.body)
    rule = _OUT_RULES[(my_kind, ch_kind)]
    return _OUTPUT_CLS[ch_kind](s, ch, body.event, inner), rule


def convert(t: TypedTerm, rule_id: int, path, channel: str, event: str = None):
    """Apply one permuting conversion at `path`, bringing `channel`'s
    constructor to the root of that subterm."""
    u = t.at_path(path)
    kind = _kind_of_node(u)
    if kind is None:
        raise ConvertError(f"no conversion applies at an atomic leaf", path)
    if channel == getattr(u, "channel", None):
        raise ConvertError(f"{channel} is already the root constructor", path)
    s = u.sequent
    if channel not in s.channels():
        raise ConvertError(f"unknown channel {channel!r}", path)
    if kind in ("cot", "tup"):
        if _input_kind(s, channel):
            new, rule = _swap_inputs(u, channel)
        elif _output_kind(s, channel):
            new, rule = _hoist_output(u, channel, event)
        else:
            raise ConvertError(f"channel {channel} is at an atom", path)
    else:
        if _input_kind(s, channel):
            new, rule = _hoist_input(u, channel)
        elif _output_kind(s, channel):
            new, rule = _swap_outputs(u, channel)
        else:
            raise ConvertError(f"channel {channel} is at an atom", path)
    if rule != rule_id:
        raise ConvertError(f"move at {path} is rule ({rule}), not ({rule_id})")
    if __debug__:
        assert_well_typed(new)
    return _replace_at(t, path, new)


def conversion_moves_at(u: TypedTerm):
    """All single conversions applicable at the root of u, as tuples
    (rule_id, channel, event, result)."""
    out = []
    kind = _kind_of_node(u)
    s = u.sequent
    if kind in ("cot", "tup"):
        if u.branches:
            roots = {
                (_kind_of_node(sub), getattr(sub, "channel", None))
                for _, sub in u.branches
            }
            if len(roots) == 1 and None not in next(iter(roots)):
                (bk, bch) = next(iter(roots))
                if bk in ("cot", "tup") and bch != u.channel:
                    new, rule = _swap_inputs(u, bch)
                    out.append((rule, bch, None, new))
                elif bk in ("inj", "proj"):
                    evs = {sub.event for _, sub in u.branches}
                    if len(evs) == 1 and bch != u.channel:
                        ev = next(iter(evs))
                        new, rule = _hoist_output(u, bch, ev)
                        out.append((rule, bch, ev, new))
        else:
            for ch in s.channels():
                if ch == u.channel:
                    continue
                if _input_kind(s, ch):
                    new, rule = _swap_inputs(u, ch)
                    out.append((rule, ch, None, new))
                elif _output_kind(s, ch):
                    for ev in s.proto(ch).events:
                        new, rule = _hoist_output(u, ch, ev)
                        out.append((rule, ch, ev, new))
    elif kind in ("inj", "proj"):
        body = u.body
        bk = _kind_of_node(body)
        if bk in ("cot", "tup") and body.channel != u.channel:
            new, rule = _hoist_input(u, body.channel)
            out.append((rule, body.channel, None, new))
        elif bk in ("inj", "proj") and body.channel != u.channel:
            new, rule = _swap_outputs(u, body.channel)
            out.append((rule, body.channel, body.event, new))
    return out


def all_conversion_moves(t: TypedTerm):
    """Every (rule_id, path, channel, event, result) over the whole term."""
    moves = []

    def walk(u, path):
        for rule, ch, ev, new in conversion_moves_at(u):
            moves.append((rule, path, ch, ev, _replace_at(t, path, new)))
        for i, c in enumerate(u.children()):
            walk(c, path + (i,))

    walk(t, ())
    return moves
