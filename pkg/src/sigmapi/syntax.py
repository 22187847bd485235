"""Protocols, sequents, and the concrete syntax of terms.

Protocols are finite trees of sums and products over named events with
atoms at the leaves.  A sequent assigns protocols to named channels,
split into a domain and a codomain side.  Terms are parsed here into a
raw syntax tree; resolving inputs/outputs against the sequent happens in
the typecheck module.

Branch order inside sums, products, cotuples and tuples is kept as
written, but equality and hashing treat branches as event-keyed maps and
canonical printing sorts events.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ParseError

IDENT_RE = re.compile(r"[a-z][a-zA-Z0-9_']*")
ATOM_RE = re.compile(r"[A-Z][a-zA-Z0-9_']*")


def is_channel_name(s: str) -> bool:
    return bool(IDENT_RE.fullmatch(s))


def is_atom_name(s: str) -> bool:
    return bool(ATOM_RE.fullmatch(s))


# ---------------------------------------------------------------------------
# Protocols


class Protocol:
    """Base class; instances are Atom, Sum, or Product."""

    __slots__ = ()


@dataclass(frozen=True)
class Atom(Protocol):
    name: str

    def __str__(self):
        return self.name


def _check_branches(branches):
    branches = tuple(branches)
    seen = set()
    for ev, sub in branches:
        if ev in seen:
            raise ParseError(f"duplicate event name {ev!r}")
        seen.add(ev)
        if not isinstance(sub, Protocol):
            raise TypeError(f"branch {ev!r} is not a Protocol")
    return branches


class _Branched(Protocol):
    __slots__ = ("branches", "_hash")
    _open = _close = ""

    def __init__(self, branches=()):
        object.__setattr__(self, "branches", _check_branches(branches))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, *a):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @property
    def events(self):
        return tuple(ev for ev, _ in self.branches)

    def branch(self, event):
        for ev, sub in self.branches:
            if ev == event:
                return sub
        raise KeyError(event)

    def sorted_branches(self):
        return tuple(sorted(self.branches))

    def __eq__(self, other):
        return type(self) is type(other) and self.sorted_branches() == other.sorted_branches()

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((type(self).__name__, self.sorted_branches()))
            object.__setattr__(self, "_hash", h)
        return h

    def __str__(self):
        inner = ", ".join(f"{ev}:{sub}" for ev, sub in self.sorted_branches())
        return f"{self._open}{inner}{self._close}"

    def __repr__(self):
        return f"{type(self).__name__}({list(self.branches)!r})"


class Sum(_Branched):
    """Coproduct protocol; the empty sum is the unit 0."""

    __slots__ = ()
    _open, _close = "{", "}"


class Product(_Branched):
    """Product protocol; the empty product is the unit 1."""

    __slots__ = ()
    _open, _close = "(", ")"


def dual(p: Protocol) -> Protocol:
    """Swap sums and products at every node; atoms are self-dual."""
    if isinstance(p, Atom):
        return p
    cls = Product if isinstance(p, Sum) else Sum
    return cls(tuple((ev, dual(sub)) for ev, sub in p.branches))


def protocol_size(p: Protocol) -> int:
    """Number of nodes in the protocol tree."""
    if isinstance(p, Atom):
        return 1
    return 1 + sum(protocol_size(sub) for _, sub in p.branches)


# ---------------------------------------------------------------------------
# Sequents


@dataclass(frozen=True)
class Sequent:
    """Channel-typed contexts; both sides unordered, names globally distinct."""

    domain: tuple[tuple[str, Protocol], ...]
    codomain: tuple[tuple[str, Protocol], ...]

    def __post_init__(self):
        dom = tuple(sorted(self.domain))
        cod = tuple(sorted(self.codomain))
        object.__setattr__(self, "domain", dom)
        object.__setattr__(self, "codomain", cod)
        names = [ch for ch, _ in dom] + [ch for ch, _ in cod]
        if len(set(names)) != len(names):
            raise ParseError(f"channel names not distinct in sequent: {names}")

    @property
    def dom_map(self):
        return dict(self.domain)

    @property
    def cod_map(self):
        return dict(self.codomain)

    def channels(self):
        return tuple(ch for ch, _ in self.domain) + tuple(ch for ch, _ in self.codomain)

    def side_of(self, ch):
        if any(c == ch for c, _ in self.domain):
            return "domain"
        if any(c == ch for c, _ in self.codomain):
            return "codomain"
        raise KeyError(ch)

    def proto(self, ch):
        for c, p in self.domain + self.codomain:
            if c == ch:
                return p
        raise KeyError(ch)

    def with_protocol(self, ch, p):
        """Replace the protocol carried by ``ch``."""
        rep = lambda side: tuple((c, p if c == ch else q) for c, q in side)
        if self.side_of(ch) == "domain":
            return Sequent(rep(self.domain), self.codomain)
        return Sequent(self.domain, rep(self.codomain))

    def drop(self, ch):
        return Sequent(
            tuple((c, p) for c, p in self.domain if c != ch),
            tuple((c, p) for c, p in self.codomain if c != ch),
        )

    def restrict(self, chans):
        chans = set(chans)
        return Sequent(
            tuple((c, p) for c, p in self.domain if c in chans),
            tuple((c, p) for c, p in self.codomain if c in chans),
        )

    def merge(self, other):
        return Sequent(self.domain + other.domain, self.codomain + other.codomain)

    def rename(self, subst):
        f = lambda side: tuple((subst.get(c, c), p) for c, p in side)
        return Sequent(f(self.domain), f(self.codomain))

    def all_atomic(self):
        return all(isinstance(p, Atom) for _, p in self.domain + self.codomain)

    def __str__(self):
        fmt = lambda side: ", ".join(f"{c}:{p}" for c, p in side)
        return f"{fmt(self.domain)} |- {fmt(self.codomain)}"


# ---------------------------------------------------------------------------
# Raw terms (parse output, not yet typed)


@dataclass(frozen=True)
class RawTerm:
    pass


@dataclass(frozen=True)
class RIdentity(RawTerm):
    pass


@dataclass(frozen=True)
class RAtomic(RawTerm):
    name: str


@dataclass(frozen=True)
class RInput(RawTerm):
    """Cotuple or tuple; which one is settled by the channel's side.

    shape is 'braces' (must be a cotuple), 'parens' (must be a tuple) or
    'any' (verbose syntax, either).
    """

    channel: str
    branches: tuple[tuple[str, RawTerm], ...]
    shape: str = "any"


@dataclass(frozen=True)
class ROutput(RawTerm):
    """Injection or projection; settled by the channel's side."""

    channel: str
    event: str
    body: RawTerm


@dataclass(frozen=True)
class RCut(RawTerm):
    """Cut on an internal channel carrying an annotated protocol."""

    out_channel: str
    left: RawTerm
    in_channel: str
    right: RawTerm
    protocol: Protocol


def raw_channels(t: RawTerm) -> set:
    """All channel names referenced by a raw term."""
    if isinstance(t, (RIdentity, RAtomic)):
        return set()
    if isinstance(t, RInput):
        out = {t.channel}
        for _, sub in t.branches:
            out |= raw_channels(sub)
        return out
    if isinstance(t, ROutput):
        return {t.channel} | raw_channels(t.body)
    if isinstance(t, RCut):
        return (
            {t.out_channel, t.in_channel}
            | raw_channels(t.left)
            | raw_channels(t.right)
        )
    raise TypeError(t)


# ---------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>=>|->|\|-)
  | (?P<bang>!\[)
  | (?P<punct>[]{}()\[,:;|#])
  | (?P<word>[A-Za-z][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)

KEYWORDS = {"cut", "id", "input", "on", "of", "output", "then", "plug", "in", "to"}


class _Tokens:
    def __init__(self, text):
        self.text = text
        self.toks = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m:
                raise ParseError(f"unexpected character {text[pos]!r}", pos)
            if m.lastgroup != "ws":
                self.toks.append((m.group(), pos))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def pos(self):
        return self.toks[self.i][1] if self.i < len(self.toks) else len(self.text)

    def next(self):
        if self.i >= len(self.toks):
            raise ParseError("unexpected end of input", len(self.text))
        tok = self.toks[self.i]
        self.i += 1
        return tok[0]

    def expect(self, tok):
        got = self.peek()
        if got != tok:
            raise ParseError(f"expected {tok!r}, got {got!r}", self.pos())
        return self.next()

    def at_end(self):
        return self.i >= len(self.toks)

    def ident(self, kind="name"):
        got = self.peek()
        if got is None or not IDENT_RE.fullmatch(got) or got in KEYWORDS:
            raise ParseError(f"expected {kind}, got {got!r}", self.pos())
        return self.next()

    def atom(self):
        got = self.peek()
        if got is None or not ATOM_RE.fullmatch(got):
            raise ParseError(f"expected atom name, got {got!r}", self.pos())
        return self.next()


# ---------------------------------------------------------------------------
# Protocol / sequent parsing


def _parse_protocol(tk: _Tokens) -> Protocol:
    tok = tk.peek()
    if tok == "{" or tok == "(":
        cls = Sum if tok == "{" else Product
        close = "}" if tok == "{" else ")"
        tk.next()
        branches = []
        if tk.peek() != close:
            while True:
                ev = tk.ident("event name")
                tk.expect(":")
                branches.append((ev, _parse_protocol(tk)))
                if tk.peek() == ",":
                    tk.next()
                    continue
                break
        tk.expect(close)
        try:
            return cls(tuple(branches))
        except ParseError as e:
            raise ParseError(str(e), tk.pos()) from None
    if tok is not None and ATOM_RE.fullmatch(tok):
        return Atom(tk.next())
    raise ParseError(f"expected protocol, got {tok!r}", tk.pos())


def parse_protocol(text: str) -> Protocol:
    tk = _Tokens(text)
    p = _parse_protocol(tk)
    if not tk.at_end():
        raise ParseError(f"trailing input after protocol: {tk.peek()!r}", tk.pos())
    return p


def _parse_side(tk: _Tokens, stop):
    entries = []
    if tk.peek() in stop:
        return tuple(entries)
    while True:
        ch = tk.ident("channel name")
        tk.expect(":")
        entries.append((ch, _parse_protocol(tk)))
        if tk.peek() == ",":
            tk.next()
            continue
        break
    return tuple(entries)


def parse_sequent(text: str) -> Sequent:
    tk = _Tokens(text)
    dom = _parse_side(tk, ("|-",))
    tk.expect("|-")
    cod = _parse_side(tk, (None,))
    if not tk.at_end():
        raise ParseError(f"trailing input after sequent: {tk.peek()!r}", tk.pos())
    return Sequent(dom, cod)


# ---------------------------------------------------------------------------
# Term parsing (compact and verbose syntax)


def _parse_compact(tk: _Tokens) -> RawTerm:
    tok = tk.peek()
    if tok == "id":
        tk.next()
        return RIdentity()
    if tok == "#":
        tk.next()
        return RAtomic(tk.ident("atomic map name"))
    if tok == "cut":
        tk.next()
        ch = tk.ident("channel name")
        tk.expect(":")
        proto = _parse_protocol(tk)
        tk.expect("(")
        left = _parse_compact(tk)
        tk.expect(")")
        tk.expect("(")
        right = _parse_compact(tk)
        tk.expect(")")
        return RCut(ch, left, ch, right, proto)
    if tok == "(":
        tk.next()
        t = _parse_compact(tk)
        tk.expect(")")
        return t
    ch = tk.ident("channel name")
    tok = tk.peek()
    if tok == "![":
        tk.next()
        ev = tk.ident("event name")
        tk.expect("]")
        tk.expect("(")
        body = _parse_compact(tk)
        tk.expect(")")
        return ROutput(ch, ev, body)
    if tok in ("{", "("):
        shape = "braces" if tok == "{" else "parens"
        close = "}" if tok == "{" else ")"
        tk.next()
        branches = []
        if tk.peek() != close:
            while True:
                ev = tk.ident("event name")
                if any(ev == e for e, _ in branches):
                    raise ParseError(f"duplicate branch event {ev!r}", tk.pos())
                tk.expect("=>")
                branches.append((ev, _parse_compact(tk)))
                if tk.peek() == ",":
                    tk.next()
                    continue
                break
        tk.expect(close)
        return RInput(ch, tuple(branches), shape)
    raise ParseError(f"expected term after channel {ch!r}, got {tok!r}", tk.pos())


def _parse_verbose(tk: _Tokens) -> RawTerm:
    tok = tk.peek()
    if tok == "id":
        tk.next()
        return RIdentity()
    if tok == "#":
        tk.next()
        return RAtomic(tk.ident("atomic map name"))
    if tok == "(":
        tk.next()
        t = _parse_verbose(tk)
        tk.expect(")")
        return t
    if tok == "input":
        tk.next()
        tk.expect("on")
        ch = tk.ident("channel name")
        tk.expect("of")
        branches = []
        while tk.peek() == "|":
            tk.next()
            ev = tk.ident("event name")
            if any(ev == e for e, _ in branches):
                raise ParseError(f"duplicate branch event {ev!r}", tk.pos())
            tk.expect("=>")
            branches.append((ev, _parse_verbose(tk)))
        return RInput(ch, tuple(branches), "any")
    if tok == "output":
        tk.next()
        ev = tk.ident("event name")
        tk.expect("on")
        ch = tk.ident("channel name")
        tk.expect("then")
        return ROutput(ch, ev, _parse_verbose(tk))
    if tok == "plug":
        tk.next()
        out_ch = tk.ident("channel name")
        tk.expect(":")
        proto = _parse_protocol(tk)
        tk.expect("in")
        left = _parse_verbose(tk)
        tk.expect("to")
        in_ch = tk.ident("channel name")
        tk.expect("in")
        right = _parse_verbose(tk)
        return RCut(out_ch, left, in_ch, right, proto)
    raise ParseError(f"expected term, got {tok!r}", tk.pos())


def parse_raw_term(text: str, syntax: str = "compact") -> RawTerm:
    tk = _Tokens(text)
    t = _parse_compact(tk) if syntax == "compact" else _parse_verbose(tk)
    if not tk.at_end():
        raise ParseError(f"trailing input after term: {tk.peek()!r}", tk.pos())
    return t


def parse_term(text: str, sequent: Sequent, theory, syntax: str = "compact") -> RawTerm:
    """Parse a term and resolve its channel and map references.

    Channels must come from the sequent (plus enclosing cut channels);
    atomic map names must name generators of the theory.  Typing proper
    is done by ``typecheck.check``.
    """
    t = parse_raw_term(text, syntax)
    _resolve(t, set(sequent.channels()), theory)
    return t


def _resolve(t: RawTerm, scope: set, theory):
    if isinstance(t, RIdentity):
        return
    if isinstance(t, RAtomic):
        if theory is None or t.name not in theory.generators:
            raise ParseError(f"unknown atomic map name {t.name!r}")
        return
    if isinstance(t, RInput):
        if t.channel not in scope:
            raise ParseError(f"unknown channel {t.channel!r}")
        for _, sub in t.branches:
            _resolve(sub, scope, theory)
        return
    if isinstance(t, ROutput):
        if t.channel not in scope:
            raise ParseError(f"unknown channel {t.channel!r}")
        _resolve(t.body, scope, theory)
        return
    if isinstance(t, RCut):
        _resolve(t.left, scope | {t.out_channel}, theory)
        _resolve(t.right, scope | {t.in_channel}, theory)
        return
    raise TypeError(t)


# ---------------------------------------------------------------------------
# Printing (works on raw terms and on typed terms from the typecheck module)


def _node_view(t):
    """Return (kind, fields) uniformly for raw and typed terms."""
    from . import typecheck as tc

    if isinstance(t, (RIdentity, tc.TId)):
        return ("id", None)
    if isinstance(t, RAtomic):
        return ("atomic", t.name)
    if isinstance(t, tc.TMap):
        return ("atomic", t.display_name())
    if isinstance(t, (RInput, tc.TCot, tc.TTup)):
        if isinstance(t, RInput):
            shape = t.shape
        else:
            shape = "parens" if isinstance(t, tc.TTup) else "braces"
        branches = tuple(sorted(t.branches))
        return ("input", (t.channel, branches, shape))
    if isinstance(t, (ROutput, tc.TInj, tc.TProj)):
        return ("output", (t.channel, t.event, t.body))
    if isinstance(t, RCut):
        return ("cut", (t.out_channel, t.left, t.in_channel, t.right, t.protocol))
    if isinstance(t, tc.TCut):
        proto = t.left.sequent.cod_map[t.channel]
        return ("cut", (t.channel, t.left, t.channel, t.right, proto))
    raise TypeError(t)


def format_term(t, syntax: str = "compact") -> str:
    if syntax == "compact":
        return _format_compact(t)
    if syntax == "verbose":
        return _format_verbose(t)
    raise ValueError(f"unknown syntax {syntax!r}")


def _format_compact(t) -> str:
    kind, data = _node_view(t)
    if kind == "id":
        return "id"
    if kind == "atomic":
        return f"#{data}"
    if kind == "input":
        ch, branches, shape = data
        op, cl = ("(", ")") if shape == "parens" else ("{", "}")
        inner = ", ".join(f"{ev} => {_format_compact(sub)}" for ev, sub in branches)
        return f"{ch}{op}{inner}{cl}"
    if kind == "output":
        ch, ev, body = data
        return f"{ch}![{ev}]({_format_compact(body)})"
    out_ch, left, in_ch, right, proto = data
    if in_ch != out_ch:
        return (
            f"plug {out_ch}:{proto} in {_format_compact(left)}"
            f" to {in_ch} in {_format_compact(right)}"
        )
    return f"cut {out_ch}:{proto} ({_format_compact(left)})({_format_compact(right)})"


def _format_verbose(t) -> str:
    kind, data = _node_view(t)
    if kind == "id":
        return "id"
    if kind == "atomic":
        return f"#{data}"
    if kind == "input":
        ch, branches, _ = data
        inner = " ".join(f"| {ev} => ({_format_verbose(sub)})" for ev, sub in branches)
        return f"input on {ch} of {inner}".rstrip()
    if kind == "output":
        ch, ev, body = data
        return f"output {ev} on {ch} then ({_format_verbose(body)})"
    out_ch, left, in_ch, right, proto = data
    return (
        f"plug {out_ch}:{proto} in ({_format_verbose(left)})"
        f" to {in_ch} in ({_format_verbose(right)})"
    )
