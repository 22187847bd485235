"""Built-in worked examples with checked-in expected outputs.

Each demo builds its inputs, runs the pipeline, and renders a
deterministic report; the CLI diffs the report against the stored
fixture under demo_data/.
"""

from __future__ import annotations

from importlib import resources

from . import rewrite, semantics
from .atoms import AtomTheory
from .equivalence import canonicalize, decide_equal_with_witness
from .semantics import (
    EntailmentSet,
    check_extensional,
    check_proto,
    close,
    compose_ep,
    ep_equal,
    format_entailment_set,
    translate,
)
from .syntax import format_term, parse_protocol, parse_sequent, parse_term
from .typecheck import check, identity_term


def _typed(term_text, sequent_text, theory=None):
    s = parse_sequent(sequent_text)
    return check(parse_term(term_text, s, theory), s, theory)


def _comp_pair():
    f = _typed(
        "alpha{a => gamma(a => alpha![c](id), b => gamma![c](alpha![d](id))),"
        " b => gamma(a => alpha![e](id), b => gamma![d](alpha![f](id)))}",
        "alpha:{a:(c:A,d:B), b:(e:A,f:C)} |- gamma:(a:A, b:{c:B,d:C})",
    )
    g = _typed(
        "gamma![b](gamma{c => beta![a](id), d => beta![b](id)})",
        "gamma:(a:A, b:{c:B,d:C}) |- beta:{a:B,b:C}",
    )
    return f, g


def demo_exam_comp():
    """Normalize the two-process communication composite."""
    f, g = _comp_pair()
    lines = [
        f"f : {f.sequent}",
        f"f = {f}",
        f"g : {g.sequent}",
        f"g = {g}",
    ]
    composite = rewrite.cut(f, "gamma", g, "gamma")
    trace = []
    nf = rewrite.normalize(composite, trace=trace)
    lines.append(f"cut on gamma : {composite.sequent}")
    for rule, path, term in trace:
        where = "/".join(str(i) for i in path) or "root"
        lines.append(f"  ({rule}) at {where}: {term}")
    lines.append(f"normal form = {nf}")
    return "\n".join(lines) + "\n"


def demo_exam_termcal_2():
    """Type-check the identity-shaped cotuple/injection example."""
    s = parse_sequent("alpha:{a:(e:A,f:B),b:C} |- beta:{c:(g:A,h:B),d:C}")
    t = _typed(
        "alpha{a => beta![c](beta(g => alpha![e](id), h => alpha![f](id))),"
        " b => beta![d](id)}",
        str(s),
    )
    canon = canonicalize(t)
    return (
        f"sequent: {s}\n"
        f"term: {t}\n"
        f"verbose: {format_term(t, 'verbose')}\n"
        f"check: accepted\n"
        f"canonical form: {canon}\n"
    )


_TRANSLATION_1_THEORY = """
f: A -> Ap
g: B -> F
h: C -> F
i: D -> G
j: E -> H
"""


def demo_translation_1():
    """Translate the three-branch process into its eleven entailments."""
    th = AtomTheory.parse(_TRANSLATION_1_THEORY)
    t = _typed(
        "alpha{a => beta![a](#f),"
        " b => alpha{d => beta![b](#g), e => beta![b](#h)},"
        " c => beta![c](beta(d => alpha![k](#i), e => alpha![l](#j)))}",
        "alpha:{a:A, b:{d:B,e:C}, c:(k:D,l:E)} |- beta:{a:Ap, b:F, c:(d:G,e:H)}",
        th,
    )
    q = translate(t)
    rep = check_proto(q)
    return (
        f"term: {t}\n\n{format_entailment_set(q)}\n\n"
        f"proto-process: {'yes' if rep.ok else 'no'}\n"
    )


def demo_translation_2():
    """A branch leading to a source-role protocol contributes nothing."""
    th = AtomTheory.parse("f: A -> B")
    t = _typed(
        "alpha{a => beta![b](alpha{}), b => beta![a](#f)}",
        "alpha:{a:{},b:A} |- beta:{a:B,b:A}",
        th,
    )
    q = translate(t)
    rep = check_proto(q)
    return (
        f"term: {t}\n\n{format_entailment_set(q)}\n\n"
        f"proto-process: {'yes' if rep.ok else 'no'}\n"
    )


def demo_identity_proto():
    """Translate the identity process on the three-branch protocol."""
    p = parse_protocol("{a:A, b:{d:B, e:()}, c:(f:C, g:{})}")
    t = identity_term(p, "alpha", "beta")
    q = translate(t)
    rep = check_proto(q)
    closed = close(q)
    rep2 = check_extensional(closed)
    lines = [
        f"identity term: {t}",
        "",
        format_entailment_set(q),
        "",
        f"proto-process: {'yes' if rep.ok else 'no'}",
    ]
    for w in rep.warnings:
        lines.append(w)
    lines.append(f"closure adds {len(closed) - len(q)} entailment(s); "
                 f"extensional: {'yes' if rep2.ok else 'no'}")
    return "\n".join(lines) + "\n"


_DECIDE_THEORY = """
i: A E -> G I
j: B E -> G J
k: C F -> H I
l: D F -> H K
"""

_DECIDE_SEQUENT = (
    "alpha:{a:(c:A,d:B), b:(e:C,f:D)}, beta:(g:E,h:F)"
    " |- gamma:{a':G,b':H}, delta:(c':I, d':{e':J,f':K})"
)

_DECIDE_TERM_1 = (
    "alpha{"
    "a => beta![g](gamma![a'](delta(c' => alpha![c](#i), d' => alpha![d](delta![e'](#j))))),"
    " b => beta![h](gamma![b'](delta(c' => alpha![e](#k), d' => alpha![f](delta![f'](#l)))))}"
)

_DECIDE_TERM_2 = (
    "delta("
    "c' => alpha{a => alpha![c](beta![g](gamma![a'](#i))),"
    " b => alpha![e](beta![h](gamma![b'](#k)))},"
    " d' => alpha{a => alpha![d](beta![g](gamma![a'](delta![e'](#j)))),"
    " b => alpha![f](beta![h](gamma![b'](delta![f'](#l))))})"
)


def _decide_pair():
    th = AtomTheory.parse(_DECIDE_THEORY)
    t1 = _typed(_DECIDE_TERM_1, _DECIDE_SEQUENT, th)
    t2 = _typed(_DECIDE_TERM_2, _DECIDE_SEQUENT, th)
    return t1, t2


def demo_decide_equal():
    """The cotuple-first and tuple-first derivations are one proof."""
    t1, t2 = _decide_pair()
    eq, _ = decide_equal_with_witness(t1, t2)
    c1, c2 = canonicalize(t1), canonicalize(t2)
    return (
        f"sequent: {t1.sequent}\n"
        f"t1 = {t1}\n"
        f"t2 = {t2}\n"
        f"decide_equal: {'equal' if eq else 'unequal'}\n"
        f"canonical forms match: {'yes' if c1 == c2 else 'no'}\n"
        f"canonical = {c1}\n"
    )


def demo_unit_ep3():
    """No process from the empty product to the empty sum."""
    s = parse_sequent("a:() |- b:{}")
    rep = check_extensional(EntailmentSet(s, frozenset()))
    return f"sequent: {s}\nempty entailment set:\n{rep}\n"


def demo_compose_semantic():
    """Syntactic and semantic composition give the same process."""
    f, g = _comp_pair()
    syn = close(translate(rewrite.normalize(rewrite.cut(f, "gamma", g, "gamma"))))
    sem = compose_ep(close(translate(f)), "gamma", close(translate(g)), "gamma")
    agree = ep_equal(syn, sem)
    return (
        f"semantic composite ({len(sem)} entailments):\n\n"
        f"{format_entailment_set(sem)}\n\n"
        f"agrees with close(translate(normalize(cut))): {'yes' if agree else 'no'}\n"
    )


DEMOS = {
    "exam-comp": demo_exam_comp,
    "exam-termcal-2": demo_exam_termcal_2,
    "translation-1": demo_translation_1,
    "translation-2": demo_translation_2,
    "identity-proto-process": demo_identity_proto,
    "decide-equal": demo_decide_equal,
    "unit-ep3": demo_unit_ep3,
    "compose-semantic": demo_compose_semantic,
}


def run_demo(name: str) -> str:
    return DEMOS[name]()


def expected_output(name: str) -> str:
    path = resources.files("sigmapi").joinpath(f"demo_data/{name}.txt")
    return path.read_text()
