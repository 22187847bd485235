"""Command-line front end.

Term files carry a sequent and a term:

    # comment lines are ignored
    sequent: a:{x:A, y:B} |- b:A
    term: a{x => #f, y => id}

The term may span multiple lines (everything after ``term:``).  Atomic
map names come from a theory file (--theory), one generator per line:
``name: ATOM* -> ATOM*``.

Exit status: 0 on success/equal, 1 on unequal or failed checks, 2 on
usage or parse/typing errors.
"""

from __future__ import annotations

import argparse
import difflib
import json
import sys

from . import demos
from .atoms import AtomTheory
from .equivalence import decide_equal_with_witness
from .errors import SigmaPiError
from .rewrite import cut, normalize
from .semantics import (
    check_extensional,
    check_proto,
    close,
    compose_ep,
    entailment_set_to_obj,
    ep_equal,
    format_entailment_set,
    role,
    translate,
)
from .syntax import (
    Atom,
    format_term,
    parse_protocol,
    parse_sequent,
    parse_term,
)
from .typecheck import check, enumerate_cut_free


def _read(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def load_term_file(path, theory, syntax="compact"):
    sequent_text = None
    term_lines = []
    in_term = False
    for line in _read(path).splitlines():
        stripped = line.strip()
        if in_term:
            term_lines.append(line)
            continue
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("sequent:"):
            sequent_text = stripped[len("sequent:"):].strip()
        elif stripped.startswith("term:"):
            term_lines.append(stripped[len("term:"):])
            in_term = True
        else:
            raise SigmaPiError(f"{path}: unexpected line {stripped!r}")
    if sequent_text is None or not term_lines:
        raise SigmaPiError(f"{path}: needs a 'sequent:' and a 'term:' entry")
    s = parse_sequent(sequent_text)
    raw = parse_term("\n".join(term_lines), s, theory, syntax=syntax)
    return check(raw, s, theory), s


def _load_theory(args):
    if getattr(args, "theory", None):
        return AtomTheory.parse(_read(args.theory))
    return AtomTheory()


def cmd_check(args):
    theory = _load_theory(args)
    t, s = load_term_file(args.file, theory, args.syntax)
    print(f"ok: {s}")
    return 0


def cmd_normalize(args):
    theory = _load_theory(args)
    t, _ = load_term_file(args.file, theory, args.syntax)
    trace = [] if args.trace else None
    nf = normalize(t, trace=trace)
    if trace is not None:
        for rule, path, term in trace:
            where = "/".join(str(i) for i in path) or "root"
            print(f"({rule}) at {where}: {format_term(term, args.syntax)}")
    print(format_term(nf, args.syntax))
    return 0


def cmd_eq(args):
    theory = _load_theory(args)
    t1, s1 = load_term_file(args.file1, theory, args.syntax)
    t2, s2 = load_term_file(args.file2, theory, args.syntax)
    if s1 != s2:
        print(f"sequents differ: {s1} vs {s2}")
        return 1
    t1, t2 = normalize(t1), normalize(t2)
    eq, witness = decide_equal_with_witness(t1, t2)
    if eq:
        print("equal")
        return 0
    print(f"unequal: {witness}")
    return 1


def cmd_translate(args):
    theory = _load_theory(args)
    t, _ = load_term_file(args.file, theory, args.syntax)
    q = translate(normalize(t))
    rep = check_proto(q)
    if args.close:
        q = close(q)
        rep = check_extensional(q)
    if args.format == "json":
        obj = entailment_set_to_obj(q)
        obj["checks"] = {f"EP-{r}": ok for r, (ok, _) in rep.results.items()}
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        print(format_entailment_set(q))
        print()
        print(rep)
    return 0 if rep.ok else 1


def cmd_compose(args):
    theory = _load_theory(args)
    t1, _ = load_term_file(args.file1, theory, args.syntax)
    t2, _ = load_term_file(args.file2, theory, args.syntax)
    if args.semantic:
        q1 = close(translate(normalize(t1)))
        q2 = close(translate(normalize(t2)))
        q = compose_ep(q1, args.ch1, q2, args.ch2)
        if args.format == "json":
            print(json.dumps(entailment_set_to_obj(q), indent=2, sort_keys=True))
        else:
            print(format_entailment_set(q))
        return 0
    nf = normalize(cut(t1, args.ch1, t2, args.ch2))
    print(format_term(nf, args.syntax))
    return 0


def cmd_enum(args):
    theory = _load_theory(args)
    s = parse_sequent(_read(args.seqfile).strip())
    count = 0
    for t in enumerate_cut_free(s, theory, args.max_nodes):
        print(format_term(t, args.syntax))
        count += 1
    print(f"# {count} term(s)")
    return 0


def _role_tree(p, side, indent):
    pad = "  " * indent
    r = role(p, side).value.capitalize()
    if isinstance(p, Atom):
        return [f"{pad}{p.name}: {r}"]
    kind = "sum" if p._open == "{" else "product"
    lines = [f"{pad}{kind}: {r}"]
    for ev, sub in p.sorted_branches():
        lines.append(f"{pad}  {ev}:")
        lines.extend(_role_tree(sub, side, indent + 2))
    return lines


def cmd_roles(args):
    p = parse_protocol(_read(args.protofile).strip())
    side = args.side
    print("\n".join(_role_tree(p, side, 0)))
    return 0


def cmd_demo(args):
    if args.name not in demos.DEMOS:
        print(f"unknown demo {args.name!r}; available: {', '.join(sorted(demos.DEMOS))}")
        return 2
    got = demos.run_demo(args.name)
    want = demos.expected_output(args.name)
    sys.stdout.write(got)
    if got == want:
        print(f"[demo {args.name}: output matches the stored fixture]")
        return 0
    print(f"[demo {args.name}: OUTPUT DIFFERS from the stored fixture]")
    for line in difflib.unified_diff(
        want.splitlines(), got.splitlines(), "expected", "actual", lineterm=""
    ):
        print(line)
    return 1


def build_parser():
    ap = argparse.ArgumentParser(
        prog="sigmapi",
        description="Protocols, processes, cut elimination, proof equality, "
        "and the entailment-set semantics.",
    )
    ap.add_argument("--theory", help="atom theory file (name: ATOM* -> ATOM*)")
    ap.add_argument(
        "--syntax",
        choices=["compact", "verbose"],
        default="compact",
        help="term syntax for parsing and printing",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="type-check a term file")
    p.add_argument("file")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("normalize", help="cut-eliminate a term file")
    p.add_argument("file")
    p.add_argument("--trace", action="store_true", help="print each rule fired")
    p.set_defaults(fn=cmd_normalize)

    p = sub.add_parser("eq", help="decide equality of two term files")
    p.add_argument("file1")
    p.add_argument("file2")
    p.set_defaults(fn=cmd_eq)

    p = sub.add_parser("translate", help="entailment set of a term")
    p.add_argument("file")
    p.add_argument("--close", action="store_true", help="close to the extensional process")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(fn=cmd_translate)

    p = sub.add_parser("compose", help="compose two terms on a channel pair")
    p.add_argument("file1")
    p.add_argument("ch1")
    p.add_argument("file2")
    p.add_argument("ch2")
    p.add_argument(
        "--semantic",
        action="store_true",
        help="compose extensional processes instead of cutting terms",
    )
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(fn=cmd_compose)

    p = sub.add_parser("enum", help="list cut-free terms of a sequent")
    p.add_argument("seqfile")
    p.add_argument("--max-nodes", type=int, required=True)
    p.set_defaults(fn=cmd_enum)

    p = sub.add_parser("roles", help="print the role-annotated protocol tree")
    p.add_argument("protofile")
    p.add_argument("--side", choices=["domain", "codomain"], default="domain")
    p.set_defaults(fn=cmd_roles)

    p = sub.add_parser("demo", help="replay a stored worked example")
    p.add_argument("name")
    p.set_defaults(fn=cmd_demo)

    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except SigmaPiError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
