"""Additive linear logic as protocols and processes.

Protocols (sum/product trees over named events), terms of the
cotuple/tuple/injection/projection/cut calculus, cut elimination with a
terminating measure, a decision procedure for proof equality modulo the
permuting conversions, and the entailment-set process semantics with
composition, identities, sums and products of extensional processes.
"""

from .atoms import AtomTheory, Generator, WiringGraph, atom_compose
from .equivalence import (
    canonicalize,
    decide_equal,
    decide_equal_with_witness,
    input_residual,
    pull_output,
)
from .errors import (
    CompositionError,
    ParseError,
    RenameError,
    SigmaPiError,
    SizeError,
    TypeCheckError,
)
from .rewrite import (
    all_conversion_moves,
    convert,
    cut,
    cut_bag,
    height,
    measures,
    multiset_less,
    normalize,
    rename_channels,
    step,
)
from .semantics import (
    Behaviour,
    Entailment,
    EntailmentSet,
    MapConcl,
    OutputConcl,
    Role,
    check_extensional,
    check_proto,
    close,
    compose_ep,
    enumerate_preantecedents,
    ep_equal,
    format_entailment_set,
    identity_ep,
    injection_ep,
    product_ep,
    projection_ep,
    role,
    sum_ep,
    translate,
)
from .syntax import (
    Atom,
    Product,
    Protocol,
    Sequent,
    Sum,
    dual,
    format_term,
    parse_protocol,
    parse_sequent,
    parse_term,
)
from .typecheck import (
    Classification,
    TypedTerm,
    check,
    classify,
    dualize,
    enumerate_cut_free,
    identity_term,
)

__all__ = [name for name in dir() if not name.startswith("_")]
