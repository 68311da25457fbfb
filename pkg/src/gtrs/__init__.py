"""Confluence prover for generalized term rewriting systems."""

from .terms import (
    App,
    Position,
    ReplacementMap,
    Substitution,
    Symbol,
    Term,
    Var,
    active_positions,
    app,
    ground_down,
    match,
    render,
    replace_at,
    subterm_at,
    unify,
)
from .systems import (
    EQUIV,
    GTRS,
    JOIN,
    ORIENTED,
    REACH,
    SEMI_EQUATIONAL,
    STEP,
    Atom,
    HornClause,
    Rule,
    SystemClass,
    atom,
    classify,
    encode_theory,
    make_system,
    rule_type,
    underlying_trs,
)
from .rewriting import (
    NO,
    UNKNOWN,
    YES,
    Budget,
    Engine,
    TriBool,
    is_irreducible,
    one_step,
    reachable,
    successors,
)

__all__ = [name for name in dir() if not name.startswith("_")]
