"""System-to-system transformations.

Simplification and inlining rewrite the rule set without changing the
rewrite relation (inlining preserves many-step reachability).  The two
unravelings compile conditions of deterministic rules into fresh
intermediate symbols.  Modular decomposition splits an unconditional
system into parts sharing at most constructors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .pairs import syntactic_profile
from .rewriting import NO, UNKNOWN, YES, Budget, Engine, TriBool
from .systems import (
    EQUIV,
    GTRS,
    REACH,
    Atom,
    HornClause,
    Rule,
    apply_atom,
    atom_variables,
    classify,
    make_system,
    pred_symbol,
    rule_type,
    STEP,
)
from .terms import (
    App,
    ReplacementMap,
    Substitution,
    Symbol,
    Term,
    Var,
    frozen_variables,
    ground_down,
    is_closed,
    variables,
    variables_of_all,
)


# ----------------------------------------------------------------------
# simplification


def simplify(g: GTRS, b: Optional[Budget] = None) -> GTRS:
    """Fixpoint of: drop trivial rules, drop trivial ==-conditions, drop
    rules with definitively unsatisfiable conditions, and drop ground atoms
    that hold on their own."""
    eng = Engine(g, b)
    sem = classify(g).semantics
    clauses = list(g.clauses)
    rules = list(g.rules)
    changed = True
    while changed:
        changed = False
        new_rules = []
        for r in rules:
            if r.lhs == r.rhs:
                changed = True
                continue
            conds = list(r.conds)
            if sem is not None:
                kept = [
                    a
                    for a in conds
                    if not (a.pred == EQUIV and a.args[0] == a.args[1])
                ]
                if len(kept) != len(conds):
                    changed = True
                    conds = kept
            kept = []
            for a in conds:
                if all(is_closed(t) for t in a.args):
                    sols, exhaustive = eng.solve((a,))
                    if sols and exhaustive:
                        changed = True
                        continue
                kept.append(a)
            conds = kept
            if conds and eng.find_witness(tuple(conds)) is None:
                sols, exhaustive = eng.solve(tuple(conds))
                if not sols and exhaustive:
                    changed = True
                    continue
            new_rules.append(Rule(r.label, r.lhs, r.rhs, tuple(conds)))
        rules = new_rules
        if changed:
            eng = Engine(g.with_rules(rules), b)
    if list(rules) == list(g.rules):
        return g
    return g.with_rules(rules, name=(g.name + "'") if g.name else "")


# ----------------------------------------------------------------------
# inlining


def _is_reachability_cond(g: GTRS, a: Atom) -> bool:
    if a.pred == REACH:
        return True
    if a.pred != EQUIV:
        return False
    return classify(g).semantics == "oriented" or _oriented_clause_only(g)


def _oriented_clause_only(g: GTRS) -> bool:
    eq_clauses = g.clauses_for(EQUIV)
    if len(eq_clauses) != 1:
        return False
    c = eq_clauses[0]
    if len(c.body) != 1 or c.body[0].pred != REACH:
        return False
    return (
        isinstance(c.head.args[0], Var)
        and isinstance(c.head.args[1], Var)
        and c.body[0].args == c.head.args
    )


def inline(g: GTRS) -> GTRS:
    """Repeatedly substitute away conditions of shape ``s == x`` whose
    variable is not otherwise constrained, until no step applies."""
    rules = list(g.rules)
    changed = True
    any_change = False
    while changed:
        changed = False
        for idx, r in enumerate(rules):
            if not r.conds:
                continue
            if not all(_is_reachability_cond(g, a) for a in r.conds):
                continue
            for i, cond in enumerate(r.conds):
                s_i, t_i = cond.args
                if not isinstance(t_i, Var):
                    continue
                x = t_i.name
                other_rhs = [c.args[1] for j, c in enumerate(r.conds) if j != i]
                blocked = (
                    variables(r.lhs)
                    | variables(s_i)
                    | variables_of_all(other_rhs)
                    | frozen_variables(r.rhs, g.mu)
                    | set().union(
                        *(frozen_variables(c.args[0], g.mu) for c in r.conds)
                    )
                )
                if x in blocked:
                    continue
                sigma = Substitution({x: s_i})
                new_conds = tuple(
                    Atom(c.pred, (sigma.apply(c.args[0]), c.args[1]))
                    for j, c in enumerate(r.conds)
                    if j != i
                )
                rules[idx] = Rule(r.label, r.lhs, sigma.apply(r.rhs), new_conds)
                changed = True
                any_change = True
                break
            if changed:
                break
    if not any_change:
        return g
    if all(not r.conds and rule_type(r) <= 2 for r in rules):
        return make_system(
            g.funcs,
            rules,
            mu=g.mu,
            name=(g.name + "_inl") if g.name else "",
        )
    return g.with_rules(rules, name=(g.name + "_inl") if g.name else "")


# ----------------------------------------------------------------------
# unravelings


def _is_dctrs(g: GTRS) -> bool:
    from .pairs import _is_deterministic

    cls = classify(g)
    if cls.semantics not in ("oriented",) and not cls.unconditional:
        return False
    if any(rule_type(r) > 3 for r in g.rules):
        return False
    return _is_deterministic(g)


def _accumulated_vars(rule: Rule, upto: int) -> list:
    """Variables of the lhs and the first ``upto`` condition right-hand
    sides, in order of first occurrence."""
    seen: list = []

    def collect(t: Term):
        if isinstance(t, Var):
            if t.name not in seen:
                seen.append(t.name)
        else:
            for a in t.args:
                collect(a)

    collect(rule.lhs)
    for j in range(upto):
        collect(rule.conds[j].args[1])
    return seen


def _unravel(g: GTRS, symbol_namer) -> GTRS:
    if not _is_dctrs(g):
        raise ValueError("unraveling needs a deterministic system of 3-rules")
    new_rules = []
    new_symbols: dict = {}
    for rule in g.rules:
        if not rule.conds:
            new_rules.append(rule)
            continue
        n = len(rule.conds)
        prev_lhs: Term = rule.lhs
        for i in range(n):
            s_i, t_i = rule.conds[i].args
            xs = _accumulated_vars(rule, i)
            name = symbol_namer(rule, i)
            sym = new_symbols.get(name)
            if sym is None:
                sym = Symbol(name, 1 + len(xs))
                new_symbols[name] = sym
            call = App(sym, (s_i, *(Var(v) for v in xs)))
            new_rules.append(Rule(f"{rule.label}.{i}", prev_lhs, call))
            prev_lhs = App(sym, (t_i, *(Var(v) for v in xs)))
        new_rules.append(Rule(f"{rule.label}.{n}", prev_lhs, rule.rhs))
    # merged duplicate rules (shared symbols can repeat a rule verbatim)
    seen = set()
    dedup = []
    for r in new_rules:
        key = (r.lhs, r.rhs)
        if key in seen:
            continue
        seen.add(key)
        dedup.append(r)
    funcs = tuple(g.funcs) + tuple(new_symbols.values())
    return make_system(funcs, dedup, mu=ReplacementMap.top(funcs), name=(g.name + "_U") if g.name else "")


def unravel_u(g: GTRS) -> GTRS:
    """Fresh intermediate symbols per rule and condition index."""

    def namer(rule: Rule, i: int) -> str:
        return f"U_{rule.label}_{i + 1}"

    return _unravel(g, namer)


def unravel_uconf(g: GTRS) -> GTRS:
    """Intermediate symbols keyed by the lhs and the condition prefix, so
    rules with identical prefixes share them."""
    registry: dict = {}

    def namer(rule: Rule, i: int) -> str:
        names: dict = {}

        def canon(t: Term) -> str:
            if isinstance(t, Var):
                if t.name not in names:
                    names[t.name] = f"_{len(names)}"
                return names[t.name]
            return t.sym.name + "(" + ",".join(canon(a) for a in t.args) + ")"

        parts = [canon(rule.lhs)]
        for j in range(i):
            parts.append(canon(rule.conds[j].args[0]))
            parts.append(canon(rule.conds[j].args[1]))
        parts.append(canon(rule.conds[i].args[0]))
        key = "|".join(parts)
        if key not in registry:
            registry[key] = f"U{len(registry) + 1}"
        return registry[key]

    return _unravel(g, namer)


def u_preserves_irreducibility(g: GTRS, b: Optional[Budget] = None) -> TriBool:
    """Sufficient check: each rule's conditions stay satisfiable after the
    lhs variables are frozen to grounding constants.  Never answers No."""
    if not _is_dctrs(g):
        raise ValueError("unraveling needs a deterministic system of 3-rules")
    eng = Engine(g, b)
    for rule in g.rules:
        if not rule.conds:
            continue
        lhs_vars = variables(rule.lhs)
        grounding = Substitution(
            {v: ground_down(Var(v)) for v in sorted(lhs_vars)}
        )
        conds = tuple(apply_atom(grounding, a) for a in rule.conds)
        sols, _exhaustive = eng.solve(conds)
        if not sols:
            return UNKNOWN
    return YES


# ----------------------------------------------------------------------
# modular decomposition


DISJOINT = "disjoint"
CONSTRUCTOR_SHARING = "constructor-sharing"
COMPOSABLE = "composable"


@dataclass(frozen=True)
class Decomposition:
    part1: GTRS
    part2: GTRS
    combination: str
    layer_preserving: tuple  # per part


def _rule_symbols(r: Rule) -> set:
    out: set = set()

    def walk(t: Term):
        if isinstance(t, App):
            out.add(t.sym)
            for a in t.args:
                walk(a)

    walk(r.lhs)
    walk(r.rhs)
    return out


def _part_system(g: GTRS, rules: list, tag: str) -> GTRS:
    syms: list = []
    for r in rules:
        for s in _rule_symbols(r):
            if s not in syms:
                syms.append(s)
    ordered = [s for s in g.funcs if s in syms]
    mu = ReplacementMap(
        {s.name: g.mu.indices(s) for s in ordered if g.mu.indices(s)}
    )
    return GTRS(
        tuple(ordered),
        (pred_symbol(STEP), pred_symbol(REACH)),
        mu,
        (),
        tuple(rules),
        name=(g.name + tag) if g.name else tag,
    )


def _layer_preserving(part: GTRS, shared: set) -> bool:
    """No collapsing rules and no rules producing a shared symbol at the root."""
    for r in part.rules:
        if isinstance(r.rhs, Var):
            return False
        if r.rhs.sym in shared:
            return False
    return True


def decompose_modular(g: GTRS, b: Optional[Budget] = None) -> Optional[Decomposition]:
    """Split the rules into two parts sharing constructors at most.

    Rules are grouped by shared defined symbols (a defined symbol occurring
    anywhere in another rule merges the groups); the strongest combination
    among the candidate bipartitions wins, disjoint before
    constructor-sharing."""
    if not g.is_unconditional():
        raise ValueError("modular decomposition needs an unconditional system")
    rules = list(g.rules)
    if len(rules) < 2:
        return None
    defined = {r.lhs.sym for r in rules}
    # union-find over rule indices
    parent = list(range(len(rules)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri

    sym_sets = [_rule_symbols(r) for r in rules]
    for i in range(len(rules)):
        for j in range(i + 1, len(rules)):
            share = sym_sets[i] & sym_sets[j]
            if any(s in defined for s in share):
                union(i, j)
    groups: dict = {}
    for i in range(len(rules)):
        groups.setdefault(find(i), []).append(i)
    comps = [sorted(ix) for _, ix in sorted(groups.items())]
    if len(comps) < 2:
        return None

    def build(split_first: list):
        first = [rules[i] for c in split_first for i in c]
        rest = [
            rules[i]
            for c in comps
            if c not in split_first
            for i in c
        ]
        p1 = _part_system(g, first, "_1")
        p2 = _part_system(g, rest, "_2")
        shared = set(p1.funcs) & set(p2.funcs)
        if not shared:
            comb = DISJOINT
        else:
            d1 = {r.lhs.sym for r in p1.rules}
            d2 = {r.lhs.sym for r in p2.rules}
            if any(s in d1 or s in d2 for s in shared):
                return None  # defined symbol crosses the split
            comb = CONSTRUCTOR_SHARING
        lp = (
            _layer_preserving(p1, shared),
            _layer_preserving(p2, shared),
        )
        return Decomposition(p1, p2, comb, lp)

    candidates = []
    for k in range(1, len(comps)):
        dec = build(comps[:k])
        if dec is not None:
            candidates.append(dec)
    if not candidates:
        return None
    for dec in candidates:
        if dec.combination == DISJOINT:
            return dec
    return candidates[0]
