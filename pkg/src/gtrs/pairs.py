"""Conditional pairs: critical pairs, variable pairs, and related analyses.

Pairs are generated from feasible rules only, filtered again by the
feasibility of their own conditions (pairs whose check runs out of budget
are retained and marked, never silently dropped), and deduplicated up to
variable renaming.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .rewriting import NO, UNKNOWN, YES, Budget, Engine, TriBool
from .systems import (
    EQUIV,
    GTRS,
    REACH,
    STEP,
    Atom,
    Rule,
    apply_atom,
    apply_atoms,
    atom,
    atom_variables,
    classify,
    render_atom,
    rename_rule,
    rule_type,
    rule_variables,
    underlying_trs,
)
from .terms import (
    App,
    ReplacementMap,
    Substitution,
    Term,
    Var,
    active_nonvar_positions,
    active_var_positions,
    active_variables,
    frozen_variables,
    fresh_name,
    is_linear,
    nonvar_positions,
    positions,
    render,
    renaming_for,
    replace_at,
    subterm_at,
    unify,
    variables,
)

PROPER_CCP = "proper-critical-pair"
IMPROPER_CCP = "improper-critical-pair"
CVP = "variable-pair"
LHCP = "frozen-variable-pair"


@dataclass(frozen=True)
class Provenance:
    rules: tuple
    position: tuple
    kind: str
    critical_var: Optional[str] = None


@dataclass(frozen=True)
class ConditionalPair:
    left: Term
    right: Term
    conds: tuple
    provenance: Provenance
    feasibility: TriBool = YES

    def is_overlay(self) -> bool:
        return self.provenance.position == ()

    def render(self) -> str:
        base = f"<{render(self.left)}, {render(self.right)}>"
        if self.conds:
            base += " <= " + ", ".join(render_atom(a) for a in self.conds)
        return base


def _canonical_pair_key(p: ConditionalPair) -> str:
    names: dict = {}

    def canon(t: Term) -> str:
        if isinstance(t, Var):
            if t.name not in names:
                names[t.name] = f"_{len(names)}"
            return names[t.name]
        return t.sym.name + "(" + ",".join(canon(a) for a in t.args) + ")"

    parts = [canon(p.left), canon(p.right)]
    for a in p.conds:
        parts.append(a.pred + "(" + ",".join(canon(t) for t in a.args) + ")")
    return "|".join(parts)


def _dedup(pairs: Iterable[ConditionalPair]) -> list:
    seen = set()
    out = []
    for p in pairs:
        key = _canonical_pair_key(p)
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out


def _feasibility_filter(g: GTRS, pairs: list, engine: Engine) -> list:
    """Drop pairs with definitively unsatisfiable conditions; keep and mark
    the ones whose check was inconclusive."""
    out = []
    for p in pairs:
        if not p.conds:
            out.append(p)
            continue
        if engine.find_witness(p.conds) is not None:
            out.append(p)
            continue
        sols, exhaustive = engine.solve(p.conds)
        if sols:
            out.append(p)
        elif exhaustive:
            continue
        else:
            out.append(
                ConditionalPair(p.left, p.right, p.conds, p.provenance, UNKNOWN)
            )
    return out


def _feasible_rules(g: GTRS, engine: Engine) -> list:
    return [r for r in g.rules if engine.rule_feasible(r) != NO]


def proper_ccps(g: GTRS, b: Optional[Budget] = None, engine: Optional[Engine] = None) -> list:
    """Overlaps of one feasible rule inside another at an active non-variable
    position; root overlaps of a rule with its own copy are excluded."""
    eng = engine or Engine(g, b)
    rules = _feasible_rules(g, eng)
    out = []
    for outer in rules:
        for inner in rules:
            avoid = rule_variables(outer)
            rin = rename_rule(inner, renaming_for(rule_variables(inner), avoid))
            for p in active_nonvar_positions(outer.lhs, g.mu):
                if p == () and inner.label == outer.label:
                    continue  # a root overlap with itself is improper
                theta = unify(subterm_at(outer.lhs, p), rin.lhs)
                if theta is None:
                    continue
                left = theta.apply(replace_at(outer.lhs, p, rin.rhs))
                right = theta.apply(outer.rhs)
                conds = apply_atoms(theta, outer.conds + rin.conds)
                out.append(
                    ConditionalPair(
                        left,
                        right,
                        conds,
                        Provenance((outer.label, inner.label), p, PROPER_CCP),
                    )
                )
    return _feasibility_filter(g, _dedup(out), eng)


def improper_ccps(g: GTRS, b: Optional[Budget] = None, engine: Optional[Engine] = None) -> list:
    """Root overlaps of proper 3-rules with their own renamed copies."""
    eng = engine or Engine(g, b)
    out = []
    for rule in _feasible_rules(g, eng):
        if rule_type(rule) != 3:
            continue
        avoid = rule_variables(rule)
        rin = rename_rule(rule, renaming_for(avoid, avoid))
        theta = unify(rule.lhs, rin.lhs)
        if theta is None:
            continue
        left = theta.apply(rin.rhs)
        right = theta.apply(rule.rhs)
        conds = apply_atoms(theta, rule.conds + rin.conds)
        out.append(
            ConditionalPair(
                left,
                right,
                conds,
                Provenance((rule.label, rule.label), (), IMPROPER_CCP),
            )
        )
    return _feasibility_filter(g, _dedup(out), eng)


def cvps(g: GTRS, b: Optional[Budget] = None, engine: Optional[Engine] = None) -> list:
    """Pairs from rewriting inside an active variable occurrence of a lhs.

    An occurrence is skipped when the peak it describes is always joinable:
    the variable occurs exactly once in the lhs, does not appear in the
    conditions, and is never frozen in the rhs (then the rule still applies
    after the inner step and the two results rejoin by rewriting the active
    rhs occurrences)."""
    eng = engine or Engine(g, b)
    out = []
    for rule in _feasible_rules(g, eng):
        cond_vars = atom_variables(rule.conds)
        for x in sorted(active_variables(rule.lhs, g.mu)):
            occurrences = [
                p
                for p in positions(rule.lhs)
                if isinstance(subterm_at(rule.lhs, p), Var)
                and subterm_at(rule.lhs, p).name == x
            ]
            harmless = (
                len(occurrences) == 1
                and x not in cond_vars
                and x not in frozen_variables(rule.rhs, g.mu)
            )
            if harmless:
                continue
            for p in active_var_positions(rule.lhs, g.mu, x):
                fresh = Var(fresh_name(x, rule_variables(rule)))
                out.append(
                    ConditionalPair(
                        replace_at(rule.lhs, p, fresh),
                        rule.rhs,
                        (atom(STEP, Var(x), fresh),) + rule.conds,
                        Provenance((rule.label,), p, CVP, critical_var=x),
                    )
                )
    return _feasibility_filter(g, _dedup(out), eng)


def lhcps(g: GTRS, b: Optional[Budget] = None) -> list:
    """Variable pairs of unconditional rules restricted to variables that are
    active in the left-hand side but also frozen in it or in the right-hand
    side."""
    if not g.is_unconditional():
        raise ValueError("frozen-variable pairs are defined for unconditional systems")
    out = []
    for rule in g.rules:
        harmful = active_variables(rule.lhs, g.mu) & (
            frozen_variables(rule.lhs, g.mu) | frozen_variables(rule.rhs, g.mu)
        )
        for x in sorted(harmful):
            for p in active_var_positions(rule.lhs, g.mu, x):
                fresh = Var(fresh_name(x, rule_variables(rule)))
                out.append(
                    ConditionalPair(
                        replace_at(rule.lhs, p, fresh),
                        rule.rhs,
                        (atom(STEP, Var(x), fresh),),
                        Provenance((rule.label,), p, LHCP, critical_var=x),
                    )
                )
    return _dedup(out)


def eccps(g: GTRS, b: Optional[Budget] = None, engine: Optional[Engine] = None) -> list:
    """The pair set that characterizes local confluence for the system's
    class: plain critical pairs for TRSs, critical plus frozen-variable
    pairs for CS-TRSs, the full extended union otherwise."""
    eng = engine or Engine(g, b)
    cls = classify(g)
    if cls.is_trs:
        return proper_ccps(g, b, eng)
    if cls.is_cs_trs:
        return proper_ccps(g, b, eng) + lhcps(g, b)
    return proper_ccps(g, b, eng) + improper_ccps(g, b, eng) + cvps(g, b, eng)


# ----------------------------------------------------------------------
# replacement maps derived from the rules


def canonical_rmap(g: GTRS) -> ReplacementMap:
    """Least map making every non-variable subterm of every lhs active."""
    if not g.is_unconditional():
        raise ValueError("canonical replacement map needs an unconditional system")
    entries: dict = {}
    for rule in g.rules:
        for p in nonvar_positions(rule.lhs):
            cur = rule.lhs
            for i in p:
                if isinstance(cur.args[i - 1], App):
                    entries.setdefault(cur.sym.name, set()).add(i)
                cur = cur.args[i - 1]
    return ReplacementMap({k: frozenset(v) for k, v in entries.items()})


def convective_rmap(g: GTRS) -> ReplacementMap:
    """Least map making every critical position of every critical pair active."""
    if not g.is_unconditional():
        raise ValueError("convective replacement map needs an unconditional system")
    top = g.with_mu(ReplacementMap.top(g.funcs))
    entries: dict = {}
    for pair in proper_ccps(top):
        outer_label = pair.provenance.rules[0]
        rule = next(r for r in g.rules if r.label == outer_label)
        cur = rule.lhs
        for i in pair.provenance.position:
            entries.setdefault(cur.sym.name, set()).add(i)
            cur = cur.args[i - 1]
    return ReplacementMap({k: frozenset(v) for k, v in entries.items()})


# ----------------------------------------------------------------------
# syntactic profile


@dataclass(frozen=True)
class SyntacticProfile:
    left_linear: bool
    linear: bool
    weakly_orthogonal: bool
    mu_orthogonal: bool
    deterministic: bool
    properly_oriented: bool
    right_stable: bool
    almost_orthogonal: bool
    almost_normal: bool
    weakly_left_linear: bool
    level_decreasing: bool
    lhrv: bool


def _is_deterministic(g: GTRS) -> bool:
    for r in g.rules:
        bound = variables(r.lhs)
        for a in r.conds:
            if len(a.args) != 2:
                return False
            s, t = a.args
            if not variables(s) <= bound:
                return False
            bound = bound | variables(t)
    return True


def _properly_oriented(g: GTRS) -> bool:
    for r in g.rules:
        if variables(r.rhs) <= variables(r.lhs):
            continue
        bound = variables(r.lhs)
        for a in r.conds:
            s, t = a.args
            if not variables(s) <= bound:
                return False
            bound = bound | variables(t)
    return True


def _right_stable(g: GTRS, engine: Engine) -> bool:
    constructors = set(g.constructors())
    base = underlying_trs(g)
    base_engine = Engine(base, engine.budget)
    for r in g.rules:
        before = variables(r.lhs)
        for a in r.conds:
            s, t = a.args
            if (before | variables(s)) & variables(t):
                return False
            if not _linear_constructor(t, constructors):
                if variables(t):
                    return False
                if base_engine.is_irreducible(t) != YES:
                    return False
            before = before | variables(s) | variables(t)
    return True


def _linear_constructor(t: Term, constructors: set) -> bool:
    if not is_linear(t):
        return False

    def ok(u: Term) -> bool:
        if isinstance(u, Var):
            return True
        return u.sym in constructors and all(ok(a) for a in u.args)

    return ok(t)


def _weakly_left_linear(g: GTRS) -> bool:
    for r in g.rules:
        counts: dict = {}

        def bump(t: Term):
            if isinstance(t, Var):
                counts[t.name] = counts.get(t.name, 0) + 1
            else:
                for a in t.args:
                    bump(a)

        bump(r.lhs)
        for a in r.conds:
            bump(a.args[1])
        repeated = {v for v, n in counts.items() if n > 1}
        if not repeated:
            continue
        forbidden: set = set(variables(r.rhs))
        for a in r.conds:
            forbidden |= variables(a.args[0])
        if repeated & forbidden:
            return False
    return True


def _variable_level(t: Term, mu: ReplacementMap, name: str) -> int:
    """Maximum number of frozen argument hops down to an occurrence."""
    best = -1
    for p in positions(t):
        u = subterm_at(t, p)
        if isinstance(u, Var) and u.name == name:
            level = 0
            cur = t
            for i in p:
                if i not in mu.indices(cur.sym):
                    level += 1
                cur = cur.args[i - 1]
            best = max(best, level)
    return best


def _level_decreasing(g: GTRS) -> bool:
    for r in g.rules:
        for x in variables(r.rhs) & variables(r.lhs):
            if _variable_level(r.rhs, g.mu, x) > _variable_level(r.lhs, g.mu, x):
                return False
        if variables(r.rhs) - variables(r.lhs):
            return False
    return True


def _lhrv(g: GTRS) -> bool:
    """Variables active in a lhs never occur frozen in the rhs."""
    for r in g.rules:
        if active_variables(r.lhs, g.mu) & frozen_variables(r.rhs, g.mu):
            return False
    return True


def syntactic_profile(g: GTRS, b: Optional[Budget] = None) -> SyntacticProfile:
    eng = Engine(g, b)
    cls = classify(g)
    left_linear = all(is_linear(r.lhs) for r in g.rules)
    linear = left_linear and all(is_linear(r.rhs) for r in g.rules)
    pccps = proper_ccps(g, b, eng) if g.rules else []
    trivial = all(p.left == p.right for p in pccps)
    weakly_orthogonal = cls.is_trs and left_linear and trivial
    mu_orth = (
        cls.is_cs_trs or cls.is_trs
    ) and left_linear and not pccps and (not g.is_unconditional() or not lhcps(g, b))
    almost_orth = left_linear and all(
        p.left == p.right and p.is_overlay() for p in pccps
    )
    right_stable = _right_stable(g, eng)
    oriented = cls.semantics == "oriented" if cls.semantics else False
    return SyntacticProfile(
        left_linear=left_linear,
        linear=linear,
        weakly_orthogonal=weakly_orthogonal,
        mu_orthogonal=mu_orth,
        deterministic=oriented and _is_deterministic(g),
        properly_oriented=_properly_oriented(g),
        right_stable=right_stable,
        almost_orthogonal=almost_orth,
        almost_normal=right_stable and oriented,
        weakly_left_linear=_weakly_left_linear(g),
        level_decreasing=_level_decreasing(g),
        lhrv=_lhrv(g),
    )
