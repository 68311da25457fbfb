"""Decision oracles: feasibility, joinability, and normalization.

These replace external provers with bounded internal searches.  Every
answer is a three-valued verdict; Unknown always means the budget ran out,
never a definitive fact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .rewriting import NO, UNKNOWN, YES, Budget, Engine, TriBool
from .systems import (
    GTRS,
    REACH,
    Atom,
    Rule,
    apply_atoms,
    atom,
    atom_variables,
    classify,
)
from .terms import (
    Substitution,
    Term,
    Var,
    ground_down,
    is_closed,
    render,
    term_key,
    variables,
    variables_of_all,
)

# Fresh variable reserved for join targets in feasibility encodings.
JOIN_VAR = Var("z")


@dataclass(frozen=True)
class FeasibilityQuery:
    system: GTRS
    conditions: tuple
    fresh_vars: frozenset = frozenset()


@dataclass
class Feasibility:
    verdict: TriBool
    witness: Optional[Substitution] = None
    witnesses: tuple = ()


def feasible(
    q: FeasibilityQuery, b: Optional[Budget] = None, engine: Optional[Engine] = None
) -> Feasibility:
    """Search for a substitution satisfying every condition atom.

    Yes answers carry a witness; No is only reported when the whole search
    space was exhausted without truncation.
    """
    eng = engine or Engine(q.system, b)
    sols, exhaustive = eng.solve(q.conditions)
    if sols:
        wanted = atom_variables(q.conditions) | set(q.fresh_vars)
        trimmed = tuple(s.restrict(wanted) for s in sols)
        return Feasibility(YES, trimmed[0], trimmed)
    return Feasibility(NO if exhaustive else UNKNOWN)


def joinable_terms(
    g: GTRS,
    s: Term,
    t: Term,
    b: Optional[Budget] = None,
    engine: Optional[Engine] = None,
) -> TriBool:
    """Do the two terms reach a common reduct?  Grounded first, so open
    terms are compared with their variables treated as constants."""
    eng = engine or Engine(g, b)
    sg, tg = ground_down(s), ground_down(t)
    succ_s, cs = eng.successors(sg)
    succ_t, ct = eng.successors(tg)
    if set(succ_s) & set(succ_t):
        return YES
    if cs and ct:
        return NO
    return UNKNOWN


@dataclass
class JoinEvidence:
    route: str = ""
    witness: Optional[Substitution] = None
    detail: str = ""


def _join_target_atoms(s: Term, t: Term) -> tuple:
    return (atom(REACH, s, JOIN_VAR), atom(REACH, t, JOIN_VAR))


def joinable_pair(g: GTRS, pair, b: Optional[Budget] = None, engine=None):
    """Three-valued joinability of a conditional pair, with evidence.

    Cascade: trivial pairs, infeasible conditions, plain search for
    unconditional pairs, the variable-disjoint equivalence, a grounded
    positive check, then witness-driven non-joinability.
    """
    eng = engine or Engine(g, b)
    s, t, conds = pair.left, pair.right, tuple(pair.conds)

    if s == t:
        return YES, JoinEvidence("trivial")

    feas = feasible(FeasibilityQuery(g, conds), engine=eng)
    if feas.verdict == NO:
        return YES, JoinEvidence("infeasible-conditions")

    sg, tg = ground_down(s), ground_down(t)
    succ_s, comp_s = eng.successors(sg)
    succ_t, comp_t = eng.successors(tg)

    if not conds:
        common = set(succ_s) & set(succ_t)
        if common:
            w = sorted(common, key=term_key)[0]
            return YES, JoinEvidence("common-reduct", detail=render(w))
        if comp_s and comp_t:
            return NO, JoinEvidence("disjoint-reducts")
        return UNKNOWN, JoinEvidence("search-truncated")

    # conditional pair: variable-disjoint case is an equivalence
    cond_vars = atom_variables(conds)
    pair_vars = variables(s) | variables(t)
    grounded_join = feasible(
        FeasibilityQuery(g, _join_target_atoms(sg, tg), frozenset({JOIN_VAR.name})),
        engine=eng,
    )
    if not (cond_vars & pair_vars):
        if grounded_join.verdict == YES:
            return YES, JoinEvidence("grounded-join", grounded_join.witness)
        if grounded_join.verdict == NO and feas.verdict == YES:
            return NO, JoinEvidence("variable-disjoint-nonjoinable")
        return UNKNOWN, JoinEvidence("search-truncated")

    if grounded_join.verdict == YES:
        return YES, JoinEvidence("grounded-join", grounded_join.witness)

    verdict, ev = _nonjoinable_by_witness(g, eng, pair, feas)
    if verdict == NO:
        return NO, ev
    return UNKNOWN, JoinEvidence("no-route-concluded")


def _candidate_substitutions(g: GTRS, eng: Engine, pair, feas: Feasibility):
    """H1 (empty and grounded), H2 (rule-based for variable pairs), then
    H3 (feasibility witnesses), deduplicated in that order."""
    cands: list = []
    pair_vars = sorted(
        variables(pair.left) | variables(pair.right) | atom_variables(pair.conds)
    )
    cands.append(Substitution({}))
    cands.append(Substitution({v: ground_down(Var(v)) for v in pair_vars}))
    critical = getattr(pair.provenance, "critical_var", None)
    if critical is not None and pair.conds:
        first = pair.conds[0]
        if first.pred == STEP_NAME and len(first.args) == 2:
            xs, xt = first.args
            if isinstance(xs, Var) and isinstance(xt, Var):
                for rule in g.rules:
                    if rule.conds:
                        continue
                    cands.append(
                        Substitution(
                            {
                                xs.name: ground_down(rule.lhs),
                                xt.name: ground_down(rule.rhs),
                            }
                        )
                    )
    for w in feas.witnesses[:8]:
        cands.append(w)
    seen = []
    for c in cands:
        if c not in seen:
            seen.append(c)
    return seen


STEP_NAME = "->"


def _nonjoinable_by_witness(g: GTRS, eng: Engine, pair, feas: Feasibility):
    """A pair is not joinable if some instance satisfies the conditions but
    provably cannot join the two sides."""
    for sigma in _candidate_substitutions(g, eng, pair, feas):
        inst_conds = apply_atoms(sigma, pair.conds)
        inst_s = sigma.apply(pair.left)
        inst_t = sigma.apply(pair.right)
        sat = feasible(FeasibilityQuery(g, inst_conds), engine=eng)
        if sat.verdict != YES:
            continue
        refuted = feasible(
            FeasibilityQuery(
                g,
                inst_conds + _join_target_atoms(inst_s, inst_t),
                frozenset({JOIN_VAR.name}),
            ),
            engine=eng,
        )
        if refuted.verdict == NO:
            return NO, JoinEvidence(
                "witness-nonjoinable",
                sigma,
                detail=f"instance {render(inst_s)} / {render(inst_t)}",
            )
    return UNKNOWN, JoinEvidence("no-witness")


def strongly_joinable_pair(g: GTRS, pair, b: Optional[Budget] = None, engine=None):
    """Both sides reach each other's one-step neighbourhoods (grounded)."""
    eng = engine or Engine(g, b)
    s, t = pair.left, pair.right
    if s == t:
        return YES, JoinEvidence("trivial")
    conds = tuple(pair.conds)
    if conds:
        feas = feasible(FeasibilityQuery(g, conds), engine=eng)
        if feas.verdict == NO:
            return YES, JoinEvidence("infeasible-conditions")
        return UNKNOWN, JoinEvidence("conditional-strong-join-unsupported")
    sg, tg = ground_down(s), ground_down(t)
    one_s, cs1 = eng.one_step(sg)
    one_t, ct1 = eng.one_step(tg)
    direct_s = {sg, *one_s}
    direct_t = {tg, *one_t}
    succ_s, cs = eng.successors(sg)
    succ_t, ct = eng.successors(tg)
    hit_left = direct_t & set(succ_s)
    hit_right = direct_s & set(succ_t)
    if hit_left and hit_right:
        return YES, JoinEvidence("one-step-join")
    if cs and ct and cs1 and ct1:
        return NO, JoinEvidence("strong-join-refuted")
    return UNKNOWN, JoinEvidence("search-truncated")


def normalizing(g: GTRS, b: Optional[Budget] = None, engine=None):
    """Every term has a normal form.  Certified only via termination or a
    conservative enumeration check; never answers No."""
    from .termination import find_loop, terminating

    if not g.is_unconditional():
        raise ValueError("normalization check requires an unconditional system")
    term, _ev = terminating(g, b)
    if term == YES:
        return YES, "terminating"
    eng = engine or Engine(g, b)
    loop = find_loop(g, b)
    duplicating = any(_duplicating(r) for r in g.rules)
    if loop is not None and duplicating:
        return UNKNOWN, "duplicating rules feed a loop"
    from .terms import enumerate_ground_terms

    samples = enumerate_ground_terms(list(g.funcs), max_size=4, limit=60)
    for t in samples:
        if not _innermost_normalizes(eng, t):
            return UNKNOWN, f"no normal form found for {render(t)}"
    for r in g.rules:
        if not _innermost_normalizes(eng, ground_down(r.rhs)):
            return UNKNOWN, f"rule {r.label} right-hand side does not normalize"
    return YES, "innermost enumeration"


def _duplicating(r: Rule) -> bool:
    def counts(t: Term, acc: dict):
        if isinstance(t, Var):
            acc[t.name] = acc.get(t.name, 0) + 1
        else:
            for a in t.args:
                counts(a, acc)

    lhs: dict = {}
    rhs: dict = {}
    counts(r.lhs, lhs)
    counts(r.rhs, rhs)
    return any(rhs.get(v, 0) > lhs.get(v, 0) for v in rhs)


def _innermost_normalizes(eng: Engine, t: Term, limit: int = 200) -> bool:
    current = t
    for _ in range(limit):
        res, complete = eng.one_step(current)
        if not res:
            return complete
        # prefer the smallest reduct: a cheap innermost-flavoured descent
        current = sorted(res, key=term_key)[0]
    return False
