"""The proof processors.

A processor maps a problem to "no" or a list of subproblems, or declines
(returns None) when the problem is outside its domain.  Each application
records whether it is sound (positive answers propagate up) and complete
(negative answers propagate up) for the problem it was applied to; the
verdict reader enforces those flags.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from . import pairs as pairs_mod
from . import transforms
from .oracles import joinable_pair, strongly_joinable_pair, normalizing
from .pairs import (
    ConditionalPair,
    canonical_rmap,
    convective_rmap,
    cvps,
    eccps,
    improper_ccps,
    lhcps,
    proper_ccps,
    syntactic_profile,
)
from .rewriting import NO, UNKNOWN, YES, Budget, Engine
from .systems import GTRS, classify, rule_type
from .terms import ReplacementMap, Var, positions, render, subterm_at, variables
from .termination import terminating
from .transforms import (
    CONSTRUCTOR_SHARING,
    DISJOINT,
    decompose_modular,
    inline,
    simplify,
    u_preserves_irreducibility,
    unravel_u,
    unravel_uconf,
)

CR, WCR, SCR, JO, SJO = "CR", "WCR", "SCR", "JO", "SJO"
CONFLUENCE_KINDS = (CR, WCR, SCR)


@dataclass(frozen=True)
class Problem:
    kind: str
    system: GTRS
    pair: Optional[ConditionalPair] = None

    def fingerprint(self) -> str:
        tail = ""
        if self.pair is not None:
            tail = "::" + self.pair.render()
        return f"{self.kind}::{self.system.fingerprint()}{tail}"

    def describe(self) -> str:
        name = self.system.name or "system"
        if self.pair is not None:
            return f"{self.kind} {name} {self.pair.render()}"
        return f"{self.kind} {name}"


@dataclass(frozen=True)
class Outcome:
    """Either a refutation or a (possibly empty) list of subproblems."""

    answer_no: bool = False
    subproblems: tuple = ()


@dataclass(frozen=True)
class Application:
    processor: str
    outcome: Outcome
    sound: bool
    complete: bool
    annotations: dict = field(default_factory=dict)


class Context:
    """Budgets, shared engines, and memoized analyses for one proof run."""

    def __init__(self, budgets: Optional[dict] = None):
        base = {
            "feasibility": Budget(seconds=2.0),
            "termination": Budget(seconds=5.0),
        }
        base.update(budgets or {})
        self.budgets = base
        self._engines: dict = {}
        self._memo: dict = {}

    def budget(self, kind: str) -> Budget:
        return self.budgets.get(kind, self.budgets["feasibility"])

    def engine(self, g: GTRS) -> Engine:
        key = g.fingerprint()
        eng = self._engines.get(key)
        if eng is None or not eng.meter.ok():
            eng = Engine(g, self.budget("feasibility"))
            self._engines[key] = eng
        return eng

    def cached(self, tag: str, g: GTRS, compute: Callable):
        key = (tag, g.fingerprint())
        if key not in self._memo:
            self._memo[key] = compute()
        return self._memo[key]

    def profile(self, g: GTRS):
        return self.cached(
            "profile", g, lambda: syntactic_profile(g, self.budget("feasibility"))
        )

    def terminating_of(self, g: GTRS):
        return self.cached(
            "terminating", g, lambda: terminating(g, self.budget("termination"))
        )

    def pccps_of(self, g: GTRS):
        return self.cached(
            "pccps",
            g,
            lambda: proper_ccps(g, self.budget("feasibility"), self.engine(g)),
        )

    def iccps_of(self, g: GTRS):
        return self.cached(
            "iccps",
            g,
            lambda: improper_ccps(g, self.budget("feasibility"), self.engine(g)),
        )

    def eccps_of(self, g: GTRS):
        return self.cached(
            "eccps",
            g,
            lambda: eccps(g, self.budget("feasibility"), self.engine(g)),
        )

    def simplified(self, g: GTRS):
        return self.cached(
            "simplified", g, lambda: simplify(g, self.budget("feasibility"))
        )

    def cvps_of(self, g: GTRS):
        return self.cached(
            "cvps", g, lambda: cvps(g, self.budget("feasibility"), self.engine(g))
        )

    def normalizing_of(self, g: GTRS):
        return self.cached(
            "normalizing", g, lambda: normalizing(g, self.budget("feasibility"))
        )


@dataclass(frozen=True)
class ProcessorMeta:
    name: str
    kinds: tuple
    ends_with: tuple = ()


# static capability table; per-application flags may be narrower
META = {
    "extra-variables": ProcessorMeta("extra-variables", CONFLUENCE_KINDS, ("no",)),
    "simplify": ProcessorMeta("simplify", CONFLUENCE_KINDS),
    "inline": ProcessorMeta("inline", CONFLUENCE_KINDS),
    "modular-split": ProcessorMeta("modular-split", CONFLUENCE_KINDS),
    "critical-pairs": ProcessorMeta("critical-pairs", (WCR, SCR), ("yes",)),
    "unravel": ProcessorMeta("unravel", (CR,)),
    "unravel-shared": ProcessorMeta("unravel-shared", (CR,)),
    "orthogonal": ProcessorMeta("orthogonal", (CR, WCR), ("yes",)),
    "as-confluence": ProcessorMeta("as-confluence", (WCR, SCR)),
    "as-local-confluence": ProcessorMeta("as-local-confluence", (CR, SCR)),
    "as-strong-confluence": ProcessorMeta("as-strong-confluence", (CR, WCR)),
    "canonical-joinability": ProcessorMeta("canonical-joinability", (CR,)),
    "convective-joinability": ProcessorMeta("convective-joinability", (CR,)),
    "canonical-confluence": ProcessorMeta("canonical-confluence", (CR,)),
    "knuth-bendix": ProcessorMeta("knuth-bendix", (CR,), ("yes",)),
    "joinability": ProcessorMeta("joinability", (JO, SJO), ("yes", "no")),
}


def p_evar(problem: Problem, ctx: Context) -> Optional[Application]:
    """A feasible rule with an uncovered extra variable below no defined
    symbol makes every confluence variant fail."""
    if problem.kind not in CONFLUENCE_KINDS:
        return None
    g = problem.system
    eng = ctx.engine(g)
    defined = set(g.defined_symbols())
    for rule in g.rules:
        from .systems import atom_variables

        extra = variables(rule.rhs) - variables(rule.lhs) - atom_variables(rule.conds)
        if not extra:
            continue
        if eng.rule_feasible(rule) != YES:
            continue
        for p in positions(rule.rhs):
            t = subterm_at(rule.rhs, p)
            if not isinstance(t, Var) or t.name not in extra:
                continue
            cur = rule.rhs
            clean = True
            for i in p:
                if cur.sym in defined:
                    clean = False
                    break
                cur = cur.args[i - 1]
            if clean:
                return Application(
                    "extra-variables",
                    Outcome(answer_no=True),
                    sound=True,
                    complete=True,
                    annotations={
                        "rule": rule.label,
                        "variable": t.name,
                    },
                )
    return None


def p_simp(problem: Problem, ctx: Context) -> Optional[Application]:
    if problem.kind not in CONFLUENCE_KINDS:
        return None
    g2 = ctx.simplified(problem.system)
    if g2 is problem.system:
        return None
    removed = len(problem.system.rules) - len(g2.rules)
    return Application(
        "simplify",
        Outcome(subproblems=(Problem(problem.kind, g2),)),
        sound=True,
        complete=True,
        annotations={"removed_rules": str(removed)},
    )


def p_inl(problem: Problem, ctx: Context) -> Optional[Application]:
    if problem.kind not in CONFLUENCE_KINDS:
        return None
    g2 = inline(problem.system)
    if g2 is problem.system:
        return None
    return Application(
        "inline",
        Outcome(subproblems=(Problem(problem.kind, g2),)),
        sound=problem.kind == CR,
        complete=True,
        annotations={},
    )


def p_md(problem: Problem, ctx: Context) -> Optional[Application]:
    if problem.kind not in CONFLUENCE_KINDS:
        return None
    g = problem.system
    if not g.is_unconditional():
        return None
    dec = decompose_modular(g)
    if dec is None:
        return None
    prof = ctx.profile(g)
    comb = dec.combination
    if problem.kind == CR:
        sound = (
            comb == DISJOINT
            or (comb == CONSTRUCTOR_SHARING and prof.left_linear)
            or all(dec.layer_preserving)
        )
    elif problem.kind == WCR:
        sound = True  # all our combinations are composable
    else:
        sound = prof.linear
    if not sound:
        return None
    complete = comb == DISJOINT or problem.kind == WCR
    subs = (
        Problem(problem.kind, dec.part1),
        Problem(problem.kind, dec.part2),
    )
    return Application(
        "modular-split",
        Outcome(subproblems=subs),
        sound=True,
        complete=complete,
        annotations={
            "combination": comb,
            "layer_preserving": "/".join(str(x) for x in dec.layer_preserving),
        },
    )


def _cvp_condition_variables_stay_active(g: GTRS, pair_list) -> bool:
    """The semi-equational shortcut needs every variable-pair's critical
    variable to stay out of frozen condition positions."""
    from .terms import frozen_variables

    for p in pair_list:
        x = p.provenance.critical_var
        if x is None:
            continue
        for a in p.conds[1:]:
            for t in a.args:
                if x in frozen_variables(t, g.mu):
                    return False
    return True


def p_he(problem: Problem, ctx: Context) -> Optional[Application]:
    """Local confluence as joinability of the class-appropriate pair set;
    strong confluence of linear TRSs as strong joinability of critical
    pairs."""
    g = problem.system
    budget = ctx.budget("feasibility")
    eng = ctx.engine(g)
    if problem.kind == WCR:
        cls = classify(g)
        if cls.is_trs:
            pair_list = ctx.pccps_of(g)
            source = "critical pairs"
        elif cls.is_cs_trs:
            pair_list = ctx.pccps_of(g) + lhcps(g, budget)
            source = "critical + frozen-variable pairs"
        elif cls.semantics == "semi-equational":
            all_cvps = ctx.cvps_of(g)
            if _cvp_condition_variables_stay_active(g, all_cvps):
                pair_list = ctx.pccps_of(g) + ctx.iccps_of(g)
                source = "critical pairs (variable pairs provably joinable)"
            else:
                pair_list = ctx.eccps_of(g)
                source = "extended critical pairs"
        else:
            pair_list = ctx.eccps_of(g)
            source = "extended critical pairs"
        subs = tuple(Problem(JO, g, p) for p in pair_list)
        return Application(
            "critical-pairs",
            Outcome(subproblems=subs),
            sound=True,
            complete=True,
            annotations={"pairs": str(len(subs)), "source": source},
        )
    if problem.kind == SCR:
        cls = classify(g)
        prof = ctx.profile(g)
        if not (cls.is_trs and prof.linear):
            return None
        pair_list = ctx.pccps_of(g)
        subs = tuple(Problem(SJO, g, p) for p in pair_list)
        return Application(
            "critical-pairs",
            Outcome(subproblems=subs),
            sound=True,
            complete=True,
            annotations={"pairs": str(len(subs))},
        )
    return None


def p_u(problem: Problem, ctx: Context) -> Optional[Application]:
    if problem.kind != CR:
        return None
    g = problem.system
    cls = classify(g)
    if not (cls.base == "CTRS" and cls.semantics == "oriented"):
        return None
    if not any(r.conds for r in g.rules):
        return None
    try:
        preserved = u_preserves_irreducibility(g, ctx.budget("feasibility"))
    except ValueError:
        return None
    if preserved != YES:
        return None
    term, term_ev = ctx.terminating_of(g)
    if term != YES:
        return None
    g2 = unravel_u(g)
    return Application(
        "unravel",
        Outcome(subproblems=(Problem(CR, g2),)),
        sound=True,
        complete=False,
        annotations={
            "termination": term_ev,
            "irreducibility": "grounded conditions stay satisfiable",
        },
    )


def p_uconf(problem: Problem, ctx: Context) -> Optional[Application]:
    if problem.kind != CR:
        return None
    g = problem.system
    cls = classify(g)
    if not (cls.base == "CTRS" and cls.semantics == "oriented"):
        return None
    if not any(r.conds for r in g.rules):
        return None
    prof = ctx.profile(g)
    if not prof.weakly_left_linear or not prof.deterministic:
        return None
    if any(rule_type(r) > 3 for r in g.rules):
        return None
    g2 = unravel_uconf(g)
    return Application(
        "unravel-shared",
        Outcome(subproblems=(Problem(CR, g2),)),
        sound=True,
        complete=False,
        annotations={},
    )


def p_orth(problem: Problem, ctx: Context) -> Optional[Application]:
    if problem.kind not in (CR, WCR):
        return None
    g = problem.system
    budget = ctx.budget("feasibility")
    cls = classify(g)
    prof = ctx.profile(g)
    reason = None
    if cls.is_trs and prof.weakly_orthogonal:
        reason = "weakly orthogonal"
    elif (cls.is_cs_trs or cls.is_trs) and prof.mu_orthogonal:
        reason = "orthogonal under the replacement map"
    elif (
        cls.base == "CTRS"  # the conditional results need all arguments active
        and all(rule_type(r) <= 2 for r in g.rules)
        and prof.almost_orthogonal
        and prof.almost_normal
    ):
        reason = "almost orthogonal and almost normal"
    elif (
        cls.base == "CTRS"
        and all(rule_type(r) <= 3 for r in g.rules)
        and prof.left_linear
        and not ctx.pccps_of(g)
        and prof.properly_oriented
        and prof.right_stable
    ):
        reason = "orthogonal, properly oriented, right-stable"
    if reason is None:
        return None
    return Application(
        "orthogonal",
        Outcome(subproblems=()),
        sound=True,
        complete=True,
        annotations={"case": reason},
    )


def p_cr(problem: Problem, ctx: Context) -> Optional[Application]:
    if problem.kind not in (WCR, SCR):
        return None
    return Application(
        "as-confluence",
        Outcome(subproblems=(Problem(CR, problem.system),)),
        sound=problem.kind == WCR,
        complete=problem.kind == SCR,
        annotations={},
    )


def p_wcr(problem: Problem, ctx: Context) -> Optional[Application]:
    if problem.kind not in (CR, SCR):
        return None
    return Application(
        "as-local-confluence",
        Outcome(subproblems=(Problem(WCR, problem.system),)),
        sound=False,
        complete=True,
        annotations={},
    )


def p_scr(problem: Problem, ctx: Context) -> Optional[Application]:
    if problem.kind not in (CR, WCR):
        return None
    return Application(
        "as-strong-confluence",
        Outcome(subproblems=(Problem(SCR, problem.system),)),
        sound=True,
        complete=False,
        annotations={},
    )


def _canj_cnvj(problem: Problem, ctx: Context, mode: str) -> Optional[Application]:
    if problem.kind != CR:
        return None
    g = problem.system
    if not classify(g).is_trs:
        return None
    prof = ctx.profile(g)
    if not prof.left_linear:
        return None
    if mode == "convective":
        mu = convective_rmap(g)
        name = "convective-joinability"
    else:
        mu = canonical_rmap(g)
        name = "canonical-joinability"
    g_mu = g.with_mu(mu, name=(g.name + "_mu") if g.name else "restricted")
    prof_mu = ctx.profile(g_mu)
    if mode == "convective" and not prof_mu.lhrv:
        return None
    if mode == "canonical" and not prof_mu.level_decreasing:
        return None
    term, ev = ctx.terminating_of(g_mu)
    if term != YES:
        return None
    return Application(
        name,
        Outcome(subproblems=(Problem(WCR, g_mu),)),
        sound=True,
        complete=False,
        annotations={"termination": ev, "replacement_map": _mu_text(mu)},
    )


def _mu_text(mu: ReplacementMap) -> str:
    items = [
        f"{n}:{{{','.join(map(str, sorted(ix)))}}}"
        for n, ix in sorted(mu.entries.items())
        if ix
    ]
    return "; ".join(items) if items else "all arguments frozen"


def p_cnvj(problem: Problem, ctx: Context) -> Optional[Application]:
    """Try the convective map first, then the canonical one."""
    got = _canj_cnvj(problem, ctx, "convective")
    if got is not None:
        return got
    return _canj_cnvj(problem, ctx, "canonical")


def p_canj(problem: Problem, ctx: Context) -> Optional[Application]:
    return _canj_cnvj(problem, ctx, "canonical")


def p_cancr(problem: Problem, ctx: Context) -> Optional[Application]:
    if problem.kind != CR:
        return None
    g = problem.system
    if not classify(g).is_trs:
        return None
    if not ctx.profile(g).left_linear:
        return None
    norm, ev = ctx.normalizing_of(g)
    if norm != YES:
        return None
    mu = canonical_rmap(g)
    g_mu = g.with_mu(mu, name=(g.name + "_mu") if g.name else "restricted")
    return Application(
        "canonical-confluence",
        Outcome(subproblems=(Problem(CR, g_mu),)),
        sound=True,
        complete=False,
        annotations={"normalizing": ev, "replacement_map": _mu_text(mu)},
    )


def p_kb(problem: Problem, ctx: Context) -> Optional[Application]:
    """For terminating systems: joinability of overlay critical pairs when
    the condition semantics supports it, otherwise local confluence."""
    if problem.kind != CR:
        return None
    g = problem.system
    term, ev = ctx.terminating_of(g)
    if term != YES:
        return None
    cls = classify(g)
    annotations = {"termination": ev}
    if cls.semantics in ("join", "oriented"):
        ccps = ctx.pccps_of(g) + ctx.iccps_of(g)
        if ccps and all(p.is_overlay() for p in ccps):
            if cls.semantics == "oriented":
                annotations["note"] = (
                    "overlay branch applied to an oriented system"
                )
            subs = tuple(Problem(JO, g, p) for p in ccps)
            return Application(
                "knuth-bendix",
                Outcome(subproblems=subs),
                sound=True,
                complete=True,
                annotations=annotations,
            )
    return Application(
        "knuth-bendix",
        Outcome(subproblems=(Problem(WCR, g),)),
        sound=True,
        complete=True,
        annotations=annotations,
    )


def p_jo(problem: Problem, ctx: Context) -> Optional[Application]:
    if problem.kind not in (JO, SJO) or problem.pair is None:
        return None
    g = problem.system
    eng = ctx.engine(g)
    if problem.kind == JO:
        verdict, ev = joinable_pair(g, problem.pair, engine=eng)
    else:
        verdict, ev = strongly_joinable_pair(g, problem.pair, engine=eng)
    annotations = {"route": ev.route}
    if ev.witness is not None:
        annotations["witness"] = str(ev.witness)
    if ev.detail:
        annotations["detail"] = ev.detail
    if verdict == YES:
        return Application(
            "joinability", Outcome(subproblems=()), True, True, annotations
        )
    if verdict == NO:
        return Application(
            "joinability", Outcome(answer_no=True), True, True, annotations
        )
    return None


PROCESSORS: dict = {
    "extra-variables": p_evar,
    "simplify": p_simp,
    "inline": p_inl,
    "modular-split": p_md,
    "critical-pairs": p_he,
    "unravel": p_u,
    "unravel-shared": p_uconf,
    "orthogonal": p_orth,
    "as-confluence": p_cr,
    "as-local-confluence": p_wcr,
    "as-strong-confluence": p_scr,
    "canonical-joinability": p_canj,
    "convective-joinability": p_cnvj,
    "canonical-confluence": p_cancr,
    "knuth-bendix": p_kb,
    "joinability": p_jo,
}
