"""Bounded termination analysis.

Three sound engines: a lexicographic path order over the unconditional
rules (rewriting with conditions and replacement restrictions is contained
in unrestricted rewriting with them dropped), loop detection by bounded
unfolding for definitive No answers, and a rule-removal argument with
status-filtered symbol counts for systems whose termination depends on the
replacement map.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Optional

from .rewriting import NO, UNKNOWN, YES, Budget, Engine, TriBool
from .systems import GTRS, Rule, underlying_trs
from .terms import (
    App,
    Term,
    Var,
    active_positions,
    match,
    positions,
    render,
    subterm_at,
    term_size,
    variables,
)

# ----------------------------------------------------------------------
# lexicographic path order


def lpo_gt(s: Term, t: Term, rank: dict) -> bool:
    if isinstance(s, Var):
        return False
    if isinstance(t, Var):
        return t.name in variables(s)
    if any(a == t or lpo_gt(a, t, rank) for a in s.args):
        return True
    rs, rt = rank.get(s.sym.name, -1), rank.get(t.sym.name, -1)
    if rs > rt:
        return all(lpo_gt(s, b, rank) for b in t.args)
    if s.sym == t.sym:
        for a, b in zip(s.args, t.args):
            if a == b:
                continue
            if lpo_gt(a, b, rank):
                return all(lpo_gt(s, c, rank) for c in t.args)
            return False
    return False


def _rule_symbols(rules: Iterable[Rule]) -> list:
    seen: list = []

    def walk(t: Term):
        if isinstance(t, App):
            if t.sym.name not in seen:
                seen.append(t.sym.name)
            for a in t.args:
                walk(a)

    for r in rules:
        walk(r.lhs)
        walk(r.rhs)
    return seen


def lpo_orients(rules: Iterable[Rule]) -> Optional[dict]:
    """A precedence under which every rule strictly decreases, or None.

    All precedences are tried for up to seven symbols; larger signatures
    fall back to a dependency-guided greedy order.
    """
    rules = list(rules)
    if not rules:
        return {}
    syms = _rule_symbols(rules)
    if len(syms) <= 7:
        for perm in permutations(syms):
            rank = {name: i for i, name in enumerate(reversed(perm))}
            if all(lpo_gt(r.lhs, r.rhs, rank) for r in rules):
                return rank
        return None
    # greedy: lhs roots outrank symbols introduced by their right-hand sides
    score = {name: 0 for name in syms}
    for _ in range(len(syms)):
        for r in rules:
            root = r.lhs.sym.name
            for name in _term_symbols(r.rhs):
                if name != root and score[name] >= score[root]:
                    score[name] = score[root] - 1
    order = sorted(syms, key=lambda n: (-score[n], syms.index(n)))
    rank = {name: i for i, name in enumerate(reversed(order))}
    if all(lpo_gt(r.lhs, r.rhs, rank) for r in rules):
        return rank
    return None


def _term_symbols(t: Term) -> list:
    out: list = []

    def walk(u: Term):
        if isinstance(u, App):
            if u.sym.name not in out:
                out.append(u.sym.name)
            for a in u.args:
                walk(a)

    walk(t)
    return out


# ----------------------------------------------------------------------
# loop detection


def find_loop(g: GTRS, b: Optional[Budget] = None) -> Optional[dict]:
    """Bounded unfolding from each left-hand side, looking for a derived
    term embedding an instance of the start at an active position."""
    budget = (b or Budget()).scaled(max_successors=80, max_steps=2500)
    eng = Engine(g, budget)
    for rule in g.rules:
        start = rule.lhs
        seen = {start}
        frontier = [start]
        for _ in range(6):
            nxt = []
            for u in frontier:
                res, _ = eng.one_step(u)
                for w in res:
                    for q in active_positions(w, g.mu):
                        subject = subterm_at(w, q)
                        if isinstance(subject, App) and match(start, subject) is not None:
                            return {
                                "rule": rule.label,
                                "start": render(start),
                                "loops_to": render(w),
                                "position": ".".join(map(str, q)) or "root",
                            }
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
            frontier = nxt
            if not frontier:
                break
    return None


# ----------------------------------------------------------------------
# status-filtered counting measures for replacement-map termination

ACT, EXP, DEAD = 2, 1, 0


def _extractable_slots(g: GTRS) -> set:
    """Frozen argument slots whose stored content some rule can re-expose."""
    rules = g.rules
    mu = g.mu
    extr: set = set()

    def path_slots(t: Term, p: tuple) -> list:
        slots = []
        cur = t
        for i in p:
            slots.append((cur.sym.name, i, i in mu.indices(cur.sym)))
            cur = cur.args[i - 1]
        return slots

    def status_of(slots: list) -> int:
        st = ACT
        for name, i, active in slots:
            if active:
                continue
            if (name, i) in extr:
                st = min(st, EXP)
            else:
                return DEAD
        return st

    changed = True
    while changed:
        changed = False
        for r in rules:
            for side_src, side_dst in [(r.lhs, r.rhs)]:
                for p in positions(side_dst):
                    tdst = subterm_at(side_dst, p)
                    if not isinstance(tdst, Var):
                        continue
                    if status_of(path_slots(side_dst, p)) == DEAD:
                        continue
                    # variable lands at an exposable spot: every frozen slot
                    # on its left-hand-side paths becomes extractable
                    for q in positions(side_src):
                        tsrc = subterm_at(side_src, q)
                        if isinstance(tsrc, Var) and tsrc.name == tdst.name:
                            for name, i, active in path_slots(side_src, q):
                                if not active and (name, i) not in extr:
                                    extr.add((name, i))
                                    changed = True
    return extr


def _position_status(t: Term, p: tuple, mu, extr: set) -> int:
    st = ACT
    cur = t
    for i in p:
        active = i in mu.indices(cur.sym)
        if not active:
            if (cur.sym.name, i) in extr:
                st = min(st, EXP)
            else:
                return DEAD
        cur = cur.args[i - 1]
    return st


@dataclass(frozen=True)
class CountMeasure:
    symbol: str
    statuses: frozenset  # which composed statuses are counted

    def describe(self) -> str:
        names = {ACT: "active", EXP: "exposable", DEAD: "any"}
        tag = "/".join(names[s] for s in sorted(self.statuses, reverse=True))
        return f"count[{self.symbol}@{tag}]"


@dataclass(frozen=True)
class PairMeasure:
    above: str
    below: str

    def describe(self) -> str:
        return f"pairs[{self.above} over {self.below}]"


def _count_side(t: Term, sym: str, statuses: frozenset, mu, extr) -> int:
    n = 0
    for p in positions(t):
        u = subterm_at(t, p)
        if isinstance(u, App) and u.sym.name == sym:
            if _position_status(t, p, mu, extr) in statuses:
                n += 1
    return n


def _var_occurrence_statuses(t: Term, mu, extr) -> dict:
    out: dict = {}
    for p in positions(t):
        u = subterm_at(t, p)
        if isinstance(u, Var):
            out.setdefault(u.name, []).append(_position_status(t, p, mu, extr))
    return out


def _count_checks(m: CountMeasure, rule: Rule, mu, extr):
    pat_l = _count_side(rule.lhs, m.symbol, m.statuses, mu, extr)
    pat_r = _count_side(rule.rhs, m.symbol, m.statuses, mu, extr)
    occ_l = _var_occurrence_statuses(rule.lhs, mu, extr)
    occ_r = _var_occurrence_statuses(rule.rhs, mu, extr)
    for v, r_statuses in occ_r.items():
        l_statuses = occ_l.get(v, [])
        for s in (ACT, EXP, DEAD):
            gain = sum(1 for o in r_statuses if min(o, s) in m.statuses)
            pay = sum(1 for o in l_statuses if min(o, s) in m.statuses)
            if gain > pay:
                return None  # an instance could increase the measure
    return pat_l - pat_r


def _pair_checks(m: PairMeasure, rule: Rule, mu, extr):
    live = frozenset({ACT, EXP})
    for side in (rule.lhs, rule.rhs):
        occ = _var_occurrence_statuses(side, mu, extr)
        for statuses in occ.values():
            if any(s != DEAD for s in statuses):
                return None  # variable content could contribute pairs
    for sym in (m.above, m.below):
        cm = CountMeasure(sym, live)
        if _count_checks(cm, rule, mu, extr) is None or _count_checks(
            cm, rule, mu, extr
        ) < 0:
            return None  # cross pairs with the context could grow

    def pairs(t: Term) -> int:
        n = 0
        pos = [
            p
            for p in positions(t)
            if isinstance(subterm_at(t, p), App)
            and _position_status(t, p, mu, extr) in live
        ]
        for p in pos:
            if subterm_at(t, p).sym.name != m.above:
                continue
            for q in pos:
                if (
                    len(q) > len(p)
                    and q[: len(p)] == p
                    and subterm_at(t, q).sym.name == m.below
                ):
                    n += 1
        return n

    return pairs(rule.lhs) - pairs(rule.rhs)


def removal_measures(g: GTRS) -> Optional[list]:
    """Greedy lexicographic rule removal; a full removal proves that
    rewriting under the replacement map terminates."""
    base = underlying_trs(g)
    mu = g.mu
    extr = _extractable_slots(base)
    sym_names = [s.name for s in base.funcs]
    defined = [s.name for s in base.defined_symbols()]
    candidates: list = []
    for name in sym_names:
        for statuses in (
            frozenset({ACT}),
            frozenset({ACT, EXP}),
            frozenset({ACT, EXP, DEAD}),
        ):
            candidates.append(CountMeasure(name, statuses))
    for a in defined:
        for bsym in defined:
            if a != bsym:
                candidates.append(PairMeasure(a, bsym))
    alive = list(base.rules)
    used: list = []
    while alive:
        progressed = False
        for m in candidates:
            deltas = []
            ok = True
            for r in alive:
                if isinstance(m, CountMeasure):
                    d = _count_checks(m, r, mu, extr)
                else:
                    d = _pair_checks(m, r, mu, extr)
                if d is None or d < 0:
                    ok = False
                    break
                deltas.append(d)
            if not ok or not any(d > 0 for d in deltas):
                continue
            used.append(m.describe())
            alive = [r for r, d in zip(alive, deltas) if d == 0]
            progressed = True
            break
        if not progressed:
            return None
    return used


# ----------------------------------------------------------------------
# entry point


def terminating(g: GTRS, b: Optional[Budget] = None):
    """Three-valued termination of rewriting as restricted by the system."""
    loop = find_loop(g, b)
    if loop is not None:
        return NO, f"loop from {loop['start']} via rule {loop['rule']}"
    rules = underlying_trs(g).rules
    rank = lpo_orients(rules)
    if rank is not None:
        order = " > ".join(
            sorted(rank, key=lambda name: -rank[name])
        )
        return YES, f"lexicographic path order with precedence {order}"
    if not g.mu.is_top(g.funcs):
        used = removal_measures(g)
        if used is not None:
            return YES, "rule removal with measures " + ", ".join(used)
    return UNKNOWN, "no termination certificate found"
