"""Bounded operational semantics for generalized term rewriting.

One-step rewriting evaluates rule conditions recursively: reachability
atoms by bounded forward/backward search, other predicates by bounded
resolution against the system's Horn clauses.  Every search reports
whether it was exhaustive, so callers can distinguish a definitive "no"
from running out of budget.

Condition goals can be mutually recursive (a rule's condition may mention
the very relation the rule defines), so goal answers are tabled and the
evaluation is iterated to a fixpoint before completeness is claimed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, Optional

from .systems import (
    EQUIV,
    GTRS,
    REACH,
    STEP,
    Atom,
    Rule,
    apply_atom,
    atom_variables,
    rename_rule,
    rule_variables,
)
from .terms import (
    App,
    Substitution,
    Term,
    Var,
    active_nonvar_positions,
    active_positions,
    enumerate_ground_terms,
    ground_down,
    is_closed,
    match,
    render,
    renaming_for,
    replace_at,
    subterm_at,
    term_key,
    term_size,
    unify,
    variables,
)


@dataclass(frozen=True)
class Budget:
    """Caps for the engine's searches.  All components must be positive."""

    max_depth: int = 8
    max_term_size: int = 100
    max_successors: int = 300
    max_steps: int = 20000
    max_solutions: int = 64
    seconds: float = 10.0

    def __post_init__(self):
        for name in (
            "max_depth",
            "max_term_size",
            "max_successors",
            "max_steps",
            "max_solutions",
            "seconds",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"budget component {name} must be positive")

    def scaled(self, **overrides) -> "Budget":
        data = {
            "max_depth": self.max_depth,
            "max_term_size": self.max_term_size,
            "max_successors": self.max_successors,
            "max_steps": self.max_steps,
            "max_solutions": self.max_solutions,
            "seconds": self.seconds,
        }
        data.update(overrides)
        return Budget(**data)


class TriBool:
    """Yes/No are definitive; Unknown only ever means "budget exhausted"."""

    __slots__ = ("value",)

    def __init__(self, value: str):
        self.value = value

    def __repr__(self):
        return self.value

    def __eq__(self, other):
        return isinstance(other, TriBool) and self.value == other.value

    def __hash__(self):
        return hash(self.value)

    def __bool__(self):  # pragma: no cover - guard against accidental truthiness
        raise TypeError("TriBool must be compared explicitly")


YES = TriBool("Yes")
NO = TriBool("No")
UNKNOWN = TriBool("Unknown")


class Meter:
    """Shared step counter and deadline for one engine."""

    __slots__ = ("steps", "max_steps", "deadline")

    def __init__(self, budget: Budget):
        self.steps = 0
        self.max_steps = budget.max_steps
        self.deadline = time.monotonic() + budget.seconds

    def tick(self, n: int = 1) -> bool:
        self.steps += n
        if self.steps > self.max_steps:
            return False
        if self.steps % 256 == 0 and time.monotonic() > self.deadline:
            return False
        return True

    def ok(self) -> bool:
        return self.steps <= self.max_steps and time.monotonic() <= self.deadline


@dataclass(frozen=True)
class StepTrace:
    """Evidence for one rewrite step, sufficient for structural replay."""

    source: Term
    target: Term
    position: tuple
    rule: Rule
    subst: Substitution
    conditions: tuple  # instantiated condition atoms


def _canon_atom(a: Atom):
    """Canonical key for a goal plus the variable mapping used to build it."""
    names: dict = {}

    def canon(t: Term) -> str:
        if isinstance(t, Var):
            if t.name not in names:
                names[t.name] = f"_{len(names)}"
            return names[t.name]
        if not t.args:
            return t.sym.name
        return t.sym.name + "(" + ",".join(canon(x) for x in t.args) + ")"

    key = a.pred + "(" + ",".join(canon(t) for t in a.args) + ")"
    return key, names


def _unify_tuples(xs: tuple, ys: tuple) -> Optional[Substitution]:
    sub = Substitution({})
    for a, b in zip(xs, ys):
        m = unify(sub.apply(a), sub.apply(b))
        if m is None:
            return None
        sub = sub.compose(m)
    return sub


class Engine:
    """Bounded rewriting and condition solving for one system.

    Instances cache successor sets and goal answers, so reuse one engine
    per system while a budget is in force.  Results are deterministic for
    a fixed budget unless the wall-clock deadline fires first.
    """

    def __init__(self, system: GTRS, budget: Optional[Budget] = None):
        self.system = system
        self.budget = budget or Budget()
        self.meter = Meter(self.budget)
        self._defined = set(system.defined_symbols())
        self._goal_stack: list = []
        self._one_step_memo: dict = {}
        self._succ_memo: dict = {}
        self._rule_feasible_memo: dict = {}
        self._answers: dict = {}
        self._seed_terms: Optional[list] = None
        self._saturating = False
        self._optimistic = False
        self._changed = False
        self._cut_seen = False
        self._witness_mode = False  # skip exhaustive enumeration, find any solution

    # ------------------------------------------------------------------
    # fixpoint saturation

    def _clear_pass_memos(self):
        self._one_step_memo.clear()
        self._succ_memo.clear()

    def _run_saturated(self, thunk, degrade):
        """Iterate ``thunk`` until tabled goal answers stabilize.

        The final round treats cycle cuts as exhaustive, which is sound
        exactly when the preceding rounds reached a fixpoint.
        """
        if self._saturating:
            return thunk()
        self._saturating = True
        try:
            self._cut_seen = False
            self._changed = False
            result = thunk()
            if not self._cut_seen:
                return result
            converged = not self._changed
            for _ in range(4):
                if converged:
                    break
                self._changed = False
                self._clear_pass_memos()
                result = thunk()
                converged = not self._changed
            if not converged:
                return degrade(result)
            self._optimistic = True
            self._changed = False
            self._clear_pass_memos()
            result = thunk()
            self._optimistic = False
            if self._changed:
                return degrade(result)
            return result
        finally:
            self._saturating = False
            self._optimistic = False

    # ------------------------------------------------------------------
    # renaming helpers

    def _rename_rule(self, rule: Rule, avoid: set) -> Rule:
        ren = renaming_for(rule_variables(rule), avoid | {"z"})
        return rename_rule(rule, ren)

    # ------------------------------------------------------------------
    # one-step rewriting

    def one_step(self, t: Term, depth: Optional[int] = None):
        """All one-step reducts of ``t`` plus a completeness flag.

        Variables in ``t`` are rigid: they are never instantiated, exactly
        as if they were fresh constants.
        """
        return self._run_saturated(
            lambda: self._one_step(t, depth), lambda r: (r[0], False)
        )

    def _one_step(self, t: Term, depth: Optional[int] = None):
        if depth is None:
            depth = self.budget.max_depth
        key = (t, depth)
        if key in self._one_step_memo:
            return self._one_step_memo[key]
        results: list = []
        complete = True
        if not self.meter.tick():
            return (), False
        t_vars = variables(t)
        for p in active_nonvar_positions(t, self.system.mu):
            sub = subterm_at(t, p)
            for rule in self.system.rules:
                rr = self._rename_rule(rule, t_vars)
                m = match(rr.lhs, sub)
                if m is None:
                    continue
                if not rr.conds:
                    results.append(replace_at(t, p, m.apply(rr.rhs)))
                    continue
                if depth <= 0:
                    complete = False
                    continue
                sols, exhaustive = self._solve_seq(rr.conds, m, depth - 1)
                if not exhaustive:
                    complete = False
                rhs_extra = variables(rr.rhs) - variables(rr.lhs)
                if not rhs_extra:
                    if sols:
                        results.append(replace_at(t, p, sols[0].apply(rr.rhs)))
                    continue
                for s in sols:
                    inst = s.apply(rr.rhs)
                    if variables(inst) - t_vars:
                        # unbound extra variables: a cap on what we can return
                        complete = False
                        continue
                    results.append(replace_at(t, p, inst))
        uniq = sorted(set(results), key=term_key)
        sized = []
        for u in uniq:
            if term_size(u) > self.budget.max_term_size:
                complete = False
                continue
            sized.append(u)
        out = (tuple(sized), complete)
        self._one_step_memo[key] = out
        return out

    def successors(self, t: Term, depth: Optional[int] = None):
        """Reflexive-transitive closure of one_step, breadth first."""
        return self._run_saturated(
            lambda: self._successors(t, depth), lambda r: (r[0], False)
        )

    def _successors(self, t: Term, depth: Optional[int] = None):
        if depth is None:
            depth = self.budget.max_depth
        key = (t, depth)
        if key in self._succ_memo:
            return self._succ_memo[key]
        seen = {t}
        order = [t]
        frontier = [t]
        complete = True
        if term_size(t) > self.budget.max_term_size:
            return (t,), False
        while frontier:
            if not self.meter.ok():
                complete = False
                break
            nxt = []
            for u in frontier:
                res, c = self._one_step(u, depth)
                if not c:
                    complete = False
                for w in res:
                    if w not in seen:
                        if len(seen) >= self.budget.max_successors:
                            complete = False
                            continue
                        seen.add(w)
                        order.append(w)
                        nxt.append(w)
            frontier = nxt
        out = (tuple(order), complete)
        self._succ_memo[key] = out
        return out

    def reachable(self, s: Term, t: Term) -> TriBool:
        succ, complete = self.successors(s)
        if t in succ:
            return YES
        return NO if complete else UNKNOWN

    def is_irreducible(self, t: Term) -> TriBool:
        res, complete = self.one_step(t)
        if res:
            return NO
        return YES if complete else UNKNOWN

    def rule_feasible(self, rule: Rule) -> TriBool:
        """Whether the rule's own conditions admit some satisfying instance."""
        if rule.label in self._rule_feasible_memo:
            return self._rule_feasible_memo[rule.label]
        if not rule.conds:
            out = YES
        else:
            if self.find_witness(rule.conds):
                out = YES
            else:
                sols, exhaustive = self.solve(rule.conds)
                if sols:
                    out = YES
                elif exhaustive:
                    out = NO
                else:
                    out = UNKNOWN
        self._rule_feasible_memo[rule.label] = out
        return out

    # ------------------------------------------------------------------
    # condition solving

    def solve(self, atoms: Iterable[Atom], depth: Optional[int] = None):
        """Solutions of a condition sequence: (substitutions, exhaustive)."""
        atoms = tuple(atoms)
        d = self.budget.max_depth if depth is None else depth
        return self._run_saturated(
            lambda: self._solve_seq(atoms, Substitution({}), d),
            lambda r: (r[0], False),
        )

    def find_witness(self, atoms: Iterable[Atom]):
        """Cheap satisfiability probe: skips every exhaustive enumeration,
        so a positive answer is sound but absence proves nothing."""
        atoms = tuple(atoms)
        self._witness_mode = True
        try:
            sols, _ = self._run_saturated(
                lambda: self._solve_seq(atoms, Substitution({}), self.budget.max_depth),
                lambda r: (r[0], False),
            )
        finally:
            self._witness_mode = False
        return sols[0] if sols else None

    def _solve_seq(self, atoms: tuple, theta: Substitution, depth: int):
        if not self.meter.tick():
            return [], False
        if not atoms:
            return [theta], True
        first = apply_atom(theta, atoms[0])
        rest = atoms[1:]
        cands, exhaustive = self._expand_atom(first, depth)
        sols: list = []
        for ext in cands:
            sub_sols, sub_exh = self._solve_seq(rest, theta.compose(ext), depth)
            exhaustive = exhaustive and sub_exh
            for s in sub_sols:
                if s not in sols:
                    sols.append(s)
            if len(sols) > self.budget.max_solutions:
                return sols[: self.budget.max_solutions], False
        return sols, exhaustive

    def _expand_atom(self, a: Atom, depth: int):
        if depth <= 0:
            return [], False
        key, mapping = _canon_atom(a)
        if key in self._goal_stack:
            return self._cut(a, key, mapping)
        self._goal_stack.append(key)
        try:
            out, exh = self._dispatch_atom(a, depth)
        finally:
            self._goal_stack.pop()
        self._record_answer(a, key, mapping, out, exh)
        return out, exh

    def _dispatch_atom(self, a: Atom, depth: int):
        if a.pred == REACH and len(a.args) == 2:
            return self._expand_reach(a.args[0], a.args[1], depth)
        if a.pred == STEP and len(a.args) == 2:
            return self._expand_step(a.args[0], a.args[1], depth)
        return self._expand_clause(a, depth)

    def _cut(self, a: Atom, key: str, mapping: dict):
        """A goal already under expansion: reuse its tabled answers.

        A minimal proof never contains the proved goal itself, so pruning
        is exhaustive for closed goals; for open goals exhaustiveness is
        only claimed in the optimistic round after the table converged.
        """
        self._cut_seen = True
        entry = self._answers.get(key)
        closed_goal = all(is_closed(t) for t in a.args)
        if entry is None:
            return [], closed_goal
        sols = self._translate_back(entry[0], mapping, a)
        if self._optimistic:
            return sols, True
        return sols, entry[1] if closed_goal else False

    def _record_answer(self, a: Atom, key: str, mapping: dict, sols, exh: bool):
        goal_vars = atom_variables([a])
        stored = []
        dropped = False
        inv = {c: o for o, c in mapping.items()}
        ren = Substitution({o: Var(c) for o, c in mapping.items()})
        for s in sols:
            r = s.restrict(goal_vars)
            ok = True
            canon_bind = {}
            for name, t in r.bindings.items():
                t2 = ren.apply(t)
                if variables(t2) - set(inv):
                    ok = False  # mentions foreign fresh variables
                    break
                canon_bind[mapping[name]] = t2
            if ok:
                stored.append(Substitution(canon_bind))
            else:
                dropped = True
        old = self._answers.get(key)
        merged = list(old[0]) if old else []
        for s in stored:
            if s not in merged:
                merged.append(s)
        entry_exh = exh and not dropped
        if len(merged) > self.budget.max_solutions:
            merged = merged[: self.budget.max_solutions]
            entry_exh = False
        new = (tuple(merged), entry_exh)
        # Flags never feed back into solution sets, so convergence is judged
        # on answers alone; the optimistic round then recomputes the flags.
        if old is None or set(old[0]) != set(new[0]):
            self._changed = True
        self._answers[key] = new

    def _translate_back(self, stored, mapping: dict, a: Atom):
        inv = {c: o for o, c in mapping.items()}
        back = Substitution({c: Var(o) for c, o in inv.items()})
        out = []
        for s in stored:
            bind = {}
            usable = True
            for cname, t in s.bindings.items():
                if cname not in inv:
                    usable = False
                    break
                bind[inv[cname]] = back.apply(t)
            if usable:
                out.append(Substitution(bind))
        return out

    def _expand_reach(self, u: Term, v: Term, depth: int):
        if is_closed(u):
            succ, complete = self._successors(u, depth)
            out = []
            for w in succ:
                m = match(v, w)
                if m is not None:
                    out.append(m)
            return out, complete
        if isinstance(u, Var):
            out = []
            exhaustive = True
            m = unify(u, v)
            if m is not None:
                out.append(m)
            if self._witness_mode:
                return out, False
            if is_closed(v):
                preds, complete = self.backward_closure(v, depth)
                exhaustive = complete
                for w in preds:
                    if w != v:
                        out.append(Substitution({u.name: w}))
            else:
                exhaustive = False
            return out, exhaustive
        # open application
        if u.sym not in self._defined:
            if isinstance(v, App):
                if v.sym != u.sym:
                    # the root symbol of u can never change
                    return [], True
                eqs = []
                sub_atoms = []
                allowed = self.system.mu.indices(u.sym)
                for i in range(1, u.sym.arity + 1):
                    if i in allowed:
                        sub_atoms.append(Atom(REACH, (u.args[i - 1], v.args[i - 1])))
                    else:
                        eqs.append((u.args[i - 1], v.args[i - 1]))
                base = _unify_tuples(
                    tuple(x for x, _ in eqs), tuple(y for _, y in eqs)
                )
                if base is None:
                    return [], True
                return self._solve_seq(tuple(sub_atoms), base, depth - 1)
            m = unify(u, v)
            return ([m] if m is not None else []), False
        # defined root with open arguments: narrow, never exhaustively
        out = []
        m = unify(u, v)
        if m is not None:
            out.append(m)
        for cs, u2 in self._narrow_results(u, depth):
            rec, _ = self._expand_reach(u2, cs.apply(v), depth - 1)
            for r in rec:
                comp = cs.compose(r)
                if comp not in out:
                    out.append(comp)
                if len(out) > self.budget.max_solutions:
                    return out[: self.budget.max_solutions], False
        return out, False

    def _narrow_results(self, u: Term, depth: int):
        """One narrowing step: (accumulated substitution, rewritten term)."""
        if depth <= 0 or not self.meter.tick():
            return
        u_vars = variables(u)
        count = 0
        for p in active_nonvar_positions(u, self.system.mu):
            sub = subterm_at(u, p)
            for rule in self.system.rules:
                rr = self._rename_rule(rule, u_vars)
                d = unify(sub, rr.lhs)
                if d is None:
                    continue
                sols, _ = self._solve_seq(rr.conds, d, depth - 1)
                for cs in sols:
                    u2 = cs.apply(replace_at(u, p, rr.rhs))
                    if term_size(u2) > self.budget.max_term_size:
                        continue
                    yield cs, u2
                    count += 1
                    if count >= self.budget.max_solutions:
                        return

    def _expand_step(self, u: Term, v: Term, depth: int):
        if is_closed(u):
            res, complete = self._one_step(u, depth)
            out = []
            for w in res:
                m = match(v, w)
                if m is not None:
                    out.append(m)
            return out, complete
        if isinstance(u, Var):
            out = []
            if is_closed(v):
                preds, complete = self.backward_preds(v, depth)
                for w in preds:
                    out.append(Substitution({u.name: w}))
                return out, complete
            # both sides open: seed candidate redexes
            if all(self.rule_feasible(r) == NO for r in self.system.rules):
                return [], True
            for seed in self._seeds():
                res, _ = self._one_step(seed, depth - 1)
                for w in res:
                    ext = Substitution({u.name: seed})
                    m = unify(ext.apply(v), w)
                    if m is not None:
                        comp = ext.compose(m)
                        if comp not in out:
                            out.append(comp)
                        if len(out) > self.budget.max_solutions:
                            return out, False
            return out, False
        out = []
        for cs, u2 in self._narrow_results(u, depth):
            m = unify(u2, cs.apply(v))
            if m is not None:
                comp = cs.compose(m)
                if comp not in out:
                    out.append(comp)
        return out, False

    def _seeds(self) -> list:
        if self._seed_terms is None:
            seeds = []
            for rule in self.system.rules:
                g = ground_down(rule.lhs)
                if g not in seeds:
                    seeds.append(g)
            enum = enumerate_ground_terms(list(self.system.funcs), max_size=5, limit=40)
            for t in enum:
                if t not in seeds:
                    seeds.append(t)
            self._seed_terms = seeds
        return self._seed_terms

    def _expand_clause(self, a: Atom, depth: int):
        clauses = self.system.clauses_for(a.pred)
        out = []
        exhaustive = True
        a_vars = atom_variables([a])
        for clause in clauses:
            c_vars = atom_variables([clause.head]) | atom_variables(clause.body)
            ren = renaming_for(c_vars, a_vars | {"z"})
            head = apply_atom(ren, clause.head)
            body = tuple(apply_atom(ren, b) for b in clause.body)
            base = _unify_tuples(head.args, a.args)
            if base is None:
                continue
            sols, exh = self._solve_seq(body, base, depth - 1)
            exhaustive = exhaustive and exh
            for s in sols:
                if s not in out:
                    out.append(s)
            if len(out) > self.budget.max_solutions:
                return out[: self.budget.max_solutions], False
        return out, exhaustive

    # ------------------------------------------------------------------
    # backward search

    def backward_preds(self, t: Term, depth: int):
        """Closed one-step predecessors of a closed term."""
        out = []
        complete = True
        if not self.meter.tick():
            return [], False
        for q in active_positions(t, self.system.mu):
            w = subterm_at(t, q)
            for rule in self.system.rules:
                rr = self._rename_rule(rule, set())
                m = match(rr.rhs, w)
                if m is None:
                    continue
                if depth <= 0 and rr.conds:
                    complete = False
                    continue
                sols, exh = self._solve_seq(rr.conds, m, depth - 1)
                if not exh:
                    complete = False
                for cs in sols:
                    inst = cs.apply(rr.lhs)
                    if not is_closed(inst):
                        complete = False
                        continue
                    u = replace_at(t, q, inst)
                    if term_size(u) > self.budget.max_term_size:
                        complete = False
                        continue
                    if u not in out:
                        out.append(u)
        return sorted(out, key=term_key), complete

    def backward_closure(self, t: Term, depth: int):
        """All closed terms rewriting to ``t`` in zero or more steps.

        Only useful when the closure is small and finite, so it is capped
        tightly; hitting any cap just renders the answer non-exhaustive.
        """
        cap = min(48, self.budget.max_successors)
        growth = term_size(t) + 16
        seen = {t}
        order = [t]
        frontier = [t]
        complete = True
        while frontier:
            if not self.meter.ok():
                complete = False
                break
            nxt = []
            for u in frontier:
                preds, c = self.backward_preds(u, depth)
                if not c:
                    complete = False
                for w in preds:
                    if term_size(w) > growth:
                        complete = False
                        continue
                    if w not in seen:
                        if len(seen) >= cap:
                            complete = False
                            continue
                        seen.add(w)
                        order.append(w)
                        nxt.append(w)
            frontier = nxt
        return order, complete

    # ------------------------------------------------------------------
    # traced rewriting (for audit replay)

    def one_step_traced(self, t: Term, depth: Optional[int] = None):
        """Reducts of ``t`` with full step evidence for structural replay."""
        return self._run_saturated(
            lambda: self._one_step_traced(t, depth), lambda r: r
        )

    def _one_step_traced(self, t: Term, depth: Optional[int] = None):
        if depth is None:
            depth = self.budget.max_depth
        traces: list = []
        t_vars = variables(t)
        for p in active_nonvar_positions(t, self.system.mu):
            sub = subterm_at(t, p)
            for rule in self.system.rules:
                rr = self._rename_rule(rule, t_vars)
                m = match(rr.lhs, sub)
                if m is None:
                    continue
                if not rr.conds:
                    sols = [m]
                else:
                    sols, _ = self._solve_seq(rr.conds, m, depth - 1)
                for s in sols:
                    inst = s.apply(rr.rhs)
                    if variables(inst) - t_vars:
                        continue
                    target = replace_at(t, p, inst)
                    if term_size(target) > self.budget.max_term_size:
                        continue
                    traces.append(
                        StepTrace(
                            source=t,
                            target=target,
                            position=p,
                            rule=rr,
                            subst=s,
                            conditions=tuple(apply_atom(s, c) for c in rr.conds),
                        )
                    )
        return traces

    def reach_chain(self, s: Term, t: Term) -> Optional[list]:
        """A concrete rewriting chain from s to t, if one is within budget."""
        if s == t:
            return [s]
        parents = {s: None}
        frontier = [s]
        while frontier:
            if not self.meter.ok():
                return None
            nxt = []
            for u in frontier:
                res, _ = self.one_step(u)
                for w in res:
                    if w not in parents:
                        parents[w] = u
                        if w == t:
                            chain = [w]
                            while parents[chain[-1]] is not None:
                                chain.append(parents[chain[-1]])
                            return list(reversed(chain))
                        if len(parents) < self.budget.max_successors:
                            nxt.append(w)
            frontier = nxt
        return None


# ----------------------------------------------------------------------
# module-level wrappers matching the documented operation signatures


def one_step(g: GTRS, t: Term, b: Optional[Budget] = None):
    return Engine(g, b).one_step(t)


def successors(g: GTRS, t: Term, b: Optional[Budget] = None):
    return Engine(g, b).successors(t)


def reachable(g: GTRS, s: Term, t: Term, b: Optional[Budget] = None) -> TriBool:
    return Engine(g, b).reachable(s, t)


def is_irreducible(g: GTRS, t: Term, b: Optional[Budget] = None) -> TriBool:
    return Engine(g, b).is_irreducible(t)
