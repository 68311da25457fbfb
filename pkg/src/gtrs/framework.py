"""Proof trees, strategies, and verdict extraction.

A strategy expression drives processor applications; alternatives commit
left-biased, falling through only when a branch fails to produce a
decisive subtree.  The verdict reader accepts a positive answer only when
every step is sound for the problem it was applied to, and a negative one
only along a path of complete steps.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional

from .processors import (
    CR,
    JO,
    SCR,
    SJO,
    WCR,
    Application,
    Context,
    Outcome,
    PROCESSORS,
    Problem,
)
from .systems import classify

YES_LEAF = "yes"
NO_LEAF = "no"
OPEN_LEAF = "open"


@dataclass(frozen=True)
class ProofTree:
    problem: Optional[Problem]
    step: Optional[Application] = None
    children: tuple = ()
    leaf: Optional[str] = None  # yes | no | open on childless problem nodes

    def is_leaf(self) -> bool:
        return not self.children

    def all_leaves(self) -> list:
        if self.is_leaf():
            return [self]
        out = []
        for c in self.children:
            out.extend(c.all_leaves())
        return out

    def steps(self) -> list:
        out = []
        if self.step is not None:
            out.append(self.step)
        for c in self.children:
            out.extend(c.steps())
        return out

    def processor_names(self) -> list:
        return [s.processor for s in self.steps()]


def yes_leaf() -> ProofTree:
    return ProofTree(None, leaf=YES_LEAF)


def no_leaf() -> ProofTree:
    return ProofTree(None, leaf=NO_LEAF)


def open_node(problem: Problem) -> ProofTree:
    return ProofTree(problem, leaf=OPEN_LEAF)


@dataclass(frozen=True)
class Verdict:
    answer: str  # YES | NO | MAYBE
    tree: ProofTree


def _all_yes_and_sound(t: ProofTree) -> bool:
    if t.is_leaf():
        return t.leaf == YES_LEAF
    if t.step is None or not t.step.sound:
        return False
    return all(_all_yes_and_sound(c) for c in t.children)


def _complete_no_path(t: ProofTree) -> bool:
    if t.is_leaf():
        return t.leaf == NO_LEAF
    if t.step is None or not t.step.complete:
        return False
    return any(_complete_no_path(c) for c in t.children)


def verdict(tree: ProofTree) -> Verdict:
    if _all_yes_and_sound(tree):
        return Verdict("YES", tree)
    if _complete_no_path(tree):
        return Verdict("NO", tree)
    return Verdict("MAYBE", tree)


# ----------------------------------------------------------------------
# strategy expressions


@dataclass(frozen=True)
class Apply:
    processor: str


@dataclass(frozen=True)
class Seq:
    first: "Strategy"
    second: "Strategy"


@dataclass(frozen=True)
class Alt:
    left: "Strategy"
    right: "Strategy"


@dataclass(frozen=True)
class WithBudget:
    inner: "Strategy"
    budgets: tuple  # (name, Budget) pairs

    def __post_init__(self):
        for _, b in self.budgets:
            if b.seconds <= 0:
                raise ValueError("strategy budgets must be positive")


@dataclass(frozen=True)
class Recurse:
    pass


Strategy = object


def combine(op: str, s1, s2):
    """Build a sequential or alternative composition."""
    if op == "seq":
        return Seq(s1, s2)
    if op == "alt":
        return Alt(s1, s2)
    raise ValueError(f"unknown combinator {op!r}")


def alt(*strategies):
    out = strategies[-1]
    for s in reversed(strategies[:-1]):
        out = Alt(s, out)
    return out


def seq(*strategies):
    out = strategies[-1]
    for s in reversed(strategies[:-1]):
        out = Seq(s, out)
    return out


# ----------------------------------------------------------------------
# built-in strategies


def builtin_strategy(system_class, kind: str):
    """The default processor chain for a system class and problem kind."""
    base = system_class.base
    if kind in (JO, SJO):
        return Apply("joinability")
    unconditional = base in ("TRS", "CS-TRS")
    if unconditional:
        if kind == CR:
            return alt(
                Apply("extra-variables"),
                Seq(Apply("simplify"), Recurse()),
                Seq(Apply("modular-split"), Recurse()),
                Apply("orthogonal"),
                Seq(Apply("as-strong-confluence"), Recurse()),
                Seq(Apply("knuth-bendix"), Recurse()),
                Seq(Apply("convective-joinability"), Recurse()),
                Seq(Apply("canonical-confluence"), Recurse()),
                Seq(Apply("as-local-confluence"), Recurse()),
            )
        if kind == WCR:
            return alt(
                Apply("extra-variables"),
                Seq(Apply("simplify"), Recurse()),
                Apply("orthogonal"),
                Seq(Apply("as-confluence"), Recurse()),
                Seq(Apply("modular-split"), Recurse()),
                Seq(Apply("critical-pairs"), Recurse()),
            )
        # SCR
        return alt(
            Apply("extra-variables"),
            Seq(Apply("simplify"), Recurse()),
            Seq(Apply("as-confluence"), Recurse()),
            Seq(Apply("critical-pairs"), Recurse()),
        )
    # conditional and generalized systems
    if kind == CR:
        return alt(
            Apply("extra-variables"),
            Seq(Apply("inline"), Recurse()),
            Seq(Apply("simplify"), Recurse()),
            Seq(Apply("unravel-shared"), Recurse()),
            Seq(Apply("unravel"), Recurse()),
            Apply("orthogonal"),
            Seq(Apply("as-local-confluence"), Recurse()),
            Seq(Apply("knuth-bendix"), Recurse()),
        )
    if kind == WCR:
        return alt(
            Apply("extra-variables"),
            Seq(Apply("inline"), Recurse()),
            Seq(Apply("simplify"), Recurse()),
            Apply("orthogonal"),
            Seq(Apply("as-confluence"), Recurse()),
            Seq(Apply("critical-pairs"), Recurse()),
        )
    return alt(
        Apply("extra-variables"),
        Seq(Apply("simplify"), Recurse()),
        Seq(Apply("as-confluence"), Recurse()),
        Seq(Apply("critical-pairs"), Recurse()),
    )


# ----------------------------------------------------------------------
# the runner


class _Run:
    def __init__(self, ctx: Context, deadline: float):
        self.ctx = ctx
        self.deadline = deadline
        self.stack: list = []  # fingerprints of problems being expanded

    def out_of_time(self) -> bool:
        return time.monotonic() > self.deadline

    def eval(self, problem: Problem, strategy) -> Optional[ProofTree]:
        if self.out_of_time():
            return None
        if isinstance(strategy, Apply):
            return self.apply(problem, strategy.processor)
        if isinstance(strategy, Seq):
            tree = self.eval(problem, strategy.first)
            if tree is None:
                return None
            return self.resolve_opens(tree, strategy.second)
        if isinstance(strategy, Alt):
            left = self.eval(problem, strategy.left)
            if left is not None and verdict(left).answer != "MAYBE":
                return left
            right = self.eval(problem, strategy.right)
            if right is not None and verdict(right).answer != "MAYBE":
                return right
            return left if left is not None else right
        if isinstance(strategy, WithBudget):
            saved = dict(self.ctx.budgets)
            self.ctx.budgets.update(dict(strategy.budgets))
            try:
                return self.eval(problem, strategy.inner)
            finally:
                self.ctx.budgets = saved
        if isinstance(strategy, Recurse):
            return self.recurse(problem)
        raise TypeError(f"not a strategy: {strategy!r}")

    def apply(self, problem: Problem, name: str) -> Optional[ProofTree]:
        proc = PROCESSORS[name]
        app = proc(problem, self.ctx)
        if app is None:
            return None
        if app.outcome.answer_no:
            return ProofTree(problem, app, (no_leaf(),))
        subs = app.outcome.subproblems
        if not subs:
            return ProofTree(problem, app, (yes_leaf(),))
        children = tuple(open_node(p) for p in subs)
        return ProofTree(problem, app, children)

    def resolve_opens(self, tree: ProofTree, strategy) -> ProofTree:
        """Resolve open subproblems left to right; once one branch refutes
        the problem along a complete path, the remaining stay open."""
        if tree.leaf == OPEN_LEAF and tree.problem is not None:
            solved = self.eval(tree.problem, strategy)
            return solved if solved is not None else tree
        if tree.is_leaf():
            return tree
        new_children = []
        refuted = False
        for child in tree.children:
            if refuted or self.out_of_time():
                new_children.append(child)
                continue
            resolved = self.resolve_opens(child, strategy)
            new_children.append(resolved)
            if tree.step is not None and tree.step.complete and _complete_no_path(resolved):
                refuted = True
        return replace(tree, children=tuple(new_children))

    def recurse(self, problem: Problem) -> Optional[ProofTree]:
        key = problem.fingerprint()
        if key in self.stack:
            return None
        self.stack.append(key)
        try:
            strat = builtin_strategy(classify(problem.system), problem.kind)
            return self.eval(problem, strat)
        finally:
            self.stack.pop()


def run(
    problem: Problem,
    strategy=None,
    deadline_seconds: float = 120.0,
    ctx: Optional[Context] = None,
) -> ProofTree:
    """Drive a strategy against a problem, producing a proof tree.

    A missing strategy selects the built-in chain for the system's class.
    When the deadline fires, unresolved problems stay as open leaves and
    the verdict degrades to MAYBE.
    """
    ctx = ctx or Context()
    runner = _Run(ctx, time.monotonic() + deadline_seconds)
    runner.stack.append(problem.fingerprint())
    if strategy is None:
        strategy = builtin_strategy(classify(problem.system), problem.kind)
    tree = runner.eval(problem, strategy)
    if tree is None:
        return open_node(problem)
    return tree


def prove(problem: Problem, strategy=None, deadline_seconds: float = 120.0) -> Verdict:
    return verdict(run(problem, strategy, deadline_seconds))
