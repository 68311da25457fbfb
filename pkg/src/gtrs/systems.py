"""Generalized term rewriting systems and their classification.

A system bundles a signature, predicate symbols, a replacement map, Horn
clauses defining extra predicates, and conditional rewrite rules.  Plain
TRSs, context-sensitive TRSs, and join/oriented/semi-equational conditional
systems are all recognized as special cases.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .terms import (
    PREDICATE,
    App,
    ReplacementMap,
    Substitution,
    Symbol,
    Term,
    Var,
    render,
    term_key,
    variables,
    variables_of_all,
)

STEP = "->"
REACH = "->*"
EQUIV = "=="

JOIN = "join"
ORIENTED = "oriented"
SEMI_EQUATIONAL = "semi-equational"


def pred_symbol(name: str) -> Symbol:
    return Symbol(name, 2, PREDICATE)


@dataclass(frozen=True, slots=True)
class Atom:
    pred: str
    args: tuple

    def __repr__(self):
        return f"Atom({render_atom(self)!r})"

    def terms(self) -> tuple:
        return self.args


def atom(pred: str, *args: Term) -> Atom:
    return Atom(pred, tuple(args))


def render_atom(a: Atom) -> str:
    if a.pred in (STEP, REACH, EQUIV) and len(a.args) == 2:
        return f"{render(a.args[0])} {a.pred} {render(a.args[1])}"
    return f"{a.pred}({','.join(render(t) for t in a.args)})"


def apply_atom(sub: Substitution, a: Atom) -> Atom:
    return Atom(a.pred, tuple(sub.apply(t) for t in a.args))


def apply_atoms(sub: Substitution, atoms: Iterable[Atom]) -> tuple:
    return tuple(apply_atom(sub, a) for a in atoms)


def atom_variables(atoms: Iterable[Atom]) -> set:
    out: set = set()
    for a in atoms:
        out |= variables_of_all(a.args)
    return out


@dataclass(frozen=True, slots=True)
class Rule:
    label: str
    lhs: Term
    rhs: Term
    conds: tuple = ()

    def __post_init__(self):
        if isinstance(self.lhs, Var):
            raise ValueError("rule left-hand side must not be a variable")

    def is_conditional(self) -> bool:
        return bool(self.conds)

    def __repr__(self):
        return f"Rule({render_rule(self)!r})"


def render_rule(r: Rule) -> str:
    base = f"{render(r.lhs)} -> {render(r.rhs)}"
    if r.conds:
        base += " | " + ", ".join(render_atom(a) for a in r.conds)
    return base


@dataclass(frozen=True, slots=True)
class HornClause:
    head: Atom
    body: tuple = ()

    def __post_init__(self):
        if self.head.pred in (STEP, REACH):
            raise ValueError("clause head may not define -> or ->*")


def rule_type(r: Rule) -> int:
    """Variable-distribution class of a rule, smallest applicable of 1..4."""
    lhs_vars = variables(r.lhs)
    rhs_vars = variables(r.rhs)
    cond_vars = atom_variables(r.conds)
    if rhs_vars | cond_vars <= lhs_vars:
        return 1
    if rhs_vars <= lhs_vars:
        return 2
    if rhs_vars <= lhs_vars | cond_vars:
        return 3
    return 4


@dataclass(frozen=True)
class GTRS:
    funcs: tuple
    preds: tuple
    mu: ReplacementMap
    clauses: tuple
    rules: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "funcs", tuple(self.funcs))
        object.__setattr__(self, "preds", tuple(self.preds))
        object.__setattr__(self, "clauses", tuple(self.clauses))
        object.__setattr__(self, "rules", tuple(self.rules))

    def func(self, name: str) -> Optional[Symbol]:
        for s in self.funcs:
            if s.name == name:
                return s
        return None

    def defined_symbols(self) -> tuple:
        """Roots of rule left-hand sides, in declaration order."""
        seen = []
        for r in self.rules:
            sym = r.lhs.sym
            if sym not in seen:
                seen.append(sym)
        return tuple(seen)

    def constructors(self) -> tuple:
        defined = set(self.defined_symbols())
        return tuple(s for s in self.funcs if s not in defined)

    def is_unconditional(self) -> bool:
        return all(not r.conds for r in self.rules)

    def clauses_for(self, pred: str) -> tuple:
        return tuple(c for c in self.clauses if c.head.pred == pred)

    def fingerprint(self) -> str:
        mu_part = ";".join(
            f"{n}:{','.join(map(str, sorted(ix)))}"
            for n, ix in sorted(self.mu.entries.items())
            if ix
        )
        rules_part = ";".join(sorted(render_rule(r) for r in self.rules))
        clause_part = ";".join(
            sorted(
                render_atom(c.head) + "<=" + ",".join(render_atom(b) for b in c.body)
                for c in self.clauses
            )
        )
        return f"mu[{mu_part}]rules[{rules_part}]h[{clause_part}]"

    def with_rules(self, rules: Iterable[Rule], name: str = "") -> "GTRS":
        return replace(self, rules=tuple(rules), name=name or self.name)

    def with_mu(self, mu: ReplacementMap, name: str = "") -> "GTRS":
        return replace(self, mu=mu, name=name or self.name)


def make_system(
    funcs: Iterable[Symbol],
    rules: Iterable[Rule],
    mu: Optional[ReplacementMap] = None,
    semantics: Optional[str] = None,
    clauses: Iterable[HornClause] = (),
    extra_preds: Iterable[Symbol] = (),
    name: str = "",
) -> GTRS:
    """Assemble a system; ``semantics`` materializes the matching ==-clauses."""
    funcs = tuple(funcs)
    rules = tuple(rules)
    mu = mu if mu is not None else ReplacementMap.top(funcs)
    clauses = tuple(clauses)
    preds = [pred_symbol(STEP), pred_symbol(REACH)]
    if semantics is not None:
        clauses = clauses + equivalence_clauses(semantics)
    if any(c.head.pred == EQUIV for c in clauses) or any(
        a.pred == EQUIV for r in rules for a in r.conds
    ):
        preds.append(pred_symbol(EQUIV))
    for c in clauses:
        if c.head.pred not in [p.name for p in preds]:
            preds.append(pred_symbol(c.head.pred))
    return GTRS(funcs, tuple(preds), mu, clauses, rules, name)


def equivalence_clauses(semantics: str) -> tuple:
    """Clauses giving == its join, oriented, or semi-equational reading."""
    x, y, z = Var("x"), Var("y"), Var("z")
    if semantics == JOIN:
        return (
            HornClause(atom(EQUIV, x, y), (atom(REACH, x, z), atom(REACH, y, z))),
        )
    if semantics == ORIENTED:
        return (HornClause(atom(EQUIV, x, y), (atom(REACH, x, y),)),)
    if semantics == SEMI_EQUATIONAL:
        return (
            HornClause(atom(EQUIV, x, x), ()),
            HornClause(atom(EQUIV, x, z), (atom(STEP, x, y), atom(EQUIV, y, z))),
            HornClause(atom(EQUIV, x, z), (atom(STEP, y, x), atom(EQUIV, y, z))),
        )
    raise ValueError(f"unknown condition semantics: {semantics}")


def _clause_key(c: HornClause) -> str:
    """Canonical rendering of a clause up to variable renaming."""
    names: dict = {}

    def canon(t: Term) -> Term:
        if isinstance(t, Var):
            if t.name not in names:
                names[t.name] = Var(f"_{len(names)}")
            return names[t.name]
        return App(t.sym, tuple(canon(a) for a in t.args))

    parts = [c.head.pred + "(" + ",".join(render(canon(t)) for t in c.head.args) + ")"]
    for b in c.body:
        parts.append(b.pred + "(" + ",".join(render(canon(t)) for t in b.args) + ")")
    return "<=".join(parts)


def recognized_semantics(clauses: Iterable[HornClause]) -> Optional[str]:
    """Which ==-semantics the clause set encodes, matched structurally."""
    keys = sorted(_clause_key(c) for c in clauses)
    for sem in (JOIN, ORIENTED, SEMI_EQUATIONAL):
        if keys == sorted(_clause_key(c) for c in equivalence_clauses(sem)):
            return sem
    return None


@dataclass(frozen=True, slots=True)
class SystemClass:
    base: str  # TRS | CS-TRS | CTRS | CS-CTRS | GTRS
    semantics: Optional[str] = None

    def __str__(self):
        if self.semantics:
            tag = {JOIN: "J", ORIENTED: "O", SEMI_EQUATIONAL: "SE"}[self.semantics]
            return f"{tag}-{self.base}"
        return self.base

    @property
    def is_trs(self) -> bool:
        return self.base == "TRS"

    @property
    def is_cs_trs(self) -> bool:
        return self.base == "CS-TRS"

    @property
    def unconditional(self) -> bool:
        return self.base in ("TRS", "CS-TRS")

    @property
    def conditional_ctrs(self) -> bool:
        return self.base in ("CTRS", "CS-CTRS")


def classify(g: GTRS) -> SystemClass:
    """Most specific class whose side conditions the system satisfies."""
    top = g.mu.is_top(g.funcs)
    pred_names = {p.name for p in g.preds}
    plain_preds = pred_names <= {STEP, REACH}
    if (
        plain_preds
        and not g.clauses
        and all(not r.conds and rule_type(r) <= 2 for r in g.rules)
    ):
        return SystemClass("TRS" if top else "CS-TRS")
    if pred_names == {STEP, REACH, EQUIV} and all(
        all(a.pred == EQUIV for a in r.conds) for r in g.rules
    ):
        sem = recognized_semantics(g.clauses)
        if sem is not None:
            return SystemClass("CTRS" if top else "CS-CTRS", sem)
    return SystemClass("GTRS")


@dataclass(frozen=True, slots=True)
class Sentence:
    """One universally quantified Horn sentence of the system's theory."""

    label: str
    premises: tuple
    conclusion: Atom


def encode_theory(g: GTRS) -> list:
    """The first-order theory of the system: reflexivity, compatibility,
    one propagation sentence per allowed argument, and one sentence per
    clause and rule."""
    x, y, z = Var("x"), Var("y"), Var("z")
    out = [
        Sentence("Rf", (), atom(REACH, x, x)),
        Sentence("Co", (atom(STEP, x, y), atom(REACH, y, z)), atom(REACH, x, z)),
    ]
    for f in g.funcs:
        for i in sorted(g.mu.indices(f)):
            xs = [Var(f"x{k}") for k in range(1, f.arity + 1)]
            ys = list(xs)
            ys[i - 1] = Var(f"y{i}")
            out.append(
                Sentence(
                    f"Pr_{f.name},{i}",
                    (atom(STEP, xs[i - 1], ys[i - 1]),),
                    atom(STEP, App(f, tuple(xs)), App(f, tuple(ys))),
                )
            )
    for c in g.clauses:
        out.append(Sentence(f"HC_{_clause_key(c)}", c.body, c.head))
    for r in g.rules:
        out.append(Sentence(f"HC_{r.label}", r.conds, atom(STEP, r.lhs, r.rhs)))
    return out


def underlying_trs(g: GTRS) -> GTRS:
    """Drop all conditions; duplicate unconditional rules collapse to one."""
    seen = set()
    rules = []
    for r in g.rules:
        key = (render(r.lhs), render(r.rhs))
        if key in seen:
            continue
        seen.add(key)
        rules.append(Rule(r.label, r.lhs, r.rhs, ()))
    return GTRS(
        g.funcs,
        (pred_symbol(STEP), pred_symbol(REACH)),
        g.mu,
        (),
        tuple(rules),
        name=(g.name + "_u") if g.name else "",
    )


def rename_rule(r: Rule, sub: Substitution) -> Rule:
    return Rule(r.label, sub.apply(r.lhs), sub.apply(r.rhs), apply_atoms(sub, r.conds))


def rule_variables(r: Rule) -> set:
    return variables(r.lhs) | variables(r.rhs) | atom_variables(r.conds)


def sorted_terms(terms: Iterable[Term]) -> list:
    return sorted(terms, key=term_key)
