"""Problem-file formats and proof rendering.

Both common formats are read: block-structured files with CONDITIONTYPE /
REPLACEMENT-MAP / VAR / RULES sections, and the older variant that spells
the replacement map inside a STRATEGY CONTEXTSENSITIVE block.  The two
may be mixed.  Undeclared identifiers are function symbols; arities are
inferred from first use and checked for consistency.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .framework import OPEN_LEAF, ProofTree, Verdict
from .systems import (
    EQUIV,
    GTRS,
    JOIN,
    ORIENTED,
    REACH,
    SEMI_EQUATIONAL,
    STEP,
    Atom,
    Rule,
    atom,
    classify,
    make_system,
    render_atom,
    render_rule,
)
from .terms import App, ReplacementMap, Symbol, Term, Var, render


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


@dataclass
class _Token:
    text: str
    line: int
    column: int


_PUNCT = "(),|"


def _tokenize(text: str) -> list:
    out = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if ch in _PUNCT:
            out.append(_Token(ch, line, col))
            i += 1
            col += 1
            continue
        start = i
        start_col = col
        while i < len(text) and not text[i].isspace() and text[i] not in _PUNCT:
            i += 1
            col += 1
        out.append(_Token(text[start:i], line, start_col))
    return out


@dataclass
class Diagnostics:
    skipped_blocks: list = field(default_factory=list)
    notes: list = field(default_factory=list)


class _Parser:
    def __init__(self, tokens: list):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Optional[_Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("", 1, 1)
            raise ParseError("unexpected end of input", last.line, last.column)
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.column)
        return tok


def detect_format(text: str) -> str:
    if "STRATEGY" in text and "CONTEXTSENSITIVE" in text:
        return "tpdb"
    return "cops"


_CONDITION_TYPES = {
    "ORIENTED": ORIENTED,
    "JOIN": JOIN,
    "SEMI-EQUATIONAL": SEMI_EQUATIONAL,
    "SEMIEQUATIONAL": SEMI_EQUATIONAL,
}


def parse(text: str, format_hint: Optional[str] = None, name: str = ""):
    """Parse a system description; returns (system, diagnostics)."""
    tokens = _tokenize(text)
    p = _Parser(tokens)
    diags = Diagnostics()
    declared_vars: set = set()
    condition_type: Optional[str] = None
    rmap_entries: Optional[dict] = None
    surface_rules: list = []

    while p.peek() is not None:
        p.expect("(")
        head = p.next()
        key = head.text.upper()
        if key == "CONDITIONTYPE":
            tok = p.next()
            ct = _CONDITION_TYPES.get(tok.text.upper())
            if ct is None:
                raise ParseError(
                    f"unknown condition type {tok.text!r}", tok.line, tok.column
                )
            condition_type = ct
            p.expect(")")
        elif key == "VAR":
            while p.peek() is not None and p.peek().text != ")":
                declared_vars.add(p.next().text)
            p.expect(")")
        elif key == "REPLACEMENT-MAP":
            rmap_entries = _parse_rmap_entries(p)
        elif key == "STRATEGY":
            tok = p.next()
            if tok.text.upper() != "CONTEXTSENSITIVE":
                _skip_block(p, diags, f"STRATEGY {tok.text}")
                continue
            rmap_entries = _parse_rmap_entries(p)
        elif key == "RULES":
            surface_rules.extend(_parse_rules(p, declared_vars))
        else:
            _skip_block(p, diags, head.text)

    return _build_system(
        surface_rules, declared_vars, condition_type, rmap_entries, diags, name
    )


def _skip_block(p: _Parser, diags: Diagnostics, label: str) -> None:
    depth = 1
    while depth > 0:
        tok = p.next()
        if tok.text == "(":
            depth += 1
        elif tok.text == ")":
            depth -= 1
    diags.skipped_blocks.append(label)


def _parse_rmap_entries(p: _Parser) -> dict:
    entries: dict = {}
    while p.peek() is not None and p.peek().text == "(":
        p.expect("(")
        sym = p.next().text
        indices = set()
        while p.peek() is not None and p.peek().text != ")":
            tok = p.next()
            if tok.text == ",":
                continue
            if not tok.text.isdigit():
                raise ParseError(
                    f"expected argument index, found {tok.text!r}",
                    tok.line,
                    tok.column,
                )
            indices.add(int(tok.text))
        p.expect(")")
        entries[sym] = frozenset(indices)
    p.expect(")")
    return entries


@dataclass
class _SurfaceTerm:
    name: str
    args: list
    line: int
    column: int


@dataclass
class _SurfaceRule:
    lhs: _SurfaceTerm
    rhs: _SurfaceTerm
    conds: list  # (lhs, op, rhs)


def _parse_term(p: _Parser) -> _SurfaceTerm:
    tok = p.next()
    if tok.text in _PUNCT or _is_arrow(tok.text):
        raise ParseError(f"expected a term, found {tok.text!r}", tok.line, tok.column)
    args: list = []
    nxt = p.peek()
    if nxt is not None and nxt.text == "(":
        p.expect("(")
        if p.peek() is not None and p.peek().text == ")":
            p.expect(")")
        else:
            args.append(_parse_term(p))
            while p.peek() is not None and p.peek().text == ",":
                p.expect(",")
                args.append(_parse_term(p))
            p.expect(")")
    return _SurfaceTerm(tok.text, args, tok.line, tok.column)


_ARROWS = {"->", "->*", "==", "<->*"}


def _is_arrow(text: str) -> bool:
    return text in _ARROWS


def _parse_rules(p: _Parser, declared_vars: set) -> list:
    rules = []
    while p.peek() is not None and p.peek().text != ")":
        lhs = _parse_term(p)
        p.expect("->")
        rhs = _parse_term(p)
        conds = []
        if p.peek() is not None and p.peek().text == "|":
            p.expect("|")
            while True:
                cl = _parse_term(p)
                op = p.next()
                if op.text not in ("==", "->*", "<->*"):
                    raise ParseError(
                        f"expected a condition relation, found {op.text!r}",
                        op.line,
                        op.column,
                    )
                cr = _parse_term(p)
                conds.append((cl, op.text, cr))
                if p.peek() is not None and p.peek().text == ",":
                    p.expect(",")
                    continue
                break
        rules.append(_SurfaceRule(lhs, rhs, conds))
    p.expect(")")
    return rules


def _build_system(
    surface_rules: list,
    declared_vars: set,
    condition_type: Optional[str],
    rmap_entries: Optional[dict],
    diags: Diagnostics,
    name: str,
):
    arities: dict = {}
    order: list = []

    def walk(t: _SurfaceTerm):
        if t.name in declared_vars:
            if t.args:
                raise ParseError(
                    f"variable {t.name!r} used with arguments", t.line, t.column
                )
            return
        seen = arities.get(t.name)
        if seen is None:
            arities[t.name] = len(t.args)
            order.append(t.name)
        elif seen != len(t.args):
            raise ParseError(
                f"symbol {t.name!r} used with {len(t.args)} arguments"
                f" but earlier with {seen}",
                t.line,
                t.column,
            )
        for a in t.args:
            walk(a)

    for r in surface_rules:
        walk(r.lhs)
        walk(r.rhs)
        for cl, _, cr in r.conds:
            walk(cl)
            walk(cr)
    if rmap_entries:
        for sym_name in rmap_entries:
            if sym_name not in arities:
                arities[sym_name] = max(rmap_entries[sym_name], default=0)
                order.append(sym_name)

    symbols = {n: Symbol(n, arities[n]) for n in order}

    def to_term(t: _SurfaceTerm) -> Term:
        if t.name in declared_vars:
            return Var(t.name)
        return App(symbols[t.name], tuple(to_term(a) for a in t.args))

    rules = []
    uses_equiv = False
    for i, r in enumerate(surface_rules, start=1):
        conds = []
        for cl, op, cr in r.conds:
            if op == "->*":
                conds.append(atom(REACH, to_term(cl), to_term(cr)))
            else:
                uses_equiv = True
                conds.append(atom(EQUIV, to_term(cl), to_term(cr)))
        rules.append(Rule(str(i), to_term(r.lhs), to_term(r.rhs), tuple(conds)))

    funcs = [symbols[n] for n in order]
    if rmap_entries is not None:
        mu = ReplacementMap(rmap_entries)
    else:
        mu = ReplacementMap.top(funcs)
    semantics = condition_type
    if semantics is None and uses_equiv:
        semantics = ORIENTED
        diags.notes.append(
            "conditional system without a condition type: treating == as reachability"
        )
    system = make_system(funcs, rules, mu=mu, semantics=semantics, name=name)
    return system, diags


# ----------------------------------------------------------------------
# rendering systems


def render_system(g: GTRS, format: str = "cops") -> str:
    """Serialize back to a problem file; inverse of parse up to renaming."""
    cls = classify(g)
    sem = cls.semantics
    if g.clauses and sem is None:
        raise ValueError("systems with bespoke clauses have no file rendering")
    for r in g.rules:
        for a in r.conds:
            if a.pred not in (EQUIV, REACH):
                raise ValueError(f"condition predicate {a.pred!r} has no file rendering")
    lines = []
    if format == "cops":
        if sem is not None:
            label = {
                ORIENTED: "ORIENTED",
                JOIN: "JOIN",
                SEMI_EQUATIONAL: "SEMI-EQUATIONAL",
            }[sem]
            lines.append(f"(CONDITIONTYPE {label})")
        if not g.mu.is_top(g.funcs):
            lines.append("(REPLACEMENT-MAP")
            for s in g.funcs:
                ix = " ".join(str(i) for i in sorted(g.mu.indices(s)))
                lines.append(f"  ({s.name}{(' ' + ix) if ix else ' '})")
            lines.append(")")
    else:
        if sem not in (None, ORIENTED):
            raise ValueError("only reachability conditions exist in this format")
        if not g.mu.is_top(g.funcs):
            lines.append("(STRATEGY CONTEXTSENSITIVE")
            for s in g.funcs:
                ix = " ".join(str(i) for i in sorted(g.mu.indices(s)))
                lines.append(f"  ({s.name}{(' ' + ix) if ix else ' '})")
            lines.append(")")
    varnames = sorted(
        {v for r in g.rules for v in _rule_var_names(r)}
    )
    if varnames:
        lines.append(f"(VAR {' '.join(varnames)})")
    lines.append("(RULES")
    for r in g.rules:
        base = f"  {render(r.lhs)} -> {render(r.rhs)}"
        if r.conds:
            rel = "==" if format == "cops" else "->*"
            parts = []
            for a in r.conds:
                op = "->*" if a.pred == REACH else rel
                parts.append(f"{render(a.args[0])} {op} {render(a.args[1])}")
            base += " | " + ", ".join(parts)
        lines.append(base)
    lines.append(")")
    return "\n".join(lines) + "\n"


def _rule_var_names(r: Rule) -> set:
    from .systems import rule_variables

    return rule_variables(r)


# ----------------------------------------------------------------------
# proof rendering


def render_proof(v: Verdict, mode: str = "text") -> str:
    """First line is exactly YES, NO, or MAYBE; then the tree."""
    if mode == "none":
        return v.answer + "\n"
    if mode == "structured":
        return _render_structured(v)
    lines = [v.answer]
    _render_node(v.tree, lines, 0)
    return "\n".join(lines) + "\n"


def _render_node(t: ProofTree, lines: list, depth: int) -> None:
    pad = "  " * depth
    if t.problem is None:
        lines.append(f"{pad}{t.leaf}")
        return
    desc = t.problem.describe()
    if t.step is None:
        marker = "open" if t.leaf == OPEN_LEAF else (t.leaf or "")
        lines.append(f"{pad}{desc}  [{marker}]")
        return
    flags = []
    if t.step.sound:
        flags.append("sound")
    if t.step.complete:
        flags.append("complete")
    note = ", ".join(
        f"{k}={v}" for k, v in sorted(t.step.annotations.items())
    )
    head = f"{pad}{desc}  via {t.step.processor} ({'/'.join(flags) or 'neither'})"
    if note:
        head += f"  {{{note}}}"
    lines.append(head)
    for c in t.children:
        _render_node(c, lines, depth + 1)


def _render_structured(v: Verdict) -> str:
    records = []

    def walk(t: ProofTree, parent: Optional[int]) -> None:
        ident = len(records)
        rec = {
            "id": ident,
            "parent": parent,
        }
        if t.problem is None:
            rec["leaf"] = t.leaf
        else:
            rec["kind"] = t.problem.kind
            rec["system"] = t.problem.system.name or None
            rec["rules"] = [render_rule(r) for r in t.problem.system.rules]
            if t.problem.pair is not None:
                rec["pair"] = t.problem.pair.render()
            if t.step is not None:
                rec["processor"] = t.step.processor
                rec["sound"] = t.step.sound
                rec["complete"] = t.step.complete
                rec["annotations"] = dict(t.step.annotations)
            elif t.leaf is not None:
                rec["leaf"] = t.leaf
        records.append(rec)
        for c in t.children:
            walk(c, ident)

    walk(v.tree, None)
    lines = [v.answer, json.dumps({"format": "proof-tree", "version": 1})]
    lines.extend(json.dumps(r) for r in records)
    return "\n".join(lines) + "\n"
