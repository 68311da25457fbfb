"""First-order terms, positions, replacement maps, substitutions, unification.

Everything here is immutable and hashable, so values can be shared freely
between concurrent proof searches.  Grounding constants (the device that
turns a variable ``x`` into a fresh constant ``c_x``) live in a reserved
namespace so they can never collide with parsed function symbols.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Union

FUNCTION = "function"
PREDICATE = "predicate"
GROUNDING = "grounding-constant"

# Reserved markers for grounding constants; no parser accepts these characters
# in identifiers, so collisions with user symbols are impossible.
_GROUND_OPEN = "⌞"   # ⌞
_GROUND_CLOSE = "⌟"  # ⌟


@dataclass(frozen=True, slots=True)
class Symbol:
    """A function, predicate, or grounding-constant symbol with fixed arity."""

    name: str
    arity: int
    kind: str = FUNCTION

    def __repr__(self):
        return f"Symbol({self.name!r}/{self.arity})"


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __repr__(self):
        return f"Var({self.name!r})"


@dataclass(frozen=True, slots=True)
class App:
    sym: Symbol
    args: tuple

    def __post_init__(self):
        if len(self.args) != self.sym.arity:
            raise ValueError(
                f"symbol {self.sym.name} expects {self.sym.arity} arguments,"
                f" got {len(self.args)}"
            )

    def __repr__(self):
        return f"App({render(self)!r})"


Term = Union[Var, App]
Position = tuple  # tuple of 1-based argument indices; () is the root


def app(sym: Symbol, *args: Term) -> App:
    return App(sym, tuple(args))


def grounding_constant(var_name: str) -> Symbol:
    return Symbol(f"{_GROUND_OPEN}{var_name}{_GROUND_CLOSE}", 0, GROUNDING)


def is_grounding_symbol(sym: Symbol) -> bool:
    return sym.kind == GROUNDING


def render(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.sym.name
    return f"{t.sym.name}({','.join(render(a) for a in t.args)})"


def term_size(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + sum(term_size(a) for a in t.args)


def term_height(t: Term) -> int:
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + max(term_height(a) for a in t.args)


def term_key(t: Term):
    """Total order on terms used to keep every set iteration deterministic."""
    return (term_size(t), render(t))


def variables(t: Term) -> set:
    out: set = set()
    _collect_vars(t, out)
    return out


def _collect_vars(t: Term, out: set) -> None:
    if isinstance(t, Var):
        out.add(t.name)
    else:
        for a in t.args:
            _collect_vars(a, out)


def variables_of_all(terms: Iterable[Term]) -> set:
    out: set = set()
    for t in terms:
        _collect_vars(t, out)
    return out


def is_closed(t: Term) -> bool:
    """True when the term has no variables (grounding constants allowed)."""
    if isinstance(t, Var):
        return False
    return all(is_closed(a) for a in t.args)


def is_linear(t: Term) -> bool:
    seen: set = set()
    for p in positions(t):
        s = subterm_at(t, p)
        if isinstance(s, Var):
            if s.name in seen:
                return False
            seen.add(s.name)
    return True


def positions(t: Term) -> list:
    """All positions of ``t`` in lexicographic (outside-in, left-right) order."""
    out = [()]
    if isinstance(t, App):
        for i, a in enumerate(t.args, start=1):
            out.extend((i, *p) for p in positions(a))
    return out


def nonvar_positions(t: Term) -> list:
    return [p for p in positions(t) if isinstance(subterm_at(t, p), App)]


def subterm_at(t: Term, p: Position) -> Term:
    for i in p:
        if isinstance(t, Var) or not 1 <= i <= len(t.args):
            raise PositionError(f"position {'.'.join(map(str, p))} not in term")
        t = t.args[i - 1]
    return t


def replace_at(t: Term, p: Position, s: Term) -> Term:
    if not p:
        return s
    if isinstance(t, Var) or not 1 <= p[0] <= len(t.args):
        raise PositionError(f"position {'.'.join(map(str, p))} not in term")
    i = p[0]
    new_args = list(t.args)
    new_args[i - 1] = replace_at(t.args[i - 1], p[1:], s)
    return App(t.sym, tuple(new_args))


class PositionError(ValueError):
    pass


@dataclass(frozen=True)
class ReplacementMap:
    """Per-symbol set of argument indices where rewriting is allowed.

    Symbols absent from ``entries`` default to the empty set (no argument
    may be rewritten below them).
    """

    entries: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        frozen = {name: frozenset(ix) for name, ix in dict(self.entries).items()}
        object.__setattr__(self, "entries", frozen)

    def indices(self, sym: Symbol) -> frozenset:
        return self.entries.get(sym.name, frozenset())

    @staticmethod
    def top(symbols: Iterable[Symbol]) -> "ReplacementMap":
        return ReplacementMap(
            {s.name: frozenset(range(1, s.arity + 1)) for s in symbols}
        )

    @staticmethod
    def bottom() -> "ReplacementMap":
        return ReplacementMap({})

    def is_top(self, symbols: Iterable[Symbol]) -> bool:
        return all(
            self.indices(s) == frozenset(range(1, s.arity + 1)) for s in symbols
        )

    def is_bottom(self) -> bool:
        return all(not ix for ix in self.entries.values())

    def leq(self, other: "ReplacementMap") -> bool:
        """More-restrictive-or-equal: every allowed index is allowed in other."""
        names = set(self.entries) | set(other.entries)
        return all(
            self.entries.get(n, frozenset()) <= other.entries.get(n, frozenset())
            for n in names
        )

    def __hash__(self):
        return hash(tuple(sorted((n, tuple(sorted(ix))) for n, ix in self.entries.items())))


def active_positions(t: Term, mu: ReplacementMap) -> list:
    """Positions reachable through allowed argument indices only."""
    out = [()]
    if isinstance(t, App):
        allowed = mu.indices(t.sym)
        for i, a in enumerate(t.args, start=1):
            if i in allowed:
                out.extend((i, *p) for p in active_positions(a, mu))
    return out


def frozen_positions(t: Term, mu: ReplacementMap) -> list:
    act = set(active_positions(t, mu))
    return [p for p in positions(t) if p not in act]


def active_nonvar_positions(t: Term, mu: ReplacementMap) -> list:
    return [
        p for p in active_positions(t, mu) if isinstance(subterm_at(t, p), App)
    ]


def active_var_positions(t: Term, mu: ReplacementMap, name: str) -> list:
    return [
        p
        for p in active_positions(t, mu)
        if isinstance(subterm_at(t, p), Var) and subterm_at(t, p).name == name
    ]


def active_variables(t: Term, mu: ReplacementMap) -> set:
    return {
        subterm_at(t, p).name
        for p in active_positions(t, mu)
        if isinstance(subterm_at(t, p), Var)
    }


def frozen_variables(t: Term, mu: ReplacementMap) -> set:
    return {
        subterm_at(t, p).name
        for p in frozen_positions(t, mu)
        if isinstance(subterm_at(t, p), Var)
    }


class Substitution:
    """Finite mapping from variable names to terms; identity bindings dropped."""

    __slots__ = ("bindings", "_hash")

    def __init__(self, bindings: Optional[Mapping[str, Term]] = None):
        cleaned = {}
        for name, t in (bindings or {}).items():
            if isinstance(t, Var) and t.name == name:
                continue
            cleaned[name] = t
        self.bindings: dict = cleaned
        self._hash: Optional[int] = None

    def __bool__(self):
        return bool(self.bindings)

    def __eq__(self, other):
        return isinstance(other, Substitution) and self.bindings == other.bindings

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(sorted(self.bindings.items(), key=lambda kv: kv[0])))
        return self._hash

    def __repr__(self):
        inner = ", ".join(
            f"{k} -> {render(v)}" for k, v in sorted(self.bindings.items())
        )
        return "{" + inner + "}"

    def get(self, name: str) -> Optional[Term]:
        return self.bindings.get(name)

    def domain(self) -> set:
        return set(self.bindings)

    def apply(self, t: Term) -> Term:
        if isinstance(t, Var):
            return self.bindings.get(t.name, t)
        if not self.bindings:
            return t
        return App(t.sym, tuple(self.apply(a) for a in t.args))

    def compose(self, after: "Substitution") -> "Substitution":
        """Substitution equal to applying self first, then ``after``."""
        merged = {name: after.apply(t) for name, t in self.bindings.items()}
        for name, t in after.bindings.items():
            if name not in merged:
                merged[name] = t
        return Substitution(merged)

    def restrict(self, names: Iterable[str]) -> "Substitution":
        wanted = set(names)
        return Substitution({k: v for k, v in self.bindings.items() if k in wanted})

    def ground_down(self) -> "Substitution":
        return Substitution({k: ground_down(v) for k, v in self.bindings.items()})


EMPTY_SUBST = Substitution()


def unify(s: Term, t: Term) -> Optional[Substitution]:
    """Most general unifier with occurs check, or None.

    Disagreement pairs are processed left to right, which fixes the binding
    order and makes proof output reproducible.
    """
    bindings: dict = {}

    def walk(u: Term) -> Term:
        while isinstance(u, Var) and u.name in bindings:
            u = bindings[u.name]
        return u

    def occurs(name: str, u: Term) -> bool:
        u = walk(u)
        if isinstance(u, Var):
            return u.name == name
        return any(occurs(name, a) for a in u.args)

    stack = [(s, t)]
    while stack:
        a, b = stack.pop(0)
        a, b = walk(a), walk(b)
        if isinstance(a, Var):
            if isinstance(b, Var) and b.name == a.name:
                continue
            if occurs(a.name, b):
                return None
            bindings[a.name] = b
            continue
        if isinstance(b, Var):
            if occurs(b.name, a):
                return None
            bindings[b.name] = a
            continue
        if a.sym != b.sym:
            return None
        stack[0:0] = list(zip(a.args, b.args))

    # Resolve chains so the result is idempotent.
    result = Substitution({})
    out: dict = {}

    def resolve(u: Term) -> Term:
        u = walk(u)
        if isinstance(u, Var):
            return u
        return App(u.sym, tuple(resolve(a) for a in u.args))

    for name in bindings:
        out[name] = resolve(Var(name))
    result = Substitution(out)
    return result


def match(pattern: Term, subject: Term) -> Optional[Substitution]:
    """One-way matching: binds pattern variables, treats subject as rigid."""
    bindings: dict = {}
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop(0)
        if isinstance(p, Var):
            bound = bindings.get(p.name)
            if bound is None:
                bindings[p.name] = s
            elif bound != s:
                return None
            continue
        if isinstance(s, Var) or p.sym != s.sym:
            return None
        stack[0:0] = list(zip(p.args, s.args))
    return Substitution(bindings)


def fresh_name(base: str, avoid: set) -> str:
    name = base
    while name in avoid:
        name += "'"
    return name


def renaming_for(names: Iterable[str], avoid: set) -> Substitution:
    """Bijective renaming of ``names`` to fresh variables outside ``avoid``."""
    taken = set(avoid)
    out = {}
    for name in sorted(names):
        fresh = fresh_name(name, taken)
        taken.add(fresh)
        out[name] = Var(fresh)
    return Substitution(out)


def rename_apart(avoid: set, terms: Iterable[Term]) -> Substitution:
    terms = list(terms)
    return renaming_for(variables_of_all(terms), avoid)


def ground_down(t: Term) -> Term:
    """Replace every variable x by its grounding constant c_x."""
    if isinstance(t, Var):
        return App(grounding_constant(t.name), ())
    return App(t.sym, tuple(ground_down(a) for a in t.args))


def enumerate_ground_terms(symbols: list, max_size: int, limit: int) -> list:
    """Closed terms over ``symbols`` by size, ties broken by declaration order."""
    by_size: dict = {}
    consts = [s for s in symbols if s.arity == 0]
    by_size[1] = [App(c, ()) for c in consts]
    out = list(by_size[1])
    size = 2
    while len(out) < limit and size <= max_size:
        layer = []
        for sym in symbols:
            if sym.arity == 0:
                continue
            for split in _compositions(size - 1, sym.arity):
                pools = [by_size.get(n, []) for n in split]
                for combo in _product(pools):
                    layer.append(App(sym, tuple(combo)))
        by_size[size] = layer
        out.extend(layer)
        size += 1
    return out[:limit]


def _compositions(total: int, parts: int) -> Iterator[tuple]:
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first, *rest)


def _product(pools: list) -> Iterator[tuple]:
    if not pools:
        yield ()
        return
    head, *tail = pools
    for x in head:
        for rest in _product(tail):
            yield (x, *rest)
