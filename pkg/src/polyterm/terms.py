"""AST of a definite logic program: terms, atoms, clauses, programs, queries."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union


@dataclass(frozen=True)
class Var:
    """A logic variable."""

    name: str

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("variable names must be nonempty")

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Compound:
    """A function-symbol application; constants have empty args."""

    functor: str
    args: tuple[Term, ...] = ()

    def __repr__(self) -> str:
        return term_to_str(self)


Term = Union[Var, Compound]


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()

    def __repr__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({', '.join(map(term_to_str, self.args))})"


@dataclass(frozen=True)
class Clause:
    """`head :- body`; an empty body is a fact. Body order is significant."""

    head: Atom
    body: tuple[Atom, ...] = ()

    def __repr__(self) -> str:
        return clause_to_str(self)


@dataclass
class Program:
    clauses: list[Clause]
    functions: dict[str, int]   # function symbol -> arity
    predicates: dict[str, int]  # predicate symbol -> arity
    annotations: list[str] = field(default_factory=list)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Program):
            return NotImplemented
        return (
            self.clauses == other.clauses
            and self.functions == other.functions
            and self.predicates == other.predicates
        )


# Query patterns: per-argument modes from the two-point lattice
# Ground < AnyTerm, optionally refined by a regular type grammar.
MODE_GROUND = "g"
MODE_ANY = "a"
MODE_TYPE = "t"


@dataclass(frozen=True)
class ArgMode:
    kind: str  # MODE_GROUND | MODE_ANY | MODE_TYPE
    grammar: str | None = None

    def __repr__(self) -> str:
        if self.kind == MODE_TYPE:
            return f"t={self.grammar}"
        return self.kind


@dataclass(frozen=True)
class QueryPattern:
    predicate: str
    modes: tuple[ArgMode, ...]

    def __repr__(self) -> str:
        return f"{self.predicate}({','.join(map(repr, self.modes))})"


# A regular type grammar maps each nonterminal to its alternatives. Every
# alternative is a type term: ("app", functor, children) applies a function
# symbol, ("ref", name) refers to a nonterminal. Alternatives are apps at the
# top level; refs appear only in argument position. The nonterminal GROUND_TYPE
# is predefined and denotes all ground terms over the program's signature.
GROUND_TYPE = "GTerm"

TypeTerm = tuple  # ("app", str, tuple[TypeTerm, ...]) | ("ref", str)


@dataclass
class QuerySpec:
    """Validated query patterns plus the grammar rules they refer to."""

    patterns: list[QueryPattern]
    grammars: dict[str, list[TypeTerm]] = field(default_factory=dict)


def term_vars(t: Term) -> Iterator[Var]:
    if isinstance(t, Var):
        yield t
    else:
        for a in t.args:
            yield from term_vars(a)


def atom_vars(a: Atom) -> Iterator[Var]:
    for t in a.args:
        yield from term_vars(t)


def clause_vars(c: Clause) -> list[Var]:
    seen: dict[Var, None] = {}
    for v in atom_vars(c.head):
        seen.setdefault(v)
    for b in c.body:
        for v in atom_vars(b):
            seen.setdefault(v)
    return list(seen)


_INFIX = {"+": 500, "*": 400}


def term_to_str(t: Term, max_prec: int = 999) -> str:
    """Canonical concrete syntax; reparsing yields a structurally equal term."""
    if isinstance(t, Var):
        return t.name
    if t.functor == "." and len(t.args) == 2:
        return _list_to_str(t)
    if t.functor in _INFIX and len(t.args) == 2:
        prec = _INFIX[t.functor]
        left = term_to_str(t.args[0], prec)
        right = term_to_str(t.args[1], prec - 1)
        s = f"{left}{t.functor}{right}"
        return f"({s})" if prec > max_prec else s
    if not t.args:
        return t.functor
    return f"{t.functor}({','.join(term_to_str(a) for a in t.args)})"


def _list_to_str(t: Compound) -> str:
    items = []
    while isinstance(t, Compound) and t.functor == "." and len(t.args) == 2:
        items.append(term_to_str(t.args[0]))
        t = t.args[1]
    if isinstance(t, Compound) and t.functor == "[]" and not t.args:
        return f"[{','.join(items)}]"
    return f"[{','.join(items)}|{term_to_str(t)}]"


def atom_to_str(a: Atom) -> str:
    if not a.args:
        return a.predicate
    return f"{a.predicate}({','.join(term_to_str(t) for t in a.args)})"


def clause_to_str(c: Clause) -> str:
    head = atom_to_str(c.head)
    if not c.body:
        return f"{head}."
    return f"{head} :- {', '.join(atom_to_str(b) for b in c.body)}."


def program_to_str(p: Program) -> str:
    """Pretty-print a program; parsing the result reproduces the program."""
    lines = [a for a in p.annotations]
    lines.extend(clause_to_str(c) for c in p.clauses)
    return "\n".join(lines) + ("\n" if lines else "")
