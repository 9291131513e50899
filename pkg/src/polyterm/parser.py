"""Parser for the supported fragment of Edinburgh-style definite programs.

Accepts clauses `H.` and `H :- B1, ..., Bn.`, with `+` and `*` as infix
function symbols, list sugar `[a,b|T]` (desugared to './2' and '[]/0'), and
integers as 0-ary constant symbols. Query patterns and regular type grammars
live in `%% query:` / `%% type` comment annotations. Anything outside the
fragment (negation, cut, arithmetic, disjunction, ...) is rejected with the
offending token and its position.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .terms import (
    GROUND_TYPE,
    MODE_ANY,
    MODE_GROUND,
    MODE_TYPE,
    ArgMode,
    Atom,
    Clause,
    Compound,
    Program,
    QueryPattern,
    QuerySpec,
    Var,
)


class ParseError(ValueError):
    """Syntax error with source position."""

    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class UnsupportedConstructError(ParseError):
    """Input is syntactically Prolog but outside the supported fragment."""


@dataclass(frozen=True)
class Token:
    kind: str  # atom | var | num | punct
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<comment>%[^\n]*)
    | (?P<atom>[a-z][A-Za-z0-9_]*)
    | (?P<var>[A-Z_][A-Za-z0-9_]*)
    | (?P<num>\d+)
    | (?P<neck>:-)
    | (?P<punct>[()\[\],.|+*])
    | (?P<bad>.)
    """,
    re.VERBOSE,
)

_UNSUPPORTED_CHARS = set("!;\\<>=-/?@#&^~{}$:")
_UNSUPPORTED_ATOMS = {"is", "not", "call", "assert", "asserta", "assertz", "retract"}


def _tokenize(text: str):
    tokens: list[Token] = []
    annotations: list[str] = []
    line, col = 1, 1
    for m in _TOKEN_RE.finditer(text):
        s = m.group(0)
        kind = m.lastgroup
        if kind == "comment":
            if s.startswith("%%"):
                annotations.append(s)
        elif kind == "ws":
            pass
        elif kind == "bad":
            if s in _UNSUPPORTED_CHARS:
                raise UnsupportedConstructError(
                    f"unsupported construct {s!r}", line, col
                )
            raise ParseError(f"unexpected character {s!r}", line, col)
        elif kind == "neck":
            tokens.append(Token("punct", ":-", line, col))
        else:
            if kind == "atom" and s in _UNSUPPORTED_ATOMS:
                raise UnsupportedConstructError(f"unsupported construct {s!r}", line, col)
            tokens.append(Token(kind, s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
    return tokens, annotations


class _Parser:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.pos = 0
        self.fresh = 0  # counter for anonymous variables

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> Token:
        t = self.peek()
        if t is None:
            last = self.tokens[-1] if self.tokens else Token("punct", "", 1, 1)
            raise ParseError("unexpected end of input", last.line, last.col)
        self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.line, t.col)
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t is not None and t.text == text

    def parse_clauses(self) -> list[Clause]:
        clauses = []
        while self.peek() is not None:
            clauses.append(self.clause())
        return clauses

    def clause(self) -> Clause:
        self.fresh = 0
        head = self.atom()
        body: list[Atom] = []
        if self.at(":-"):
            self.next()
            body.append(self.atom())
            while self.at(","):
                self.next()
                body.append(self.atom())
        self.expect(".")
        return Clause(head, tuple(body))

    def atom(self) -> Atom:
        t = self.next()
        if t.kind != "atom":
            raise ParseError(f"expected a predicate symbol, found {t.text!r}", t.line, t.col)
        args: list = []
        if self.at("("):
            self.next()
            args.append(self.term())
            while self.at(","):
                self.next()
                args.append(self.term())
            self.expect(")")
        return Atom(t.text, tuple(args))

    # term := addend ('+' addend)*, addend := primary ('*' primary)*
    def term(self):
        left = self.addend()
        while self.at("+"):
            self.next()
            left = Compound("+", (left, self.addend()))
        return left

    def addend(self):
        left = self.primary()
        while self.at("*"):
            self.next()
            left = Compound("*", (left, self.primary()))
        return left

    def primary(self):
        t = self.next()
        if t.kind == "var":
            if t.text == "_":
                self.fresh += 1
                return Var(f"_G{self.fresh}")
            return Var(t.text)
        if t.kind == "num":
            return Compound(t.text)
        if t.kind == "atom":
            args: list = []
            if self.at("("):
                self.next()
                args.append(self.term())
                while self.at(","):
                    self.next()
                    args.append(self.term())
                self.expect(")")
            return Compound(t.text, tuple(args))
        if t.text == "(":
            inner = self.term()
            self.expect(")")
            return inner
        if t.text == "[":
            return self.list_tail()
        raise ParseError(f"expected a term, found {t.text!r}", t.line, t.col)

    def list_tail(self):
        if self.at("]"):
            self.next()
            return Compound("[]")
        items = [self.term()]
        while self.at(","):
            self.next()
            items.append(self.term())
        if self.at("|"):
            self.next()
            tail = self.term()
        else:
            tail = Compound("[]")
        self.expect("]")
        for item in reversed(items):
            tail = Compound(".", (item, tail))
        return tail


def _collect_signature(clauses: list[Clause]) -> tuple[dict[str, int], dict[str, int]]:
    functions: dict[str, int] = {}
    predicates: dict[str, int] = {}

    def visit_term(t) -> None:
        if isinstance(t, Var):
            return
        seen = functions.get(t.functor)
        if seen is not None and seen != len(t.args):
            raise ParseError(
                f"function symbol {t.functor!r} used with arities {seen} and {len(t.args)}",
                1,
                1,
            )
        functions.setdefault(t.functor, len(t.args))
        for a in t.args:
            visit_term(a)

    def visit_atom(a: Atom) -> None:
        seen = predicates.get(a.predicate)
        if seen is not None and seen != len(a.args):
            raise ParseError(
                f"predicate {a.predicate!r} used with arities {seen} and {len(a.args)}",
                1,
                1,
            )
        predicates.setdefault(a.predicate, len(a.args))
        for t in a.args:
            visit_term(t)

    for c in clauses:
        visit_atom(c.head)
        for b in c.body:
            visit_atom(b)

    overlap = set(functions) & set(predicates)
    if overlap:
        raise ParseError(
            f"symbols used both as function and predicate: {sorted(overlap)}", 1, 1
        )
    return functions, predicates


def parse_program(text: str) -> Program:
    """Parse a program; `%%` annotation lines are collected on the result."""
    tokens, annotations = _tokenize(text)
    clauses = _Parser(tokens).parse_clauses()
    functions, predicates = _collect_signature(clauses)
    return Program(clauses, functions, predicates, annotations)


_QUERY_RE = re.compile(r"^%%\s*query:\s*(?P<pred>[a-z][A-Za-z0-9_]*)\s*\((?P<modes>[^)]*)\)\s*$")
_TYPE_RE = re.compile(r"^%%\s*type\s+(?P<name>[A-Z][A-Za-z0-9_]*)\s*->\s*(?P<rhs>.+?)\s*$")
_MODE_RE = re.compile(r"^(g|a|t\s*=\s*(?P<g>[A-Z][A-Za-z0-9_]*))$")


def _parse_type_term(text: str, line_no: int) -> tuple:
    text = text.strip()
    m = re.fullmatch(r"(?P<f>[a-z0-9][A-Za-z0-9_]*)\s*(\((?P<args>.*)\))?", text)
    if m:
        f = m.group("f")
        argstext = m.group("args")
        if argstext is None:
            return ("app", f, ())
        args = tuple(_parse_type_term(a, line_no) for a in _split_args(argstext, line_no))
        return ("app", f, args)
    if re.fullmatch(r"[A-Z][A-Za-z0-9_]*", text):
        return ("ref", text)
    raise ParseError(f"malformed type term {text!r}", line_no, 1)


def _split_args(text: str, line_no: int) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise ParseError("unbalanced parentheses in type rule", line_no, 1)
    parts.append("".join(cur))
    return parts


def parse_query_spec(annotations: list[str], program: Program) -> QuerySpec:
    """Parse and validate `%% query:` and `%% type` annotation lines."""
    patterns: list[QueryPattern] = []
    grammars: dict[str, list] = {}

    for i, raw in enumerate(annotations, 1):
        line = raw.strip()
        tm = _TYPE_RE.match(line)
        if tm:
            name = tm.group("name")
            if name == GROUND_TYPE:
                raise ParseError(f"{GROUND_TYPE} is predefined and cannot be redefined", i, 1)
            alts = []
            for alt in tm.group("rhs").split("|"):
                tt = _parse_type_term(alt, i)
                if tt[0] != "app":
                    raise ParseError(
                        f"type alternatives must apply a function symbol: {alt.strip()!r}", i, 1
                    )
                alts.append(tt)
            grammars.setdefault(name, []).extend(alts)
            continue
        qm = _QUERY_RE.match(line)
        if qm:
            pred = qm.group("pred")
            modes = []
            for part in qm.group("modes").split(","):
                part = part.strip()
                mm = _MODE_RE.match(part)
                if not mm:
                    raise ParseError(f"malformed mode {part!r}", i, 1)
                if part == "g":
                    modes.append(ArgMode(MODE_GROUND))
                elif part == "a":
                    modes.append(ArgMode(MODE_ANY))
                else:
                    modes.append(ArgMode(MODE_TYPE, mm.group("g")))
            patterns.append(QueryPattern(pred, tuple(modes)))
            continue
        if line.startswith("%%") and line[2:].strip():
            raise ParseError(f"unrecognized annotation {line!r}", i, 1)

    for p in patterns:
        arity = program.predicates.get(p.predicate)
        if arity is None:
            raise ParseError(f"unknown predicate {p.predicate!r} in query pattern", 1, 1)
        if arity != len(p.modes):
            raise ParseError(
                f"query pattern for {p.predicate!r} has {len(p.modes)} modes, arity is {arity}",
                1,
                1,
            )
        for m in p.modes:
            if m.kind == MODE_TYPE and m.grammar != GROUND_TYPE and m.grammar not in grammars:
                raise ParseError(f"unknown grammar name {m.grammar!r}", 1, 1)

    def check_refs(tt) -> None:
        if tt[0] == "ref":
            if tt[1] != GROUND_TYPE and tt[1] not in grammars:
                raise ParseError(f"unknown grammar name {tt[1]!r}", 1, 1)
        else:
            for a in tt[2]:
                check_refs(a)

    for alts in grammars.values():
        for alt in alts:
            check_refs(alt)

    return QuerySpec(patterns, grammars)


def parse_query_string(text: str, program: Program) -> QuerySpec:
    """Parse a `p(g,a,...)` pattern given on the command line."""
    return parse_query_spec([f"%% query: {text}"], program)
