import random

import pytest

from polyterm.parser import (
    ParseError,
    UnsupportedConstructError,
    parse_program,
    parse_query_spec,
    parse_query_string,
)
from polyterm.terms import (
    Atom,
    Compound,
    MODE_ANY,
    MODE_GROUND,
    MODE_TYPE,
    Var,
    program_to_str,
)

DER = """
%% query: d(t=DerTerm,a)
%% type DerTerm -> der(GTerm)
d(der(u),1).
d(der(X+Y),DX+DY) :- d(der(X),DX), d(der(Y),DY).
d(der(X*Y),X*DY+Y*DX) :- d(der(X),DX), d(der(Y),DY).
d(der(der(X)),DDX) :- d(der(X),DX), d(der(DX),DDX).
"""


def test_parse_der_program():
    p = parse_program(DER)
    assert len(p.clauses) == 4
    assert p.functions == {"der": 1, "u": 0, "1": 0, "+": 2, "*": 2}
    assert p.predicates == {"d": 2}
    fact = p.clauses[0]
    assert fact.head == Atom("d", (Compound("der", (Compound("u"),)), Compound("1")))
    assert fact.body == ()


def test_parse_empty():
    p = parse_program("")
    assert p.clauses == []
    assert p.functions == {} and p.predicates == {}


def test_infix_precedence():
    p = parse_program("p(X+Y*Z).")
    term = p.clauses[0].head.args[0]
    assert term == Compound("+", (Var("X"), Compound("*", (Var("Y"), Var("Z")))))
    q = parse_program("p((X+Y)*Z).")
    grouped = q.clauses[0].head.args[0]
    assert grouped == Compound("*", (Compound("+", (Var("X"), Var("Y"))), Var("Z")))


def test_list_sugar():
    p = parse_program("p([a,b|T]). q([]).")
    lst = p.clauses[0].head.args[0]
    assert lst == Compound(
        ".", (Compound("a"), Compound(".", (Compound("b"), Var("T"))))
    )
    assert p.clauses[1].head.args[0] == Compound("[]")


def test_integers_are_constants():
    p = parse_program("p(0,42).")
    assert p.functions == {"0": 0, "42": 0}


def test_anonymous_variables_are_fresh():
    p = parse_program("p(_,_).")
    a, b = p.clauses[0].head.args
    assert isinstance(a, Var) and isinstance(b, Var) and a != b


def test_body_order_preserved():
    p = parse_program("h(X) :- a(X), b(X), c(X).")
    assert [b.predicate for b in p.clauses[0].body] == ["a", "b", "c"]


def test_syntax_error_position():
    with pytest.raises(ParseError) as e:
        parse_program("p(X) :- q(X)")  # missing final dot
    assert "1:" in str(e.value)


@pytest.mark.parametrize(
    "text",
    [
        "p(X) :- \\+ q(X).",
        "p(X) :- X is 1.",
        "p(X) :- q(X), !.",
        "p(X) :- q(X) ; r(X).",
        "p(X) :- X = a.",
        "p(X) :- X < 2.",
    ],
)
def test_unsupported_constructs_rejected(text):
    with pytest.raises(UnsupportedConstructError):
        parse_program(text)


def test_arity_consistency_enforced():
    with pytest.raises(ParseError):
        parse_program("p(f(a)). q(f(a,b)).")
    with pytest.raises(ParseError):
        parse_program("p(a). p(a,b).")
    with pytest.raises(ParseError):
        parse_program("p(q). p(X) :- q(X).")  # q both function and predicate


def test_parse_determinism():
    assert parse_program(DER) == parse_program(DER)


def test_query_spec_der():
    p = parse_program(DER)
    spec = parse_query_spec(p.annotations, p)
    (q,) = spec.patterns
    assert q.predicate == "d"
    assert q.modes[0].kind == MODE_TYPE and q.modes[0].grammar == "DerTerm"
    assert q.modes[1].kind == MODE_ANY
    assert spec.grammars == {"DerTerm": [("app", "der", (("ref", "GTerm"),))]}


def test_query_spec_modes():
    p = parse_program("d(a,b).")
    spec = parse_query_spec(["%% query: d(g,a)"], p)
    assert [m.kind for m in spec.patterns[0].modes] == [MODE_GROUND, MODE_ANY]


def test_query_spec_unknown_predicate():
    p = parse_program("p(a).")
    with pytest.raises(ParseError):
        parse_query_spec(["%% query: q(g,a,a)"], p)


def test_query_spec_arity_mismatch():
    p = parse_program("p(a).")
    with pytest.raises(ParseError):
        parse_query_spec(["%% query: p(g,g)"], p)


def test_query_spec_unknown_grammar():
    p = parse_program("p(a).")
    with pytest.raises(ParseError):
        parse_query_spec(["%% query: p(t=Nope)"], p)


def test_query_string_override():
    p = parse_program("p(a,b).")
    spec = parse_query_string("p(g,a)", p)
    assert len(spec.patterns) == 1


def test_multi_alternative_grammar():
    p = parse_program("p(t(l,l)).")
    spec = parse_query_spec(
        ["%% type Tree -> l | t(Tree,Tree)", "%% query: p(t=Tree)"], p
    )
    assert len(spec.grammars["Tree"]) == 2


def test_roundtrip_corpus(corpus_dir):
    for f in sorted(corpus_dir.glob("*.pl")):
        original = parse_program(f.read_text())
        reparsed = parse_program(program_to_str(original))
        assert reparsed == original, f.name


def _mutate_arity(text: str, rng: random.Random) -> str:
    # duplicate the arguments of one occurrence of a symbol that occurs more
    # than once, which makes its arity inconsistent program-wide
    import re
    from collections import Counter

    body = "\n".join(l for l in text.splitlines() if not l.startswith("%"))
    matches = list(re.finditer(r"([a-z][A-Za-z0-9_]*)\(([^()]*)\)", body))
    counts = Counter(m.group(1) for m in matches)
    candidates = [m for m in matches if counts[m.group(1)] > 1]
    if not candidates:
        return text
    m = rng.choice(candidates)
    return body[: m.start()] + f"{m.group(1)}({m.group(2)},{m.group(2)})" + body[m.end():]


def test_arity_mutations_rejected(corpus_dir):
    rng = random.Random(23)
    rejected = 0
    total = 0
    for f in sorted(corpus_dir.glob("*.pl")):
        base = f.read_text()
        for _ in range(5):
            mutated = _mutate_arity(base, rng)
            if mutated == base:
                continue
            total += 1
            try:
                parse_program(mutated)
            except ParseError:
                rejected += 1
    assert total > 0
    assert rejected == total
