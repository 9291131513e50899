import random

import pytest

from gen import random_upoly, random_vpoly, random_ground_term
from polyterm.poly import (
    LINEAR,
    SIMPLE_MIXED,
    CmpResult,
    UnknownPool,
    UPoly,
    VPoly,
    cmp_nat,
    compose,
    concretize_template,
    formal,
    level_map,
    mint_template,
    shape_monomials,
)
from polyterm.parser import parse_program


def x(name):
    return VPoly.var(name)


def test_square_of_linear_sum():
    p = x("X") + x("Y") + 2
    sq = p * p
    expected = (
        x("X") ** 2
        + 2 * (x("X") * x("Y"))
        + x("Y") ** 2
        + 4 * x("X")
        + 4 * x("Y")
        + VPoly.const(4)
    )
    assert sq == expected


def test_ring_identities():
    p = 3 * x("X") * x("Y") + x("Z") - 7
    assert p * VPoly.const(1) == p
    assert p - p == VPoly.zero()
    assert p + VPoly.zero() == p


def test_unknown_monomial_product():
    pool = UnknownPool()
    conc1, d1, der2 = (pool.fresh(n) for n in ("conc_1", "d_1", "der_2"))
    prod = UPoly.var(conc1) * UPoly.var(d1) * UPoly.var(der2) ** 2
    assert len(prod.terms) == 1
    ((mono, coeff),) = prod.terms.items()
    assert coeff == 1
    assert mono == ((conc1, 1), (d1, 1), (der2, 2))


def test_compose_paper_square_example():
    # X^2 + 2X + 2 composed with X+Y+2
    template = x(formal(1)) ** 2 + 2 * x(formal(1)) + 2
    arg = x("X") + x("Y") + 2
    composed = compose(template, [arg])
    assert composed == arg * arg + 2 * arg + 2


def test_compose_projection():
    t = 3 * x("A") * x("B") + 1
    assert compose(x(formal(1)), [t]) == t


def test_compose_symbolic_template():
    pool = UnknownPool()
    der = mint_template(pool, "der", SIMPLE_MIXED, 1)
    dx = x("DX")
    composed = compose(der.poly, [dx])
    der0, der1, der2 = der.coeffs
    expected = (
        VPoly.const(UPoly.var(der2)) * dx * dx
        + VPoly.const(UPoly.var(der1)) * dx
        + VPoly.const(UPoly.var(der0))
    )
    assert composed == expected


def test_shape_monomials():
    assert shape_monomials(LINEAR, 2) == [(), ((formal(1), 1),), ((formal(2), 1),)]
    sm = shape_monomials(SIMPLE_MIXED, 2)
    assert len(sm) == 6  # 4 products + 2 squares
    assert ((formal(1), 1), (formal(2), 1)) in sm
    assert ((formal(1), 2),) in sm
    # arity-1 simple-mixed is constant, variable, square, in that order
    assert shape_monomials(SIMPLE_MIXED, 1) == [(), ((formal(1), 1),), ((formal(1), 2),)]


PAPER_I = None


def paper_interpretation():
    """I(+)=I(*)=X1+X2+2, I(der)=X^2+2X+2, I(u)=I(1)=1, I(d)=X1."""
    plus = x(formal(1)) + x(formal(2)) + 2
    return {
        "+": plus,
        "*": plus,
        "der": x(formal(1)) ** 2 + 2 * x(formal(1)) + 2,
        "u": VPoly.const(1),
        "1": VPoly.const(1),
        "d": x(formal(1)),
    }


def parse_terms(text):
    program = parse_program(text)
    return program


def test_level_map_paper_example():
    program = parse_terms("d(der(X+Y),DX+DY).")
    atom = program.clauses[0].head
    level = level_map(atom, paper_interpretation())
    s = x("X") + x("Y") + 2
    assert level == s * s + 2 * s + 2


def test_level_map_variable():
    from polyterm.terms import Var

    assert level_map(Var("X"), {}) == x("X")


def test_level_map_symbolic_nested():
    pool = UnknownPool()
    der = mint_template(pool, "der", SIMPLE_MIXED, 1)
    program = parse_terms("p(der(der(X))).")
    inner_term = program.clauses[0].head.args[0]
    level = level_map(inner_term, {"der": der.poly})
    inner = compose(der.poly, [x("X")])
    assert level == compose(der.poly, [inner])


def test_eval_der_fact_levels():
    interp = paper_interpretation()
    program = parse_terms("d(der(u),1).")
    fact = program.clauses[0].head
    left = level_map(fact.args[0], interp)
    right = level_map(fact.args[1], interp)
    assert left.eval({}, {}) == 5  # |der(u)| = 1 + 2 + 2
    assert right.eval({}, {}) == 1
    level = level_map(parse_terms("p(der(X+Y)).").clauses[0].head.args[0], interp)
    assert level.eval({}, {"X": 0, "Y": 0}) == 10
    # the fact condition 5 > 1 comes from |der(X)| at the level of u, which is 1
    inner = level_map(parse_terms("p(der(X)).").clauses[0].head.args[0], interp)
    assert inner.eval({}, {"X": 1}) == 5


def test_eval_zero():
    assert VPoly.zero().eval({}, {}) == 0


def test_eval_m1_coefficient():
    # M_1 = conc_1*d_1*der_2^3 + prem_2*o_1^2*der_2^2 - prem_2*i_1^2*der_2^2
    pool = UnknownPool()
    conc1, d1, der2, prem2, i1, o1 = (
        pool.fresh(n) for n in ("conc_1", "d_1", "der_2", "prem_2", "i_1", "o_1")
    )
    m1 = (
        UPoly.var(conc1) * UPoly.var(d1) * UPoly.var(der2) ** 3
        + UPoly.var(prem2) * UPoly.var(o1) ** 2 * UPoly.var(der2) ** 2
        - UPoly.var(prem2) * UPoly.var(i1) ** 2 * UPoly.var(der2) ** 2
    )
    assignment = {der2: 1, d1: 1, conc1: 1, prem2: 0, i1: 1, o1: 0}
    assert m1.eval(assignment) == 1


def test_cmp_nat_paper_example():
    s = x("X") + x("Y") + 2
    bigger = s * s + 2 * s + 2
    smaller = x("X") ** 2 + 2 * x("X") + 2
    assert cmp_nat(bigger, smaller, bound=5).holds_gt


def test_cmp_nat_reflexive():
    p = x("X") ** 2 + 1
    r = cmp_nat(p, p, bound=3)
    assert r.holds_ge and not r.holds_gt


def test_cmp_nat_counterexample():
    r = cmp_nat(x("X"), x("X") ** 2, bound=3)
    assert r.status == "fails"
    assert r.witness == {"X": 2}


def test_upoly_ring_laws_randomized():
    rng = random.Random(7)
    pool = UnknownPool()
    unknowns = [pool.fresh(f"u{i}") for i in range(4)]
    for _ in range(300):
        a = random_upoly(rng, unknowns)
        b = random_upoly(rng, unknowns)
        c = random_upoly(rng, unknowns)
        assert a + b == b + a
        assert a * b == b * a
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c


def test_vpoly_ring_laws_randomized():
    rng = random.Random(11)
    for _ in range(300):
        a = random_vpoly(rng)
        b = random_vpoly(rng)
        c = random_vpoly(rng)
        assert a + b == b + a
        assert a * b == b * a
        assert (a + b) + c == a + (b + c)
        assert a * (b + c) == a * b + a * c


def test_weak_monotonicity():
    # concrete interpretations with natural coefficients are weakly monotonic
    rng = random.Random(13)
    for _ in range(200):
        p = random_vpoly(rng, nonnegative=True)
        names = sorted(p.variables())
        hi = {v: rng.randint(0, 6) for v in names}
        lo = {v: rng.randint(0, hi[v]) for v in names}
        assert p.eval({}, hi) >= p.eval({}, lo)


def test_cmp_transitivity_smoke():
    rng = random.Random(17)
    for _ in range(100):
        p1 = random_vpoly(rng, nonnegative=True)
        p2 = random_vpoly(rng, nonnegative=True)
        p3 = random_vpoly(rng, nonnegative=True)
        names = sorted(p1.variables() | p2.variables() | p3.variables())
        v = {n: rng.randint(0, 4) for n in names}
        a, b, c = (q.eval({}, v) for q in (p1, p2, p3))
        if a >= b and b > c:
            assert a > c


def test_substitution_lemma_randomized():
    # |t sigma|_I equals |t|_I with each variable replaced by |X sigma|_I
    rng = random.Random(19)
    functions = {"f": 2, "g": 1, "a": 0, "b": 0}
    pool = UnknownPool()
    templates = {
        f: mint_template(pool, f, SIMPLE_MIXED if k == 1 else LINEAR, k)
        for f, k in functions.items()
    }
    assignment = {u: rng.randint(0, 2) for u in pool.unknowns}
    interp = {f: concretize_template(t, assignment) for f, t in templates.items()}

    from gen import random_term
    from polyterm.terms import Compound, Var

    def substitute(t, sigma):
        if isinstance(t, Var):
            return sigma.get(t.name, t)
        return Compound(t.functor, tuple(substitute(a, sigma) for a in t.args))

    for _ in range(200):
        t = random_term(rng, functions, size=5)
        sigma = {
            v: random_term(rng, functions, size=3, var_p=0.2) for v in ("X", "Y", "Z", "W")
        }
        lhs = level_map(substitute(t, sigma), interp)
        mapping = {v: level_map(sigma[v], interp) for v in sigma}
        rhs = level_map(t, interp).substitute(mapping)
        assert lhs == rhs


def test_pretty_printer_deterministic():
    p = x("X") ** 2 + 2 * x("X") * x("Y") + 3
    assert str(p) == "X^2 + 2*X*Y + 3"
    pool = UnknownPool()
    a, b = pool.fresh("a"), pool.fresh("b")
    q = UPoly.var(a) * UPoly.var(b) - 2 * UPoly.var(b) ** 2
    assert str(q) == "-2*b^2 + a*b"
