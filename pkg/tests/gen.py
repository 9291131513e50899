"""Random generators for property tests (seeded, deterministic)."""

from __future__ import annotations

import random

from polyterm.poly import UPoly, Unknown, UnknownPool, VPoly
from polyterm.terms import Atom, Compound, Program, Var

VARS = ["X", "Y", "Z", "W"]


def random_upoly(rng: random.Random, unknowns, max_terms=4, max_degree=2, max_coeff=3):
    p = UPoly.zero()
    for _ in range(rng.randint(1, max_terms)):
        mono = UPoly.const(1)
        for _ in range(rng.randint(0, max_degree)):
            mono = mono * UPoly.var(rng.choice(unknowns))
        p = p + rng.randint(-max_coeff, max_coeff) * mono
    return p


def random_vpoly(rng: random.Random, nvars=3, max_terms=4, max_degree=2, max_coeff=3,
                 nonnegative=False):
    p = VPoly.zero()
    lo = 0 if nonnegative else -max_coeff
    for _ in range(rng.randint(1, max_terms)):
        mono = VPoly.const(1)
        for _ in range(rng.randint(0, max_degree)):
            mono = mono * VPoly.var(rng.choice(VARS[:nvars]))
        p = p + rng.randint(lo, max_coeff) * mono
    return p


def random_ground_term(rng: random.Random, functions: dict[str, int], size: int = 4):
    constants = [f for f, k in functions.items() if k == 0]
    builders = [(f, k) for f, k in functions.items() if k > 0]
    if size <= 1 or not builders:
        return Compound(rng.choice(constants))
    f, k = rng.choice(builders)
    budget = max(1, (size - 1) // k)
    return Compound(f, tuple(random_ground_term(rng, functions, budget) for _ in range(k)))


def random_term(rng: random.Random, functions: dict[str, int], size: int = 4, var_p=0.3):
    if rng.random() < var_p:
        return Var(rng.choice(VARS))
    constants = [f for f, k in functions.items() if k == 0]
    builders = [(f, k) for f, k in functions.items() if k > 0]
    if size <= 1 or not builders:
        if constants:
            return Compound(rng.choice(constants))
        return Var(rng.choice(VARS))
    f, k = rng.choice(builders)
    budget = max(1, (size - 1) // k)
    return Compound(f, tuple(random_term(rng, functions, budget, var_p) for _ in range(k)))


def random_grammar_term(rng: random.Random, grammars, functions, name: str, size: int = 5):
    """A random concrete member of a grammar nonterminal."""
    if name == "GTerm":
        return random_ground_term(rng, functions, size)
    alts = grammars[name]
    small = [a for a in alts if not a[2]]
    alt = rng.choice(small if (size <= 1 and small) else alts)
    _, f, children = alt
    budget = max(1, (size - 1) // max(1, len(children)))
    args = []
    for spec in children:
        args.append(_spec_term(rng, grammars, functions, spec, budget))
    return Compound(f, tuple(args))


def _spec_term(rng, grammars, functions, spec, size):
    if spec[0] == "ref":
        return random_grammar_term(rng, grammars, functions, spec[1], size)
    _, f, children = spec
    budget = max(1, (size - 1) // max(1, len(children)))
    return Compound(
        f, tuple(_spec_term(rng, grammars, functions, c, budget) for c in children)
    )


def random_query(rng: random.Random, program: Program, pattern, grammars, size: int = 5):
    """A concrete atom matching a call pattern's modes."""
    args = []
    fresh = 0
    for mode in pattern.modes:
        if mode.kind == "g":
            args.append(random_ground_term(rng, program.functions, size))
        elif mode.kind == "t":
            args.append(random_grammar_term(rng, grammars, program.functions, mode.grammar, size))
        else:
            fresh += 1
            args.append(Var(f"Q{fresh}"))
    return Atom(pattern.predicate, tuple(args))
