"""Two-sorted symbolic polynomial algebra.

UPoly: polynomials over unknown coefficients, with integer coefficients
(negative coefficients arise when implications are removed).
VPoly: polynomials over program variables whose coefficients are UPolys.

All arithmetic is exact arbitrary-precision integer arithmetic. Monomials
are kept in a canonical graded-lexicographic order so that generated
constraint systems and printed reports are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct
from typing import Iterable, Mapping, Sequence


@dataclass(frozen=True, order=True)
class Unknown:
    """An unknown coefficient. `index` is the interning order and the identity."""

    index: int
    name: str

    def __repr__(self) -> str:
        return self.name


class UnknownPool:
    """Mints unknowns with globally unique indices (per constraint system)."""

    def __init__(self) -> None:
        self._unknowns: list[Unknown] = []

    def fresh(self, name: str) -> Unknown:
        u = Unknown(len(self._unknowns), name)
        self._unknowns.append(u)
        return u

    @property
    def unknowns(self) -> list[Unknown]:
        return list(self._unknowns)


# A monomial is a tuple of (symbol, exponent) pairs sorted by symbol,
# with all exponents > 0; the empty tuple is the constant monomial.
UMono = tuple  # tuple[tuple[Unknown, int], ...]
VMono = tuple  # tuple[tuple[str, int], ...]


def _mono_mul(a, b):
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for sym, e in b:
        exps[sym] = exps.get(sym, 0) + e
    return tuple(sorted(exps.items()))


def _mono_degree(m) -> int:
    return sum(e for _, e in m)


def _mono_key(m):
    # graded lexicographic: total degree first, then the symbol/exponent tuple
    return (_mono_degree(m), m)


class UPoly:
    """Sparse polynomial in unknowns with integer coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[UMono, int] | None = None) -> None:
        self.terms: dict[UMono, int] = {m: c for m, c in (terms or {}).items() if c != 0}

    @staticmethod
    def const(c: int) -> UPoly:
        return UPoly({(): c} if c else {})

    @staticmethod
    def var(u: Unknown) -> UPoly:
        return UPoly({((u, 1),): 1})

    @staticmethod
    def zero() -> UPoly:
        return UPoly()

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(m == () for m in self.terms)

    def constant_value(self) -> int:
        return self.terms.get((), 0)

    def unknowns(self) -> set[Unknown]:
        return {u for m in self.terms for u, _ in m}

    def _coerce(self, other) -> UPoly:
        if isinstance(other, UPoly):
            return other
        if isinstance(other, int):
            return UPoly.const(other)
        if isinstance(other, Unknown):
            return UPoly.var(other)
        return NotImplemented

    def __add__(self, other) -> UPoly:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0) + c
        return UPoly(terms)

    __radd__ = __add__

    def __neg__(self) -> UPoly:
        return UPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> UPoly:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> UPoly:
        return self._coerce(other) - self

    def __mul__(self, other) -> UPoly:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms: dict[UMono, int] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                terms[m] = terms.get(m, 0) + c1 * c2
        return UPoly(terms)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> UPoly:
        if n < 0:
            raise ValueError("negative exponent")
        result = UPoly.const(1)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = UPoly.const(other)
        if not isinstance(other, UPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def eval(self, assignment: Mapping[Unknown, int]) -> int:
        total = 0
        for m, c in self.terms.items():
            v = c
            for u, e in m:
                v *= assignment[u] ** e
            total += v
        return total

    def sorted_terms(self) -> list[tuple[UMono, int]]:
        return sorted(self.terms.items(), key=lambda t: _mono_key(t[0]), reverse=True)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            factors = [f"{u.name}" + (f"^{e}" if e > 1 else "") for u, e in m]
            if not factors:
                body = str(abs(c))
            else:
                body = "*".join(factors)
                if abs(c) != 1:
                    body = f"{abs(c)}*{body}"
            parts.append(("- " if c < 0 else "+ ") + body)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    __repr__ = __str__


class VPoly:
    """Sparse polynomial in program variables with UPoly coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[VMono, UPoly] | None = None) -> None:
        self.terms: dict[VMono, UPoly] = {
            m: c for m, c in (terms or {}).items() if not c.is_zero()
        }

    @staticmethod
    def const(c) -> VPoly:
        c = c if isinstance(c, UPoly) else UPoly.const(c)
        return VPoly({(): c})

    @staticmethod
    def var(name: str) -> VPoly:
        return VPoly({((name, 1),): UPoly.const(1)})

    @staticmethod
    def zero() -> VPoly:
        return VPoly()

    def is_zero(self) -> bool:
        return not self.terms

    def variables(self) -> set[str]:
        return {v for m in self.terms for v, _ in m}

    def unknowns(self) -> set[Unknown]:
        out: set[Unknown] = set()
        for c in self.terms.values():
            out |= c.unknowns()
        return out

    def coeff(self, mono: VMono) -> UPoly:
        return self.terms.get(mono, UPoly.zero())

    def _coerce(self, other) -> VPoly:
        if isinstance(other, VPoly):
            return other
        if isinstance(other, (int, UPoly)):
            return VPoly.const(other)
        return NotImplemented

    def __add__(self, other) -> VPoly:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, UPoly.zero()) + c
        return VPoly(terms)

    __radd__ = __add__

    def __neg__(self) -> VPoly:
        return VPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> VPoly:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> VPoly:
        return self._coerce(other) - self

    def __mul__(self, other) -> VPoly:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms: dict[VMono, UPoly] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                prod = c1 * c2
                terms[m] = terms.get(m, UPoly.zero()) + prod
        return VPoly(terms)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> VPoly:
        if n < 0:
            raise ValueError("negative exponent")
        result = VPoly.const(1)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = VPoly.const(other)
        if not isinstance(other, VPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset((m, c) for m, c in self.terms.items()))

    def substitute(self, mapping: Mapping[str, VPoly]) -> VPoly:
        """Simultaneously replace every variable by the given polynomial."""
        result = VPoly.zero()
        for m, c in self.terms.items():
            part = VPoly.const(c)
            for v, e in m:
                rep = mapping.get(v)
                part = part * (rep if rep is not None else VPoly.var(v)) ** e
            result = result + part
        return result

    def eval(self, unknowns: Mapping[Unknown, int], valuation: Mapping[str, int]) -> int:
        total = 0
        for m, c in self.terms.items():
            v = c.eval(unknowns)
            for var, e in m:
                v *= valuation[var] ** e
            total += v
        return total

    def instantiate(self, valuation: Mapping[str, int]) -> UPoly:
        """Substitute numbers for the program variables, leaving the unknowns."""
        total = UPoly.zero()
        for m, c in self.terms.items():
            k = 1
            for var, e in m:
                k *= valuation[var] ** e
            total = total + c * k
        return total

    def sorted_terms(self) -> list[tuple[VMono, UPoly]]:
        return sorted(self.terms.items(), key=lambda t: _mono_key(t[0]), reverse=True)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            factors = [v + (f"^{e}" if e > 1 else "") for v, e in m]
            if c.is_constant():
                k = c.constant_value()
                sign = "- " if k < 0 else "+ "
                if not factors:
                    body = str(abs(k))
                elif abs(k) == 1:
                    body = "*".join(factors)
                else:
                    body = f"{abs(k)}*" + "*".join(factors)
            else:
                sign = "+ "
                body = f"({c})" + ("*" + "*".join(factors) if factors else "")
            parts.append(sign + body)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    __repr__ = __str__


def formal(i: int) -> str:
    """The i-th formal argument variable of an interpretation template (1-based)."""
    return f"${i}"


def compose(poly: VPoly, args: Sequence[VPoly]) -> VPoly:
    """Substitute args[i-1] for the formal variable $i and normalize."""
    mapping = {formal(i + 1): arg for i, arg in enumerate(args)}
    for v in poly.variables():
        if v.startswith("$") and v not in mapping:
            raise ValueError(f"missing argument for formal {v}")
    return poly.substitute(mapping)


LINEAR = "linear"
SIMPLE_MIXED = "simple-mixed"


def shape_monomials(shape: str, arity: int) -> list[VMono]:
    """Monomials of a template shape over formals $1..$arity, in minting order.

    Linear: 1, $1, ..., $n. Simple-mixed: all products of distinct formals
    with exponent 0/1 (graded-lex order), then the squares $1^2..$n^2.
    """
    formals = [formal(i) for i in range(1, arity + 1)]
    if shape == LINEAR:
        monos: list[VMono] = [()]
        monos.extend(((f, 1),) for f in formals)
        return monos
    if shape == SIMPLE_MIXED:
        prods: list[VMono] = []
        for bits in iproduct((0, 1), repeat=arity):
            m = tuple((f, 1) for f, b in zip(formals, bits) if b)
            prods.append(m)
        prods.sort(key=_mono_key)
        squares = [((f, 2),) for f in formals]
        return prods + squares
    raise ValueError(f"unknown shape: {shape}")


@dataclass(frozen=True)
class PolyTemplate:
    """A symbolic polynomial of fixed shape whose coefficients are fresh unknowns."""

    shape: str
    arity: int
    monomials: tuple[VMono, ...]
    coeffs: tuple[Unknown, ...]

    @property
    def poly(self) -> VPoly:
        return VPoly({m: UPoly.var(u) for m, u in zip(self.monomials, self.coeffs)})

    def coeff_for(self, mono: VMono) -> Unknown:
        return self.coeffs[self.monomials.index(mono)]

    def nonconstant_coeffs(self) -> list[Unknown]:
        return [u for m, u in zip(self.monomials, self.coeffs) if m != ()]

    def coeffs_with_positive_exponent(self, argpos: int) -> list[Unknown]:
        """Coefficients of monomials in which formal $argpos occurs."""
        f = formal(argpos)
        return [
            u
            for m, u in zip(self.monomials, self.coeffs)
            if any(v == f and e > 0 for v, e in m)
        ]


def mint_template(pool: UnknownPool, base: str, shape: str, arity: int) -> PolyTemplate:
    """Mint a fresh template; coefficient names are `base_0`, `base_1`, ..."""
    monos = shape_monomials(shape, arity)
    coeffs = tuple(pool.fresh(f"{base}_{k}") for k in range(len(monos)))
    return PolyTemplate(shape, arity, tuple(monos), coeffs)


def concretize_template(t: PolyTemplate, assignment: Mapping[Unknown, int]) -> VPoly:
    return VPoly(
        {m: UPoly.const(assignment[u]) for m, u in zip(t.monomials, t.coeffs)}
    )


# An interpretation maps every function and predicate symbol to a polynomial
# over the formal arguments $1..$n: template polynomials while searching for
# coefficients, concrete ones (constant UPoly coefficients) after solving.
Interpretation = Mapping[str, VPoly]


def level_map(term, interpretation: Mapping[str, VPoly]) -> VPoly:
    """Polynomial level mapping of a term or atom.

    Variables map to themselves; a compound f(t1..tn) maps to the symbol's
    polynomial composed with the argument levels. Works both for symbolic
    interpretations (template polys) and concrete ones.
    """
    from .terms import Atom, Compound, Var  # local import to avoid a cycle

    if isinstance(term, Var):
        return VPoly.var(term.name)
    if isinstance(term, (Compound, Atom)):
        sym = term.functor if isinstance(term, Compound) else term.predicate
        try:
            p = interpretation[sym]
        except KeyError:
            raise KeyError(f"symbol {sym!r} is not interpreted") from None
        return compose(p, [level_map(a, interpretation) for a in term.args])
    raise TypeError(f"cannot level-map {term!r}")


HOLDS_GT = "holds_gt"
HOLDS_GE = "holds_ge"


@dataclass(frozen=True)
class CmpResult:
    status: str  # holds_gt | holds_ge | fails
    witness: dict | None = None

    @property
    def holds_ge(self) -> bool:
        return self.status in (HOLDS_GE, HOLDS_GT)

    @property
    def holds_gt(self) -> bool:
        return self.status == HOLDS_GT


def cmp_nat(
    p: VPoly,
    q: VPoly,
    assignment: Mapping[Unknown, int] | None = None,
    bound: int = 5,
) -> CmpResult:
    """Compare two concrete polynomials over all valuations in {0..bound}^n.

    This is a testing semantics for the polynomial orders: it reports the
    first counterexample on failure, it does not decide the orders over all
    of the naturals.
    """
    assignment = assignment or {}
    names = sorted(p.variables() | q.variables())
    strict = True
    for values in iproduct(range(bound + 1), repeat=len(names)):
        valuation = dict(zip(names, values))
        pv = p.eval(assignment, valuation)
        qv = q.eval(assignment, valuation)
        if pv < qv:
            return CmpResult("fails", valuation)
        if pv == qv:
            strict = False
    return CmpResult(HOLDS_GT if strict else HOLDS_GE)
