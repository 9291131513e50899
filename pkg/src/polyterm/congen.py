"""Generation of termination conditions and their compilation to
Diophantine constraints.

Three condition families are generated symbolically: rigidity of the call
set (equalities over products of template coefficients, one per critical
path), validity of interargument relations (one implication per clause),
and head-over-recursive-body decrease (one implication per recursive clause
and recursive body atom). Implications are then removed by combining the
premises with a fresh `prem` polynomial and wrapping the conclusion with a
fresh non-constant `conc` polynomial; finally the universally quantified
program variables disappear by requiring every coefficient of the resulting
polynomial to be non-negative.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

from .callgraph import CallGraph, build_call_graph
from .callset import CallPattern, CriticalPath, critical_paths, pattern_to_type_graph
from .poly import (
    LINEAR,
    SIMPLE_MIXED,
    PolyTemplate,
    Unknown,
    UnknownPool,
    UPoly,
    VPoly,
    compose,
    level_map,
    mint_template,
)
from .terms import Atom, Clause, Program

GEQ0 = "GEQ0"
EQ0 = "EQ0"
GT0 = "GT0"


@dataclass(frozen=True)
class DioConstraint:
    poly: UPoly
    relation: str  # GEQ0 | EQ0 | GT0
    provenance: str = ""

    def holds(self, assignment) -> bool:
        v = self.poly.eval(assignment)
        if self.relation == GEQ0:
            return v >= 0
        if self.relation == EQ0:
            return v == 0
        return v > 0

    def __repr__(self) -> str:
        op = {GEQ0: ">= 0", EQ0: "= 0", GT0: "> 0"}[self.relation]
        return f"{self.poly} {op}"


@dataclass
class ClusterHint:
    """Unknowns private to one implication, plus falsification probes.

    A probe is an instance of the implication at one concrete valuation of
    its program variables: `premises` holds the polynomials p_i - q_i and
    `conclusion` the polynomial p - q, all over the shared (non-private)
    unknowns. If all premise differences are certainly non-negative while
    the conclusion difference is certainly negative, the implication is
    falsified at that valuation and no choice of the private prem/conc
    unknowns can ever repair it.
    """

    unknowns: set[Unknown]
    probes: list[tuple[tuple[UPoly, ...], UPoly]] = field(default_factory=list)


@dataclass
class DioSystem:
    constraints: list[DioConstraint]
    domains: dict[Unknown, int]  # unknown -> inclusive upper bound; lower is 0
    # solver hints; both are advisory and sound to ignore
    clusters: list[ClusterHint] = field(default_factory=list)
    blocks: list[set[Unknown]] = field(default_factory=list)

    def validate(self) -> None:
        registered = set(self.domains)
        for c in self.constraints:
            missing = c.poly.unknowns() - registered
            assert not missing, f"unregistered unknowns {missing} in {c!r}"
        seen: set[Unknown] = set()
        for hint in self.clusters:
            assert hint.unknowns <= registered and not hint.unknowns & seen
            seen |= hint.unknowns


INTERARGUMENT = "interargument"
DECREASE = "decrease"


@dataclass
class CondConstraint:
    """`premises => conclusion`, each side a pair (lhs, rhs) meaning lhs >= rhs."""

    premises: list[tuple[VPoly, VPoly]]
    conclusion: tuple[VPoly, VPoly]
    kind: str  # INTERARGUMENT | DECREASE
    clause_index: int
    body_index: int | None = None  # 1-based, for decrease conditions
    predicate: str | None = None   # head predicate, for interargument conditions

    def describe(self) -> str:
        if self.kind == INTERARGUMENT:
            return f"interargument({self.predicate},clause {self.clause_index})"
        return f"decrease(clause {self.clause_index},atom {self.body_index})"


@dataclass(frozen=True)
class InterargTemplate:
    """Symbolic relation i_p(|t1|..|tn|) >= o_p(|t1|..|tn|) for a predicate."""

    predicate: str
    inp: PolyTemplate
    out: PolyTemplate


def gen_rigidity(
    patterns: Iterable[CallPattern],
    interpretation: dict[str, PolyTemplate],
    program: Program,
    grammars: dict[str, list] | None = None,
) -> list[DioConstraint]:
    """One equality per critical path: the product, over symbol-labelled
    arcs, of the sums of coefficients whose monomial involves the arc's
    argument position must vanish."""
    out: list[DioConstraint] = []
    for pattern in patterns:
        graph = pattern_to_type_graph(pattern, program, grammars)
        for k, path in enumerate(critical_paths(graph)):
            product = UPoly.const(1)
            for arc in path.steps:
                label = graph.label[arc.src]
                template = interpretation.get(label)
                if template is None or arc.pos is None:
                    continue  # OR nodes contribute no factor
                total = UPoly.zero()
                for u in template.coeffs_with_positive_exponent(arc.pos):
                    total = total + UPoly.var(u)
                product = product * total
            out.append(
                DioConstraint(product, EQ0, f"rigidity({pattern.predicate},path {k})")
            )
    return out


def _relation_sides(
    atom: Atom,
    relations: dict[str, tuple[VPoly, VPoly]],
    interpretation: dict[str, VPoly],
) -> tuple[VPoly, VPoly]:
    levels = [level_map(t, interpretation) for t in atom.args]
    inp, out = relations[atom.predicate]
    return compose(inp, levels), compose(out, levels)


def gen_interargument(
    program: Program,
    interpretation: dict[str, VPoly],
    relations: dict[str, tuple[VPoly, VPoly]],
) -> list[CondConstraint]:
    """Per clause: body relations imply the head relation (T_P-closure)."""
    out = []
    for idx, clause in enumerate(program.clauses):
        premises = [
            _relation_sides(b, relations, interpretation) for b in clause.body
        ]
        conclusion = _relation_sides(clause.head, relations, interpretation)
        out.append(
            CondConstraint(
                premises,
                conclusion,
                INTERARGUMENT,
                idx,
                predicate=clause.head.predicate,
            )
        )
    return out


def gen_decrease(
    program: Program,
    callgraph: CallGraph,
    interpretation: dict[str, VPoly],
    relations: dict[str, tuple[VPoly, VPoly]],
) -> list[CondConstraint]:
    """Per recursive clause and recursive body atom i: the relations of the
    atoms before i imply head level >= atom level + 1."""
    out = []
    for idx, clause in enumerate(program.clauses):
        for i in callgraph.recursive_body_atoms[idx]:
            premises = [
                _relation_sides(b, relations, interpretation)
                for b in clause.body[: i - 1]
            ]
            head_level = level_map(clause.head, interpretation)
            body_level = level_map(clause.body[i - 1], interpretation)
            out.append(
                CondConstraint(
                    premises,
                    (head_level, body_level + VPoly.const(1)),
                    DECREASE,
                    idx,
                    body_index=i,
                )
            )
    return out


def remove_implication(
    cond: CondConstraint,
    prem: PolyTemplate | None,
    conc: PolyTemplate,
) -> tuple[VPoly, list[DioConstraint]]:
    """Rewrite an implication as a single polynomial to be constrained
    non-negative pointwise, plus the side constraint that conc is not a
    constant (sum of its non-constant coefficients >= 1)."""
    n = len(cond.premises)
    lhs, rhs = cond.conclusion
    result = compose(conc.poly, [lhs]) - compose(conc.poly, [rhs])
    if n > 0:
        assert prem is not None and prem.arity == n
        ps = [p for p, _ in cond.premises]
        qs = [q for _, q in cond.premises]
        result = result - compose(prem.poly, ps) + compose(prem.poly, qs)
    total = UPoly.zero()
    for u in conc.nonconstant_coeffs():
        total = total + UPoly.var(u)
    side = [DioConstraint(total, GT0, f"nonconstant-conc[{cond.describe()}]")]
    return result, side


def extract_diophantine(vpoly: VPoly, provenance: str = "") -> list[DioConstraint]:
    """One non-negativity constraint per program-variable monomial."""
    out = []
    for mono, coeff in vpoly.sorted_terms():
        label = "*".join(v + (f"^{e}" if e > 1 else "") for v, e in mono) or "1"
        out.append(DioConstraint(coeff, GEQ0, f"{provenance}[{label}]"))
    if not vpoly.terms:
        out.append(DioConstraint(UPoly.zero(), GEQ0, f"{provenance}[0]"))
    return out


def _probe_instances(
    cond: CondConstraint, bound: int = 3, max_instances: int = 64
) -> list[tuple[tuple[UPoly, ...], UPoly]]:
    """Ground instances of an implication for the solver's falsification
    probes, taken at the corners {0,bound}^k of the valuation space plus a
    small low-value grid. Duplicates are dropped.

    Premise-free conditions generate no probes: their falsification is
    already subsumed by interval propagation over the extracted coefficient
    constraints (the certain bound of a weighted coefficient sum can only be
    negative when some individual coefficient bound already is)."""
    from itertools import product as iproduct

    if not cond.premises:
        return []
    polys = [p for pair in cond.premises for p in pair] + list(cond.conclusion)
    names = sorted({v for p in polys for v in p.variables()})
    points: list[tuple[int, ...]] = []
    if 2 ** len(names) <= max_instances:
        points.extend(iproduct((0, bound), repeat=len(names)))
    if 3 ** len(names) <= min(max_instances, 32):
        points.extend(iproduct((0, 1, 2), repeat=len(names)))
    probes = []
    seen = set()
    for values in points:
        valuation = dict(zip(names, values))
        prem_diffs = tuple(
            (p - q).instantiate(valuation) for p, q in cond.premises
        )
        lhs, rhs = cond.conclusion
        probe = (prem_diffs, (lhs - rhs).instantiate(valuation))
        key = (prem_diffs, probe[1])
        if key not in seen:
            seen.add(key)
            probes.append(probe)
    return probes


@dataclass
class SystemBundle:
    """A generated constraint system plus the symbolic objects behind it,
    kept for witness construction and reporting."""

    system: DioSystem
    pool: UnknownPool
    shape: str
    interpretation: dict[str, PolyTemplate]
    interarg: dict[str, InterargTemplate]
    conditions: list[CondConstraint]
    premconc: list[tuple[PolyTemplate | None, PolyTemplate]]
    transformed: list[VPoly] = field(default_factory=list)
    rigidity: list[DioConstraint] = field(default_factory=list)


def mint_interpretation(
    pool: UnknownPool, program: Program, function_shape: str
) -> dict[str, PolyTemplate]:
    """Templates for every symbol: predicates are always linear, function
    symbols follow the requested shape."""
    interpretation: dict[str, PolyTemplate] = {}
    for f, arity in program.functions.items():
        interpretation[f] = mint_template(pool, _safe(f), function_shape, arity)
    for p, arity in program.predicates.items():
        interpretation[p] = mint_template(pool, _safe(p), LINEAR, arity)
    return interpretation


_SYMBOL_NAMES = {"+": "plus", "*": "times", ".": "cons", "[]": "nil"}


def _safe(symbol: str) -> str:
    if symbol in _SYMBOL_NAMES:
        return _SYMBOL_NAMES[symbol]
    if re.fullmatch(r"\d+", symbol):
        return f"n{symbol}"
    return symbol


def assemble_system(
    program: Program,
    patterns: list[CallPattern],
    function_shape: str,
    coeff_max: int = 2,
    grammars: dict[str, list] | None = None,
    callgraph: CallGraph | None = None,
) -> SystemBundle:
    """Run the whole generation pipeline and collect the Diophantine system."""
    pool = UnknownPool()
    callgraph = callgraph or build_call_graph(program)
    interpretation = mint_interpretation(pool, program, function_shape)
    interarg = {
        p: InterargTemplate(
            p,
            mint_template(pool, f"{_safe(p)}.i", LINEAR, arity),
            mint_template(pool, f"{_safe(p)}.o", LINEAR, arity),
        )
        for p, arity in program.predicates.items()
    }
    interp_polys = {s: t.poly for s, t in interpretation.items()}
    relations = {p: (t.inp.poly, t.out.poly) for p, t in interarg.items()}

    constraints = list(gen_rigidity(patterns, interpretation, program, grammars))
    rigidity = list(constraints)

    conditions = gen_interargument(program, interp_polys, relations)
    conditions += gen_decrease(program, callgraph, interp_polys, relations)

    # prem mirrors the interpretation shape, conc is always linear
    prem_shape = LINEAR if function_shape == LINEAR else SIMPLE_MIXED
    premconc: list[tuple[PolyTemplate | None, PolyTemplate]] = []
    transformed: list[VPoly] = []
    clusters: list[ClusterHint] = []
    for k, cond in enumerate(conditions):
        n = len(cond.premises)
        prem = mint_template(pool, f"prem{k}", prem_shape, n) if n else None
        conc = mint_template(pool, f"conc{k}", LINEAR, 1)
        premconc.append((prem, conc))
        private = set(conc.coeffs) | (set(prem.coeffs) if prem else set())
        clusters.append(ClusterHint(private, _probe_instances(cond)))
        vpoly, side = remove_implication(cond, prem, conc)
        constraints.extend(side)
        if n == 0:
            # conc(p) - conc(q) is conc_1 * (p - q); with conc_1 >= 1 the
            # coefficient conditions on p - q are equivalent and propagate
            # without the conc_1 interval slack
            lhs, rhs = cond.conclusion
            vpoly = lhs - rhs
        transformed.append(vpoly)
        constraints.extend(extract_diophantine(vpoly, cond.describe()))

    blocks = [set(t.coeffs) for t in interpretation.values()]
    blocks += [set(t.inp.coeffs) | set(t.out.coeffs) for t in interarg.values()]
    system = DioSystem(
        constraints, {u: coeff_max for u in pool.unknowns}, clusters, blocks
    )
    system.validate()
    assert all(c.provenance for c in constraints)
    return SystemBundle(
        system,
        pool,
        function_shape,
        interpretation,
        interarg,
        conditions,
        premconc,
        transformed,
        rigidity,
    )


# -- line-oriented debug dump and its reader --------------------------------

def dump_system(system: DioSystem) -> str:
    """One declaration or constraint per line, canonically printed."""
    lines = []
    for u in sorted(system.domains, key=lambda u: u.index):
        lines.append(f"unknown {u.name} 0 {system.domains[u]}")
    for c in system.constraints:
        lines.append(f"{c.relation} {c.poly} ; {c.provenance}")
    return "\n".join(lines) + "\n"


_MONO_RE = re.compile(r"([A-Za-z0-9_.\[\]]+)(?:\^(\d+))?$")


def parse_system(text: str) -> DioSystem:
    """Read a dump back; used by solver-only fuzz tests."""
    domains: dict[Unknown, int] = {}
    by_name: dict[str, Unknown] = {}
    constraints: list[DioConstraint] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("unknown "):
            _, name, lo, hi = line.split()
            u = Unknown(len(by_name), name)
            by_name[name] = u
            domains[u] = int(hi)
            continue
        rel, _, rest = line.partition(" ")
        body, _, provenance = rest.partition(";")
        poly = _parse_upoly(body.strip(), by_name)
        constraints.append(DioConstraint(poly, rel, provenance.strip()))
    return DioSystem(constraints, domains)


def _parse_upoly(text: str, by_name: dict[str, Unknown]) -> UPoly:
    if text == "0":
        return UPoly.zero()
    text = text.replace("- ", "+ -").replace("+ ", "+")
    total = UPoly.zero()
    for chunk in text.split("+"):
        chunk = chunk.strip()
        if not chunk:
            continue
        sign = 1
        if chunk.startswith("-"):
            sign = -1
            chunk = chunk[1:]
        coeff = sign
        mono = UPoly.const(1)
        for factor in chunk.split("*"):
            if re.fullmatch(r"\d+", factor):
                coeff *= int(factor)
                continue
            m = _MONO_RE.match(factor)
            name, exp = m.group(1), int(m.group(2) or 1)
            mono = mono * UPoly.var(by_name[name]) ** exp
        total = total + coeff * mono
    return total
