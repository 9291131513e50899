"""Proof orchestration: strategy ladder, witness verification, reporting.

The prover first searches for an all-linear interpretation; if that fails it
keeps predicates linear but maps function symbols to simple-mixed
polynomials. Any satisfying assignment is turned into a concrete witness and
re-verified against the original termination conditions (rigidity checked
exactly, implications checked over a finite grid of valuations) before YES
is ever reported. A failed search proves nothing, so it surfaces as MAYBE.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from itertools import product as iproduct

from .callgraph import CallGraph, build_call_graph
from .callset import CallPattern, approximate_call_set, critical_paths, pattern_to_type_graph
from .congen import (
    DECREASE,
    SystemBundle,
    assemble_system,
    gen_decrease,
    gen_interargument,
)
from .diosolver import SAT, TIMEOUT, UNSAT, solve
from .poly import LINEAR, SIMPLE_MIXED, UPoly, VPoly, concretize_template, formal
from .terms import Program, QuerySpec

YES = "YES"
MAYBE = "MAYBE"
TIMED_OUT = "TIMEOUT"


@dataclass
class ProverConfig:
    coeff_max: int = 2
    timeout: float = 60.0
    verify_bound: int = 5
    shape: str = "auto"  # auto | linear | simple-mixed
    linear_share: float = 0.25  # fraction of the budget for the linear stage


@dataclass
class Witness:
    interpretation: dict[str, VPoly]            # symbol -> concrete polynomial
    interargs: dict[str, tuple[VPoly, VPoly]]   # predicate -> concrete (i_p, o_p)
    premconc: list[tuple[VPoly | None, VPoly]]  # per condition, concrete prem/conc
    shape: str
    assignment: dict


@dataclass
class StageResult:
    shape: str
    outcome: str  # sat | unsat | timeout
    seconds: float
    nodes: int = 0


@dataclass
class Verdict:
    status: str  # YES | MAYBE | TIMEOUT
    witness: Witness | None = None
    reason: str | None = None
    stages: list[StageResult] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    patterns: list[CallPattern] = field(default_factory=list)


@dataclass
class VerifyResult:
    ok: bool
    failures: list[str] = field(default_factory=list)


def concretize(bundle: SystemBundle, assignment) -> Witness:
    interpretation = {
        s: concretize_template(t, assignment) for s, t in bundle.interpretation.items()
    }
    interargs = {
        p: (
            concretize_template(t.inp, assignment),
            concretize_template(t.out, assignment),
        )
        for p, t in bundle.interarg.items()
    }
    premconc = [
        (
            concretize_template(prem, assignment) if prem is not None else None,
            concretize_template(conc, assignment),
        )
        for prem, conc in bundle.premconc
    ]
    for _, conc in premconc:
        nonconst = sum(
            c.constant_value() for m, c in conc.terms.items() if m != ()
        )
        assert nonconst >= 1, "conc degenerated to a constant"
    return Witness(interpretation, interargs, premconc, bundle.shape, dict(assignment))


def _concrete_rigidity_factor(poly: VPoly, argpos: int) -> int:
    f = formal(argpos)
    return sum(
        c.constant_value()
        for m, c in poly.terms.items()
        if any(v == f and e > 0 for v, e in m)
    )


def verify_witness(
    program: Program,
    queries: QuerySpec,
    witness: Witness,
    bound: int = 5,
    patterns: list[CallPattern] | None = None,
    callgraph: CallGraph | None = None,
) -> VerifyResult:
    """Re-check the original termination conditions under a concrete witness.

    Rigidity products are equalities over integers and are checked exactly.
    Interargument and decrease implications are universally quantified over
    the naturals; they are checked over all valuations of the clause
    variables in {0..bound}, which detects transformation bugs but is not by
    itself a proof for all of the naturals.
    """
    failures: list[str] = []
    callgraph = callgraph or build_call_graph(program)
    if patterns is None:
        patterns = approximate_call_set(program, queries)

    for pattern in patterns:
        graph = pattern_to_type_graph(pattern, program, queries.grammars)
        for k, path in enumerate(critical_paths(graph)):
            product = 1
            for arc in path.steps:
                label = graph.label[arc.src]
                if arc.pos is None or label not in witness.interpretation:
                    continue
                product *= _concrete_rigidity_factor(
                    witness.interpretation[label], arc.pos
                )
            if product != 0:
                failures.append(
                    f"rigidity violated on {pattern.predicate} critical path {k}: "
                    f"product {product} != 0"
                )

    conditions = gen_interargument(program, witness.interpretation, witness.interargs)
    conditions += gen_decrease(
        program, callgraph, witness.interpretation, witness.interargs
    )
    for cond in conditions:
        failure = _check_implication(cond, bound)
        if failure is not None:
            failures.append(failure)
    return VerifyResult(not failures, failures)


def _check_implication(cond, bound: int) -> str | None:
    polys = [p for pair in cond.premises for p in pair] + list(cond.conclusion)
    names = sorted({v for p in polys for v in p.variables()})
    no_unknowns: dict = {}
    for values in iproduct(range(bound + 1), repeat=len(names)):
        valuation = dict(zip(names, values))
        if all(
            p.eval(no_unknowns, valuation) >= q.eval(no_unknowns, valuation)
            for p, q in cond.premises
        ):
            lhs, rhs = cond.conclusion
            if lhs.eval(no_unknowns, valuation) < rhs.eval(no_unknowns, valuation):
                return f"{cond.describe()} fails at {valuation}"
    return None


def prove(program: Program, queries: QuerySpec, config: ProverConfig | None = None) -> Verdict:
    config = config or ProverConfig()
    timings: dict[str, float] = {}
    stages_log: list[StageResult] = []

    t0 = time.monotonic()
    callgraph = build_call_graph(program)
    patterns = approximate_call_set(program, queries)
    timings["callset"] = time.monotonic() - t0

    if config.shape == "auto":
        stages = [
            (LINEAR, config.timeout * config.linear_share),
            (SIMPLE_MIXED, config.timeout * (1.0 - config.linear_share)),
        ]
    else:
        stages = [(config.shape, config.timeout)]

    last_timed_out = False
    for shape, budget in stages:
        t0 = time.monotonic()
        bundle = assemble_system(
            program,
            patterns,
            shape,
            coeff_max=config.coeff_max,
            grammars=queries.grammars,
            callgraph=callgraph,
        )
        outcome = solve(bundle.system, budget)
        timings[shape] = time.monotonic() - t0
        stages_log.append(StageResult(shape, outcome.status, timings[shape], outcome.nodes))
        last_timed_out = outcome.status == TIMEOUT
        if outcome.status != SAT:
            continue
        witness = concretize(bundle, outcome.assignment)
        t0 = time.monotonic()
        result = verify_witness(
            program, queries, witness, config.verify_bound, patterns, callgraph
        )
        timings["verify"] = time.monotonic() - t0
        if result.ok:
            return Verdict(YES, witness, None, stages_log, timings, patterns)
        return Verdict(
            MAYBE,
            None,
            "witness failed verification: " + "; ".join(result.failures[:3]),
            stages_log,
            timings,
            patterns,
        )

    tried = ", ".join(f"{s.shape}: {s.outcome}" for s in stages_log)
    if last_timed_out:
        return Verdict(TIMED_OUT, None, f"search exhausted its budget ({tried})",
                       stages_log, timings, patterns)
    return Verdict(MAYBE, None, f"no interpretation found ({tried})",
                   stages_log, timings, patterns)


def pretty_poly(p: VPoly) -> str:
    """Render with the formal arguments shown as X1..Xn."""
    return re.sub(r"\$(\d+)", r"X\1", str(p))


def report(verdict: Verdict, program: Program, fmt: str = "text") -> str:
    """First line is exactly YES, MAYBE, or TIMEOUT; details follow."""
    if fmt == "structured":
        return json.dumps(_structured(verdict), indent=2)
    lines = [verdict.status]
    if verdict.reason:
        lines.append(f"reason: {verdict.reason}")
    if verdict.witness is not None:
        w = verdict.witness
        lines.append(f"shape: {w.shape}")
        lines.append("interpretation:")
        for sym, poly in w.interpretation.items():
            lines.append(f"  I({sym}) = {pretty_poly(poly)}")
        lines.append("interargument relations:")
        for pred, (inp, out) in w.interargs.items():
            lines.append(f"  R_{pred}: {pretty_poly(inp)} >= {pretty_poly(out)}")
    if verdict.patterns:
        lines.append("call patterns: " + ", ".join(map(repr, verdict.patterns)))
    if verdict.stages:
        lines.append(
            "stages: "
            + "; ".join(f"{s.shape} {s.outcome} in {s.seconds:.2f}s" for s in verdict.stages)
        )
    if verdict.timings:
        lines.append(
            "timings: "
            + "; ".join(f"{k} {v:.2f}s" for k, v in verdict.timings.items())
        )
    return "\n".join(lines) + "\n"


def _structured(verdict: Verdict) -> dict:
    out = {
        "verdict": verdict.status,
        "reason": verdict.reason,
        "shape": verdict.witness.shape if verdict.witness else None,
        "interpretation": None,
        "interargument": None,
        "call_patterns": [repr(p) for p in verdict.patterns],
        "stages": [
            {"shape": s.shape, "outcome": s.outcome, "seconds": s.seconds}
            for s in verdict.stages
        ],
        "timings": verdict.timings,
    }
    if verdict.witness is not None:
        w = verdict.witness
        out["interpretation"] = {
            sym: pretty_poly(poly) for sym, poly in w.interpretation.items()
        }
        out["interargument"] = {
            pred: {"in": pretty_poly(i), "out": pretty_poly(o)}
            for pred, (i, o) in w.interargs.items()
        }
    return out
