"""Termination prover for definite logic programs based on polynomial
interpretations and polynomial interargument relations."""

from .callgraph import CallGraph, build_call_graph
from .callset import (
    CallPattern,
    CriticalPath,
    RigidTypeGraph,
    approximate_call_set,
    critical_paths,
    pattern_to_type_graph,
)
from .congen import (
    CondConstraint,
    DioConstraint,
    DioSystem,
    InterargTemplate,
    SystemBundle,
    assemble_system,
    dump_system,
    extract_diophantine,
    gen_decrease,
    gen_interargument,
    gen_rigidity,
    parse_system,
    remove_implication,
)
from .diosolver import SolveOutcome, check, enumerate_all, solve
from .driver import (
    ProverConfig,
    Verdict,
    Witness,
    prove,
    report,
    verify_witness,
)
from .parser import ParseError, UnsupportedConstructError, parse_program, parse_query_spec
from .poly import (
    CmpResult,
    Interpretation,
    PolyTemplate,
    Unknown,
    UnknownPool,
    UPoly,
    VPoly,
    cmp_nat,
    compose,
    level_map,
    mint_template,
)
from .terms import Atom, Clause, Compound, Program, QueryPattern, QuerySpec, Term, Var

__version__ = "0.1.0"
