"""Finite approximation of the call set and its rigid type graphs.

The call set of a program and query class is over-approximated by a fixpoint
of abstract left-to-right clause traversal over the two-point lattice
Ground < AnyTerm, refined by user-declared regular type grammars. Each
reachable predicate ends up with one call pattern; patterns materialize as
rigid type graphs whose root-to-MAX paths (critical paths) drive the
rigidity constraints.

Precision is deliberately modest: any structure not captured by a declared
grammar widens to AnyTerm. Losing precision can only make the prover answer
MAYBE, never YES unsoundly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .terms import (
    GROUND_TYPE,
    MODE_ANY,
    MODE_GROUND,
    MODE_TYPE,
    Atom,
    Compound,
    Program,
    QueryPattern,
    QuerySpec,
    Var,
    clause_vars,
)

ANY = "any"
GROUND = "ground"
TYPE = "type"


@dataclass(frozen=True)
class AbsVal:
    """Abstract description of one argument position."""

    kind: str  # ANY | GROUND | TYPE
    grammar: str | None = None

    def is_ground(self) -> bool:
        return self.kind in (GROUND, TYPE)

    def __repr__(self) -> str:
        if self.kind == TYPE:
            return f"T({self.grammar})"
        return "G" if self.kind == GROUND else "A"


ANY_VAL = AbsVal(ANY)
GROUND_VAL = AbsVal(GROUND)


def join(a: AbsVal, b: AbsVal) -> AbsVal:
    if a == b:
        return a
    if a.kind == ANY or b.kind == ANY:
        return ANY_VAL
    return GROUND_VAL  # ground vs type, or two distinct types


def meet(a: AbsVal, b: AbsVal) -> AbsVal:
    """Keep the more precise of two constraints on the same variable.

    For two distinct grammar types the first one is kept; any value whose
    denotation contains the intersection would be sound here.
    """
    if a == b or b.kind == ANY:
        return a
    if a.kind == ANY:
        return b
    if a.kind == TYPE:
        return a
    return b


@dataclass(frozen=True)
class CallPattern:
    predicate: str
    args: tuple[AbsVal, ...]

    def __repr__(self) -> str:
        return f"{self.predicate}({','.join(map(repr, self.args))})"


def _mode_to_val(mode) -> AbsVal:
    if mode.kind == MODE_GROUND:
        return GROUND_VAL
    if mode.kind == MODE_ANY:
        return ANY_VAL
    if mode.grammar == GROUND_TYPE:
        return GROUND_VAL
    return AbsVal(TYPE, mode.grammar)


class _Analysis:
    def __init__(self, program: Program, grammars: dict[str, list]) -> None:
        self.program = program
        self.grammars = grammars

    # -- membership of an abstract term in a type spec -------------------

    def _member(self, t, spec, bindings) -> bool:
        """True only if every concrete instance of t lies in the spec."""
        if spec[0] == "ref":
            name = spec[1]
            if isinstance(t, Var):
                v = bindings.get(t.name, ANY_VAL)
                if name == GROUND_TYPE:
                    return v.is_ground()
                return v.kind == TYPE and v.grammar == name
            if name == GROUND_TYPE:
                return self._abstract_ground(t, bindings)
            return any(self._member(t, alt, bindings) for alt in self.grammars[name])
        _, f, children = spec
        if isinstance(t, Var) or t.functor != f or len(t.args) != len(children):
            return False
        return all(self._member(a, c, bindings) for a, c in zip(t.args, children))

    def _abstract_ground(self, t, bindings) -> bool:
        if isinstance(t, Var):
            return bindings.get(t.name, ANY_VAL).is_ground()
        return all(self._abstract_ground(a, bindings) for a in t.args)

    # -- abstraction of a term under current bindings --------------------

    def abstract_term(self, t, bindings) -> AbsVal:
        if isinstance(t, Var):
            return bindings.get(t.name, ANY_VAL)
        if not self._abstract_ground(t, bindings):
            return ANY_VAL
        for name in self.grammars:
            if self._member(t, ("ref", name), bindings):
                return AbsVal(TYPE, name)
        return GROUND_VAL

    # -- refinement of bindings by matching a term against a value -------

    def refine(self, t, val: AbsVal, bindings) -> bool:
        """Constrain the variables of t so that t is covered by val.

        Returns False when no instance of t can be covered (the clause
        cannot fire for this pattern).
        """
        if val.kind == ANY:
            return True
        if val.kind == GROUND:
            for v in _vars_of(t):
                bindings[v] = meet(bindings.get(v, ANY_VAL), GROUND_VAL)
            return True
        return self._refine_ref(t, ("ref", val.grammar), bindings)

    def _refine_spec(self, t, spec, bindings) -> bool:
        if spec[0] == "ref":
            return self._refine_ref(t, spec, bindings)
        _, f, children = spec
        if isinstance(t, Var):
            # a bare variable constrained to an anonymous sub-shape: the
            # shape is ground, so the variable is at least ground
            bindings[t.name] = meet(bindings.get(t.name, ANY_VAL), GROUND_VAL)
            return True
        if t.functor != f or len(t.args) != len(children):
            return False
        return all(self._refine_spec(a, c, bindings) for a, c in zip(t.args, children))

    def _refine_ref(self, t, spec, bindings) -> bool:
        name = spec[1]
        if isinstance(t, Var):
            new = GROUND_VAL if name == GROUND_TYPE else AbsVal(TYPE, name)
            bindings[t.name] = meet(bindings.get(t.name, ANY_VAL), new)
            return True
        if name == GROUND_TYPE:
            for v in _vars_of(t):
                bindings[v] = meet(bindings.get(v, ANY_VAL), GROUND_VAL)
            return True
        alts = [
            alt
            for alt in self.grammars[name]
            if alt[1] == t.functor and len(alt[2]) == len(t.args)
        ]
        results = []
        for alt in alts:
            trial = dict(bindings)
            if all(self._refine_spec(a, c, trial) for a, c in zip(t.args, alt[2])):
                results.append(trial)
        if not results:
            return False
        merged = results[0]
        for other in results[1:]:
            for v in set(merged) | set(other):
                merged[v] = join(merged.get(v, ANY_VAL), other.get(v, ANY_VAL))
        bindings.clear()
        bindings.update(merged)
        return True


def _vars_of(t):
    if isinstance(t, Var):
        yield t.name
    else:
        for a in t.args:
            yield from _vars_of(t=a)


def approximate_call_set(program: Program, queries: QuerySpec) -> list[CallPattern]:
    """Fixpoint over call and success patterns, one pattern per predicate."""
    analysis = _Analysis(program, queries.grammars)
    cp: dict[str, tuple[AbsVal, ...]] = {}
    sp: dict[str, tuple[AbsVal, ...]] = {}

    def join_into(store, pred, vals) -> bool:
        old = store.get(pred)
        new = vals if old is None else tuple(join(a, b) for a, b in zip(old, vals))
        if new != old:
            store[pred] = new
            return True
        return False

    for q in queries.patterns:
        join_into(cp, q.predicate, tuple(_mode_to_val(m) for m in q.modes))

    clauses_of: dict[str, list] = {}
    for c in program.clauses:
        clauses_of.setdefault(c.head.predicate, []).append(c)

    changed = True
    while changed:
        changed = False
        for pred in list(cp):
            for clause in clauses_of.get(pred, []):
                bindings: dict[str, AbsVal] = {}
                ok = True
                for t, v in zip(clause.head.args, cp[pred]):
                    if not analysis.refine(t, v, bindings):
                        ok = False
                        break
                if not ok:
                    continue
                blocked = False
                for b in clause.body:
                    call_vals = tuple(analysis.abstract_term(t, bindings) for t in b.args)
                    if join_into(cp, b.predicate, call_vals):
                        changed = True
                    success = sp.get(b.predicate)
                    if success is None:
                        blocked = True
                        break
                    for t, v in zip(b.args, success):
                        if not analysis.refine(t, v, bindings):
                            blocked = True
                            break
                    if blocked:
                        break
                if blocked:
                    continue
                head_vals = tuple(analysis.abstract_term(t, bindings) for t in clause.head.args)
                if join_into(sp, pred, head_vals):
                    changed = True

    return [CallPattern(p, vals) for p, vals in cp.items()]


# -- rigid type graphs ----------------------------------------------------

MAX_LABEL = "#MAX"
OR_LABEL = "#OR"


@dataclass(frozen=True)
class Arc:
    src: int
    dst: int
    pos: int | None  # argument position; None for arcs out of OR nodes


@dataclass
class RigidTypeGraph:
    root: int
    nodes: list[int]
    forarcs: list[Arc]
    backarcs: list[Arc]
    label: dict[int, str]

    def children(self, node: int) -> list[Arc]:
        return [a for a in self.forarcs if a.src == node]

    def validate(self, signature: dict[str, int], predicates: dict[str, int]) -> None:
        """Assert the structural invariants of a rigid type graph."""
        parents: dict[int, int] = {}
        for a in self.forarcs:
            assert a.dst not in parents, "forarcs must form a tree"
            parents[a.dst] = a.src
        for n in self.nodes:
            if n != self.root:
                assert n in parents, f"node {n} unreachable from root"

        def ancestors(n: int):
            while n in parents:
                n = parents[n]
                yield n

        for a in self.backarcs:
            assert a.dst == a.src or a.dst in set(ancestors(a.src)), (
                "backarc target must be an ancestor"
            )
        arity = {**signature, **predicates}
        for n in self.nodes:
            lbl = self.label[n]
            out = [a for a in self.forarcs + self.backarcs if a.src == n]
            if lbl == MAX_LABEL:
                assert not out, "MAX nodes have no outgoing arcs"
            elif lbl == OR_LABEL:
                assert all(a.pos is None for a in out)
            else:
                k = arity[lbl]
                assert sorted(a.pos for a in out) == list(range(1, k + 1)), (
                    f"node {n} ({lbl}) must have arcs labelled 1..{k}"
                )


class _GraphBuilder:
    def __init__(self, program: Program, grammars: dict[str, list]) -> None:
        self.program = program
        self.grammars = grammars
        self.nodes: list[int] = []
        self.forarcs: list[Arc] = []
        self.backarcs: list[Arc] = []
        self.label: dict[int, str] = {}

    def node(self, label: str) -> int:
        n = len(self.nodes)
        self.nodes.append(n)
        self.label[n] = label
        return n

    def build_val(self, val: AbsVal) -> int:
        if val.kind == ANY:
            return self.node(MAX_LABEL)
        if val.kind == GROUND:
            return self.build_ground()
        return self.build_nt(val.grammar, {})

    def build_ground(self) -> int:
        """The canonical `all ground terms over the signature` graph."""
        functions = list(self.program.functions.items())
        if len(functions) == 1:
            f, k = functions[0]
            fn = self.node(f)
            for i in range(1, k + 1):
                self.backarcs.append(Arc(fn, fn, i))
            return fn
        orn = self.node(OR_LABEL)
        for f, k in functions:
            fn = self.node(f)
            self.forarcs.append(Arc(orn, fn, None))
            for i in range(1, k + 1):
                self.backarcs.append(Arc(fn, orn, i))
        return orn

    def build_nt(self, name: str, path: dict[str, int]) -> int:
        if name == GROUND_TYPE:
            return self.build_ground()
        alts = self.grammars[name]
        if len(alts) > 1:
            orn = self.node(OR_LABEL)
            inner = {**path, name: orn}
            for alt in alts:
                child = self.build_app(alt, inner)
                self.forarcs.append(Arc(orn, child, None))
            return orn
        _, f, children = alts[0]
        fn = self.node(f)
        inner = {**path, name: fn}
        self._attach_children(fn, children, inner)
        return fn

    def build_app(self, spec, path: dict[str, int]) -> int:
        _, f, children = spec
        fn = self.node(f)
        self._attach_children(fn, children, path)
        return fn

    def _attach_children(self, fn: int, children, path: dict[str, int]) -> None:
        for i, child in enumerate(children, 1):
            if child[0] == "ref" and child[1] in path:
                self.backarcs.append(Arc(fn, path[child[1]], i))
            elif child[0] == "ref":
                self.forarcs.append(Arc(fn, self.build_nt(child[1], path), i))
            else:
                self.forarcs.append(Arc(fn, self.build_app(child, path), i))


def pattern_to_type_graph(
    pattern: CallPattern, program: Program, grammars: dict[str, list] | None = None
) -> RigidTypeGraph:
    """Materialize a call pattern as a rigid type graph."""
    b = _GraphBuilder(program, grammars or {})
    root = b.node(pattern.predicate)
    for i, val in enumerate(pattern.args, 1):
        b.forarcs.append(Arc(root, b.build_val(val), i))
    # forarcs were appended child-subtree-first; order arcs per node by position
    b.forarcs.sort(key=lambda a: (a.src, a.pos if a.pos is not None else 0, a.dst))
    return RigidTypeGraph(root, b.nodes, b.forarcs, b.backarcs, b.label)


@dataclass(frozen=True)
class CriticalPath:
    """A forarc path from the root to a MAX node."""

    steps: tuple[Arc, ...]

    def __len__(self) -> int:
        return len(self.steps)


def critical_paths(graph: RigidTypeGraph) -> list[CriticalPath]:
    """All root-to-MAX forarc paths, depth-first, arcs ordered by position."""
    paths: list[CriticalPath] = []

    def walk(node: int, prefix: tuple[Arc, ...]) -> None:
        if graph.label[node] == MAX_LABEL:
            paths.append(CriticalPath(prefix))
            return
        for arc in graph.children(node):
            walk(arc.dst, prefix + (arc,))

    walk(graph.root, ())
    return paths


def concrete_member(term, val: AbsVal, grammars: dict[str, list]) -> bool:
    """Does a concrete term lie within an abstract argument description?

    Used by soundness tests: every atom selected in a concrete derivation
    must be covered by its predicate's call pattern.
    """
    if val.kind == ANY:
        return True
    if val.kind == GROUND:
        return _is_ground(term)

    def member(t, spec) -> bool:
        if spec[0] == "ref":
            if spec[1] == GROUND_TYPE:
                return _is_ground(t)
            return any(member(t, alt) for alt in grammars[spec[1]])
        _, f, children = spec
        return (
            isinstance(t, Compound)
            and t.functor == f
            and len(t.args) == len(children)
            and all(member(a, c) for a, c in zip(t.args, children))
        )

    return member(term, ("ref", val.grammar))


def _is_ground(t) -> bool:
    if isinstance(t, Var):
        return False
    return all(_is_ground(a) for a in t.args)
