"""Predicate dependency analysis: refers-to edges, SCCs, mutual recursion."""

from __future__ import annotations

from dataclasses import dataclass, field

from .terms import Clause, Program


@dataclass
class CallGraph:
    refers_to: dict[str, set[str]]
    depends_on: dict[str, set[str]]  # transitive closure of refers_to
    sccs: list[frozenset[str]]
    # per clause index: 1-based indices of body atoms mutually recursive
    # with the clause head
    recursive_body_atoms: list[tuple[int, ...]] = field(default_factory=list)

    def mutually_recursive(self, p: str, q: str) -> bool:
        return q in self.depends_on.get(p, ()) and p in self.depends_on.get(q, ())

    def is_recursive_clause(self, clause_index: int) -> bool:
        return bool(self.recursive_body_atoms[clause_index])


def _tarjan(nodes: list[str], edges: dict[str, set[str]]) -> list[frozenset[str]]:
    index: dict[str, int] = {}
    lowlink: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    sccs: list[frozenset[str]] = []
    counter = 0

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(sorted(edges.get(root, ()))))]
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = lowlink[succ] = counter
                    counter += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(sorted(edges.get(succ, ())))))
                    advanced = True
                    break
                if succ in on_stack:
                    lowlink[node] = min(lowlink[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                sccs.append(frozenset(comp))
    return sccs


def build_call_graph(program: Program) -> CallGraph:
    """Compute refers-to edges, their transitive closure, SCCs, and the
    mutually recursive body atoms of every clause."""
    preds = list(program.predicates)
    refers: dict[str, set[str]] = {p: set() for p in preds}
    for c in program.clauses:
        for b in c.body:
            refers[c.head.predicate].add(b.predicate)

    depends: dict[str, set[str]] = {p: set(refers[p]) for p in preds}
    changed = True
    while changed:
        changed = False
        for p in preds:
            new = set()
            for q in depends[p]:
                new |= depends[q]
            if not new <= depends[p]:
                depends[p] |= new
                changed = True

    graph = CallGraph(refers, depends, _tarjan(preds, refers))
    for c in program.clauses:
        h = c.head.predicate
        graph.recursive_body_atoms.append(
            tuple(
                i
                for i, b in enumerate(c.body, 1)
                if graph.mutually_recursive(h, b.predicate)
            )
        )
    return graph
