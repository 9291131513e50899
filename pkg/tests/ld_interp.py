"""Depth-bounded LD-resolution interpreter: the concrete test oracle.

Performs SLD resolution with the leftmost selection rule and clause order
as written, logging every selected atom. A step budget bounds the search so
the oracle itself always terminates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from polyterm.terms import Atom, Compound, Program, Var


def walk(t, subst):
    while isinstance(t, Var) and t.name in subst:
        t = subst[t.name]
    return t


def unify(a, b, subst):
    """Extend subst so that a and b become equal, or return None."""
    a = walk(a, subst)
    b = walk(b, subst)
    if isinstance(a, Var):
        if isinstance(b, Var) and b.name == a.name:
            return subst
        new = dict(subst)
        new[a.name] = b
        return new
    if isinstance(b, Var):
        new = dict(subst)
        new[b.name] = a
        return new
    if a.functor != b.functor or len(a.args) != len(b.args):
        return None
    for x, y in zip(a.args, b.args):
        subst = unify(x, y, subst)
        if subst is None:
            return None
    return subst


def resolve_term(t, subst):
    t = walk(t, subst)
    if isinstance(t, Var):
        return t
    return Compound(t.functor, tuple(resolve_term(a, subst) for a in t.args))


def resolve_atom(a: Atom, subst) -> Atom:
    return Atom(a.predicate, tuple(resolve_term(t, subst) for t in a.args))


def _rename_term(t, suffix: str):
    if isinstance(t, Var):
        return Var(t.name + suffix)
    return Compound(t.functor, tuple(_rename_term(a, suffix) for a in t.args))


def _rename_clause(c, suffix: str):
    head = Atom(c.head.predicate, tuple(_rename_term(t, suffix) for t in c.head.args))
    body = tuple(
        Atom(b.predicate, tuple(_rename_term(t, suffix) for t in b.args)) for b in c.body
    )
    return head, body


@dataclass
class RunResult:
    completed: bool            # the whole LD-tree fit within the step budget
    steps: int
    selected: list[Atom] = field(default_factory=list)
    answers: int = 0


def run_query(program: Program, query: Atom, max_steps: int = 10000) -> RunResult:
    """Explore the LD-tree of the query depth-first, logging selected atoms."""
    result = RunResult(True, 0)
    counter = [0]

    def search(goals, subst) -> bool:
        """Returns False when the step budget is exhausted."""
        if not goals:
            result.answers += 1
            return True
        if result.steps >= max_steps:
            result.completed = False
            return False
        selected, rest = goals[0], goals[1:]
        result.selected.append(resolve_atom(selected, subst))
        for clause in program.clauses:
            if clause.head.predicate != selected.predicate:
                continue
            result.steps += 1
            if result.steps >= max_steps:
                result.completed = False
                return False
            counter[0] += 1
            head, body = _rename_clause(clause, f"#{counter[0]}")
            new_subst = subst
            ok = True
            for t, h in zip(selected.args, head.args):
                new_subst = unify(t, h, new_subst)
                if new_subst is None:
                    ok = False
                    break
            if len(selected.args) != len(head.args):
                ok = False
            if not ok:
                continue
            if not search(body + rest, new_subst):
                return False
        return True

    search((query,), {})
    return result


def is_ground(t) -> bool:
    if isinstance(t, Var):
        return False
    return all(is_ground(a) for a in t.args)
