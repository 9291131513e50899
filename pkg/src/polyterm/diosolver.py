"""Finite-domain solver for systems of non-linear Diophantine constraints.

Depth-first search with interval propagation: every unknown ranges over
{0..max}, so each monomial's sign is the sign of its integer coefficient and
cheap [min,max] bounds of a partially assigned polynomial are available. A
branch is pruned as soon as some constraint's interval excludes all
admissible values; dead ends trigger conflict-directed backjumping.
Values are tried ascending from 0.

Systems generated from conditional termination constraints carry hints that
this solver exploits when present:

* cluster hints mark the prem/conc unknowns private to one implication.
  They are taken out of the main search and solved as memoized subproblems,
  keyed on the (possibly partial) assignment of the unknowns they share
  with the rest of the system. Constraint violation is monotone under
  interval narrowing, so an infeasible relaxed subproblem can prune long
  before its support is fully assigned.
* each cluster also carries falsification probes: ground instances of the
  original implication. When every premise difference is certainly
  non-negative and the conclusion difference certainly negative, no choice
  of the private unknowns can repair the implication and the branch dies
  without ever touching them.
* block hints group the coefficients of one interpretation template; the
  main search keeps blocks contiguous, most-constrained block first, which
  keeps semantically coupled unknowns close together.

Satisfying assignments are always re-verified by exact integer evaluation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import product as iproduct

from .congen import EQ0, GEQ0, GT0, DioConstraint, DioSystem
from .poly import Unknown, UPoly

SAT = "sat"
UNSAT = "unsat"
TIMEOUT = "timeout"


@dataclass
class SolveOutcome:
    status: str  # sat | unsat | timeout
    assignment: dict[Unknown, int] | None = None
    elapsed: float = 0.0
    nodes: int = 0

    @property
    def is_sat(self) -> bool:
        return self.status == SAT


class _Deadline(Exception):
    pass


def check(system: DioSystem, assignment: dict[Unknown, int]) -> bool:
    """Exact re-verification of a total assignment."""
    missing = set(system.domains) - set(assignment)
    if missing:
        raise ValueError(f"partial assignment, missing {sorted(u.name for u in missing)}")
    return all(c.holds(assignment) for c in system.constraints)


def enumerate_all(system: DioSystem, cap: int = 1_000_000) -> list[dict[Unknown, int]]:
    """All satisfying assignments by exhaustive enumeration (test oracle)."""
    unknowns = sorted(system.domains, key=lambda u: u.index)
    size = 1
    for u in unknowns:
        size *= system.domains[u] + 1
        if size > cap:
            raise ValueError(f"domain cube larger than cap {cap}")
    out = []
    for values in iproduct(*(range(system.domains[u] + 1) for u in unknowns)):
        assignment = dict(zip(unknowns, values))
        if all(c.holds(assignment) for c in system.constraints):
            out.append(assignment)
    return out


def _compile_upoly(poly: UPoly, pos: dict[Unknown, int]) -> tuple:
    return tuple(
        (coef, tuple((pos[u], e) for u, e in mono))
        for mono, coef in poly.terms.items()
    )


class _Compiled:
    """Arrays indexed by solver position for the whole system."""

    def __init__(self, system: DioSystem) -> None:
        self.occurrences: dict[Unknown, int] = {u: 0 for u in system.domains}
        for c in system.constraints:
            for u in c.poly.unknowns():
                self.occurrences[u] += 1
        self.unknowns = sorted(
            system.domains, key=lambda u: (-self.occurrences[u], u.index)
        )
        self.pos = {u: i for i, u in enumerate(self.unknowns)}
        self.domains = [list(range(system.domains[u] + 1)) for u in self.unknowns]
        self.relations: list[str] = []
        self.terms: list[tuple] = []  # ((coef, ((pos, exp), ...)), ...) per constraint
        self.vars_of: list[tuple[int, ...]] = []
        self.cons_of: list[list[int]] = [[] for _ in self.unknowns]
        for c in system.constraints:
            terms = _compile_upoly(c.poly, self.pos)
            involved = tuple(sorted({p for _, mono in terms for p, _ in mono}))
            idx = len(self.relations)
            self.relations.append(c.relation)
            self.terms.append(terms)
            self.vars_of.append(involved)
            for p in involved:
                self.cons_of[p].append(idx)
        # fail fast: cheap constraints first
        for p in range(len(self.unknowns)):
            self.cons_of[p].sort(key=lambda ci: (len(self.terms[ci]), ci))

    def bounds(self, terms, value, dlo, dhi) -> tuple[int, int]:
        lo = hi = 0
        for coef, mono in terms:
            mlo = mhi = 1
            for p, e in mono:
                v = value[p]
                if v is None:
                    a = dlo[p]
                    b = dhi[p]
                else:
                    a = b = v
                if e == 1:
                    mlo *= a
                    mhi *= b
                else:
                    mlo *= a**e
                    mhi *= b**e
            if coef >= 0:
                lo += coef * mlo
                hi += coef * mhi
            else:
                lo += coef * mhi
                hi += coef * mlo
        return lo, hi

    def violated(self, ci: int, value, dlo, dhi) -> bool:
        lo, hi = self.bounds(self.terms[ci], value, dlo, dhi)
        rel = self.relations[ci]
        if rel == GEQ0:
            return hi < 0
        if rel == EQ0:
            return lo > 0 or hi < 0
        return hi <= 0


def _reduce_domains(comp: _Compiled, value, dlo, dhi, deadline: float) -> bool:
    """Drop singleton-inconsistent values; False means the system is unsat."""
    n = len(comp.unknowns)
    for ci in range(len(comp.relations)):
        if not comp.vars_of[ci] and comp.violated(ci, value, dlo, dhi):
            return False
    changed = True
    while changed:
        changed = False
        if time.monotonic() > deadline:
            return True  # let the search deal with what is left
        for p in range(n):
            kept = []
            for v in comp.domains[p]:
                value[p] = v
                bad = any(comp.violated(ci, value, dlo, dhi) for ci in comp.cons_of[p])
                value[p] = None
                if not bad:
                    kept.append(v)
            if len(kept) != len(comp.domains[p]):
                if not kept:
                    return False
                comp.domains[p] = kept
                dlo[p] = kept[0]
                dhi[p] = kept[-1]
                changed = True
    return True


class _Cluster:
    """A private block of unknowns plus the constraints that mention them."""

    def __init__(self, positions, constraint_ids, support):
        self.positions = positions
        self.constraint_ids = constraint_ids
        self.support = support
        self.memo: dict[tuple, tuple | None] = {}
        self.probe_memo: dict[tuple, bool] = {}
        self.cons_at: list[list[int]] = []  # per local position, its constraints
        self.probes: list[tuple[tuple, tuple]] = []  # compiled (premise diffs, conclusion)


def _build_clusters(comp: _Compiled, system: DioSystem) -> list[_Cluster]:
    hints = system.clusters or []
    groups: list[set[int]] = []
    probes: list[list] = []
    for hint in hints:
        positions = {comp.pos[u] for u in hint.unknowns if u in comp.pos}
        if not positions:
            continue
        groups.append(positions)
        probes.append(hint.probes)

    cluster_of: dict[int, int] = {}
    for gid, g in enumerate(groups):
        for p in g:
            cluster_of[p] = gid
    parent = list(range(len(groups)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    # merge clusters sharing a constraint (defensive; normally disjoint)
    for involved in comp.vars_of:
        touched = {find(cluster_of[p]) for p in involved if p in cluster_of}
        if len(touched) > 1:
            root, *rest = touched
            for r in rest:
                parent[r] = root

    merged: dict[int, set[int]] = {}
    merged_probes: dict[int, list] = {}
    for gid, g in enumerate(groups):
        root = find(gid)
        merged.setdefault(root, set()).update(g)
        merged_probes.setdefault(root, []).extend(probes[gid])

    clusters = []
    for root, g in merged.items():
        cons = sorted(
            ci
            for ci, involved in enumerate(comp.vars_of)
            if any(p in g for p in involved)
        )
        support = sorted({p for ci in cons for p in comp.vars_of[ci]} - g)
        cluster = _Cluster(sorted(g), cons, support)
        cluster.cons_at = [
            [ci for ci in cons if p in comp.vars_of[ci]] for p in cluster.positions
        ]
        none_assigned = [None] * len(comp.unknowns)
        dlo = [d[0] for d in comp.domains]
        dhi = [d[-1] for d in comp.domains]
        for prem_diffs, concl in merged_probes[root]:
            compiled_concl = _compile_upoly(concl, comp.pos)
            # a probe can ever fire only if its conclusion can go certainly
            # negative and every premise can go certainly non-negative
            if comp.bounds(compiled_concl, none_assigned, dlo, dhi)[0] >= 0:
                continue
            compiled_prems = tuple(_compile_upoly(d, comp.pos) for d in prem_diffs)
            if any(
                comp.bounds(d, none_assigned, dlo, dhi)[1] < 0 for d in compiled_prems
            ):
                continue
            cluster.probes.append((compiled_prems, compiled_concl))
        clusters.append(cluster)
    clusters.sort(key=lambda c: c.positions)
    return clusters


def _probes_fire(
    comp: _Compiled, cluster: _Cluster, value, dlo, dhi
) -> bool:
    """True when some implication instance is certainly falsified under the
    current (partial) support: every premise difference certainly
    non-negative while the conclusion difference is certainly negative.
    Constraint violation is monotone under interval narrowing, so a firing
    probe rules out every completion of the support."""
    key = tuple(value[p] for p in cluster.support)
    cached = cluster.probe_memo.get(key)
    if cached is not None:
        return cached
    fired = False
    probes = cluster.probes
    for i, (prem_diffs, concl) in enumerate(probes):
        # premises first: their differences are small polynomials and they
        # rarely all hold, so the expensive conclusion is seldom evaluated
        if all(comp.bounds(d, value, dlo, dhi)[0] >= 0 for d in prem_diffs):
            if comp.bounds(concl, value, dlo, dhi)[1] < 0:
                fired = True
                if i:  # fired probes float to the front
                    probes.insert(0, probes.pop(i))
                break
    cluster.probe_memo[key] = fired
    return fired


def _solve_cluster(
    comp: _Compiled, cluster: _Cluster, value, dlo, dhi, deadline: float, nodes: list[int]
) -> tuple | None:
    """Find values for the cluster's unknowns under the current support.

    Support unknowns may still be unassigned: they then contribute their
    domain interval, which makes this a sound relaxation. The memo key is
    the partial support assignment.
    """
    key = tuple(value[p] for p in cluster.support)
    if key in cluster.memo:
        return cluster.memo[key]
    if time.monotonic() > deadline:
        raise _Deadline()

    positions = cluster.positions
    cons_at = cluster.cons_at
    k = 0
    idx = [0] * len(positions)
    result: tuple | None = None
    if _probes_fire(comp, cluster, value, dlo, dhi):
        cluster.memo[key] = None
        return None
    while True:
        if time.monotonic() > deadline:
            for p in positions:
                value[p] = None
            raise _Deadline()
        if k == len(positions):
            result = tuple(value[p] for p in positions)
            break
        p = positions[k]
        dom = comp.domains[p]
        found = False
        while idx[k] < len(dom):
            v = dom[idx[k]]
            idx[k] += 1
            nodes[0] += 1
            value[p] = v
            if any(comp.violated(ci, value, dlo, dhi) for ci in cons_at[k]):
                value[p] = None
                continue
            found = True
            break
        if found:
            k += 1
            if k < len(positions):
                idx[k] = 0
            continue
        value[p] = None
        k -= 1
        if k < 0:
            break
        value[positions[k]] = None
    for p in positions:
        value[p] = None
    cluster.memo[key] = result
    return result


RESTART_BASE = 300  # dead ends before the first restart
RESTART_GROWTH = 1.5


def solve(system: DioSystem, budget: float = 60.0) -> SolveOutcome:
    """Decide satisfiability within a wall-clock budget (seconds).

    The main search assigns the non-cluster unknowns with a conflict-driven
    dynamic variable order (weighted-degree): every constraint and every
    cluster carries a weight that grows when it wipes out a variable's
    values, and the next variable is the unassigned one with the largest
    accumulated weight. Dead ends backjump to the deepest assignment that
    contributed to the wipeout. The search restarts on a Luby schedule;
    learned weights and the cluster memo tables survive restarts, so every
    restart explores with a better-informed variable order.
    """
    start = time.monotonic()
    deadline = start + budget
    comp = _Compiled(system)
    n = len(comp.unknowns)
    value: list[int | None] = [None] * n
    dlo = [d[0] for d in comp.domains]
    dhi = [d[-1] for d in comp.domains]

    if not _reduce_domains(comp, value, dlo, dhi, deadline):
        return SolveOutcome(UNSAT, elapsed=time.monotonic() - start)

    clusters = _build_clusters(comp, system)
    in_cluster = {p for c in clusters for p in c.positions}
    main = [p for p in range(n) if p not in in_cluster]
    watching: dict[int, list[int]] = {p: [] for p in main}
    ground_clusters = []
    for cid, c in enumerate(clusters):
        if not c.support:
            ground_clusters.append(c)
            continue
        for p in c.support:
            watching[p].append(cid)

    state = _SearchState(comp, clusters, watching, main)
    nodes = state.nodes
    elapsed = lambda: time.monotonic() - start

    try:
        for c in ground_clusters:
            if _solve_cluster(comp, c, value, dlo, dhi, deadline, nodes) is None:
                return SolveOutcome(UNSAT, elapsed=elapsed(), nodes=nodes[0])

        if not main:
            return _finish(system, comp, clusters, value, dlo, dhi, deadline, nodes, start)

        limit = float(RESTART_BASE)
        while True:
            outcome = state.run(value, dlo, dhi, deadline, int(limit))
            if outcome == "restart":
                limit *= RESTART_GROWTH
                continue
            if outcome == "unsat":
                return SolveOutcome(UNSAT, elapsed=elapsed(), nodes=nodes[0])
            if outcome == "timeout":
                return SolveOutcome(TIMEOUT, elapsed=elapsed(), nodes=nodes[0])
            return _finish(system, comp, clusters, value, dlo, dhi, deadline, nodes, start)
    except _Deadline:
        return SolveOutcome(TIMEOUT, elapsed=elapsed(), nodes=nodes[0])


class _SearchState:
    """Weighted-degree DFS with backjumping over the main unknowns."""

    def __init__(self, comp, clusters, watching, main):
        self.comp = comp
        self.clusters = clusters
        self.watching = watching
        self.main = main
        self.cons_weight = [1.0] * len(comp.relations)
        self.cluster_weight = [1.0] * len(clusters)
        self.nodes = [0]

    def pick_unassigned(self, value) -> int:
        best, best_score = None, None
        for p in self.main:
            if value[p] is not None:
                continue
            w = sum(self.cons_weight[ci] for ci in self.comp.cons_of[p])
            w += sum(self.cluster_weight[cid] for cid in self.watching[p])
            score = (w, self.comp.occurrences[self.comp.unknowns[p]], -p)
            if best_score is None or score > best_score:
                best, best_score = p, score
        return best

    def run(self, value, dlo, dhi, deadline: float, deadend_limit: int) -> str:
        """One restart-bounded search episode: sat | unsat | restart | timeout."""
        comp, clusters, watching, main = (
            self.comp,
            self.clusters,
            self.watching,
            self.main,
        )
        nodes = self.nodes
        support_left = [len(c.support) for c in clusters]
        depth = 0
        deadends = 0
        chosen: list[int] = [0] * len(main)
        next_index: list[int] = [0] * len(main)
        conflicts: list[set[int]] = [set() for _ in range(len(main))]
        depth_of: dict[int, int] = {}
        chosen[0] = self.pick_unassigned(value)
        depth_of[chosen[0]] = 0

        def unwind() -> None:
            for q in list(depth_of):
                value[q] = None
            depth_of.clear()

        while True:
            if time.monotonic() > deadline:
                unwind()
                return "timeout"
            p = chosen[depth]
            dom = comp.domains[p]
            found = False
            k = next_index[depth]
            while k < len(dom):
                v = dom[k]
                k += 1
                nodes[0] += 1
                value[p] = v
                culprit = None
                for ci in comp.cons_of[p]:
                    if comp.violated(ci, value, dlo, dhi):
                        culprit = ci
                        break
                if culprit is not None:
                    value[p] = None
                    self.cons_weight[culprit] += 1.0
                    conflicts[depth].update(
                        depth_of[q]
                        for q in comp.vars_of[culprit]
                        if value[q] is not None and q in depth_of
                    )
                    continue
                bad = None
                for cid in watching[p]:
                    c = clusters[cid]
                    if support_left[cid] == 1:
                        # support now complete: run the exact local solve
                        if _solve_cluster(comp, c, value, dlo, dhi, deadline, nodes) is None:
                            bad = cid
                            break
                    elif _probes_fire(comp, c, value, dlo, dhi):
                        bad = cid
                        break
                if bad is not None:
                    value[p] = None
                    self.cluster_weight[bad] += 1.0
                    conflicts[depth].update(
                        depth_of[q]
                        for q in clusters[bad].support
                        if value[q] is not None and q in depth_of
                    )
                    continue
                found = True
                break
            next_index[depth] = k
            if found:
                for cid in watching[p]:
                    support_left[cid] -= 1
                if depth == len(main) - 1:
                    return "sat"
                depth += 1
                chosen[depth] = self.pick_unassigned(value)
                depth_of[chosen[depth]] = depth
                next_index[depth] = 0
                conflicts[depth] = set()
                continue
            # dead end at this depth
            del depth_of[p]
            if not conflicts[depth]:
                unwind()
                return "unsat"
            deadends += 1
            if deadends >= deadend_limit:
                unwind()
                return "restart"
            jump = max(conflicts[depth])
            conflicts[jump] |= conflicts[depth] - {jump}
            for d in range(jump, depth):
                q = chosen[d]
                value[q] = None
                del depth_of[q]
                for cid in watching[q]:
                    support_left[cid] += 1
            depth = jump
            # the variable chosen at the jump depth stays the same; its
            # remaining values continue from next_index[jump]
            depth_of[chosen[depth]] = depth


def _finish(system, comp, clusters, value, dlo, dhi, deadline, nodes, start):
    """All main variables assigned: fill in cluster values and verify."""
    for c in clusters:
        sol = _solve_cluster(comp, c, value, dlo, dhi, deadline, nodes)
        assert sol is not None, "cluster became infeasible after its support was checked"
        for p, v in zip(c.positions, sol):
            value[p] = v
    assignment = {u: value[comp.pos[u]] for u in system.domains}
    assert check(system, assignment), "propagation accepted a bad assignment"
    return SolveOutcome(SAT, assignment, time.monotonic() - start, nodes[0])
