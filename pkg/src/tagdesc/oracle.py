"""Exact descriptor optimization by direct enumeration, plus a greedy
feasibility heuristic usable as a baseline or warm start.

Enumeration walks every assignment of each tag to {unused, cluster 1..k},
so disjointness holds by construction and the search space is (k+1)^|T|
regardless of how many objects there are; coverage bits are implicit (an
object counts as covered iff it actually is).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .instance import tag_degree
from .model import DescriptorSolution, ProblemSpec, coverage, objective

DEFAULT_BUDGET = 2 ** 24


class BudgetExceededError(ValueError):
    """The assignment space is too large for exact enumeration."""


@dataclass(frozen=True)
class ExactResult:
    feasible: bool
    solution: DescriptorSolution | None
    objective: float | None
    optimum_count: int
    assignments_checked: int

    @property
    def unique(self) -> bool:
        return self.feasible and self.optimum_count == 1


def exact_descriptors(spec: ProblemSpec, budget: int = DEFAULT_BUDGET) -> ExactResult:
    """Provably optimal descriptors, or an infeasibility verdict.

    Ties resolve to fewer total tags, then to the lexicographically smallest
    assignment vector (per-tag cluster number, 0 for unused, in tag order).
    optimum_count counts assignments attaining the optimal objective, so 1
    means the optimum is unique.
    """
    inst = spec.instance
    k, n_tags = inst.k, inst.n_tags
    space = (k + 1) ** n_tags
    if space > budget:
        raise BudgetExceededError(
            f"(k+1)^|T| = {space} assignments exceeds the budget {budget}; "
            "reduce the tag universe or raise the budget (TMCD_ENUM_BUDGET)")

    best_key: tuple[float, int] | None = None
    best_assignment: tuple[int, ...] | None = None
    best_obj = 0.0
    optimum_count = 0
    checked = 0
    for assignment in itertools.product(range(k + 1), repeat=n_tags):
        checked += 1
        sol = _to_solution(assignment, k)
        got = coverage(spec, sol)
        if any(g < m for g, m in zip(got, spec.coverage_targets)):
            continue
        obj = objective(spec, sol)
        tags_used = sol.size
        if best_key is None or obj < best_key[0]:
            best_key = (obj, tags_used)
            best_assignment = assignment
            best_obj = obj
            optimum_count = 1
        elif obj == best_key[0]:
            optimum_count += 1
            if tags_used < best_key[1]:
                # same objective, fewer tags; assignment order already
                # favors the lexicographically smallest vector
                best_key = (obj, tags_used)
                best_assignment = assignment
    if best_assignment is None:
        return ExactResult(False, None, None, 0, checked)
    return ExactResult(True, _to_solution(best_assignment, k), best_obj, optimum_count, checked)


def _to_solution(assignment: tuple[int, ...], k: int) -> DescriptorSolution:
    sets: list[set[int]] = [set() for _ in range(k)]
    for j, c in enumerate(assignment):
        if c:
            sets[c - 1].add(j)
    return DescriptorSolution(tuple(frozenset(s) for s in sets))


def greedy_baseline(spec: ProblemSpec) -> DescriptorSolution:
    """Marginal-gain greedy: repeatedly give the cluster with the largest
    remaining coverage deficit the unassigned tag that covers most of its
    uncovered objects (ties: smaller tag degree, then lower tag index).

    Always disjoint; feasible whenever greedy can reach the targets. Clusters
    no tag can help are left short (check with is_feasible).
    """
    inst = spec.instance
    k = inst.k
    descriptors: list[set[int]] = [set() for _ in range(k)]
    assigned: set[int] = set()
    uncovered = [
        {i for i in inst.members(ell + 1) if not (inst.tags_of[i] & descriptors[ell])}
        for ell in range(k)
    ]
    deficits = [max(0, m - (inst.cluster_sizes[ell] - len(uncovered[ell])))
                for ell, m in enumerate(spec.coverage_targets)]
    stuck: set[int] = set()

    while True:
        live = [(d, ell) for ell, d in enumerate(deficits) if d > 0 and ell not in stuck]
        if not live:
            break
        _, ell = max(live, key=lambda t: (t[0], -t[1]))
        best_tag = None
        best_key = None
        for j in range(inst.n_tags):
            if j in assigned:
                continue
            gain = sum(1 for i in uncovered[ell] if j in inst.tags_of[i])
            if gain == 0:
                continue
            key = (-gain, tag_degree(inst, j), j)
            if best_key is None or key < best_key:
                best_key = key
                best_tag = j
        if best_tag is None:
            stuck.add(ell)
            continue
        descriptors[ell].add(best_tag)
        assigned.add(best_tag)
        newly = {i for i in uncovered[ell] if best_tag in inst.tags_of[i]}
        uncovered[ell] -= newly
        deficits[ell] = max(0, spec.coverage_targets[ell]
                            - (inst.cluster_sizes[ell] - len(uncovered[ell])))

    return DescriptorSolution(tuple(frozenset(d) for d in descriptors))
