"""Direct problem semantics: coverage, feasibility, tag modularity, objective.

These evaluators work straight off the instance incidence and never touch
the quadratic encoding, so they double as the ground truth the encoding is
checked against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .instance import Instance, edge_count


class InfeasibleSpecError(ValueError):
    """The problem parameters admit no solution (e.g. a quota above the
    cluster size)."""


class DegenerateInstanceError(ValueError):
    """Tag modularity is undefined on an instance with no associations."""


@dataclass(frozen=True)
class ProblemSpec:
    """An instance plus per-cluster coverage targets and a modularity weight.

    With modularity_weight == 0 the objective is the plain descriptor size;
    targets equal to the cluster sizes demand full coverage.
    """

    instance: Instance
    coverage_targets: tuple[int, ...]
    modularity_weight: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coverage_targets", tuple(int(m) for m in self.coverage_targets))
        sizes = self.instance.cluster_sizes
        if len(self.coverage_targets) != self.instance.k:
            raise ValueError(
                f"expected {self.instance.k} coverage targets, got {len(self.coverage_targets)}")
        for ell, (m, size) in enumerate(zip(self.coverage_targets, sizes), start=1):
            if m < 0:
                raise ValueError(f"coverage target for cluster {ell} is negative")
            if m > size:
                raise InfeasibleSpecError(
                    f"coverage target {m} for cluster {ell} exceeds its size {size}")
        if self.modularity_weight < 0:
            raise ValueError("modularity weight must be >= 0")

    @property
    def k(self) -> int:
        return self.instance.k


@dataclass(frozen=True)
class DescriptorSolution:
    """One tag set per cluster. Overlaps are representable; feasibility
    checking reports them rather than refusing to construct."""

    descriptors: tuple[frozenset[int], ...]

    @classmethod
    def from_sets(cls, sets: Iterable[Iterable[int]]) -> "DescriptorSolution":
        return cls(tuple(frozenset(s) for s in sets))

    @classmethod
    def from_names(cls, inst: Instance, groups: Iterable[Iterable[str]]) -> "DescriptorSolution":
        idx = inst.tag_index
        sets = []
        for group in groups:
            s = set()
            for name in group:
                if name not in idx:
                    raise KeyError(f"unknown tag {name!r}")
                s.add(idx[name])
            sets.append(frozenset(s))
        return cls(tuple(sets))

    @property
    def selected(self) -> frozenset[int]:
        out: set[int] = set()
        for d in self.descriptors:
            out |= d
        return frozenset(out)

    @property
    def size(self) -> int:
        return sum(len(d) for d in self.descriptors)

    def tag_names(self, inst: Instance) -> list[list[str]]:
        return [[inst.tags[j] for j in sorted(d)] for d in self.descriptors]


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    # (tag index, 1-based clusters sharing it)
    overlaps: tuple[tuple[int, tuple[int, ...]], ...]
    # (1-based cluster, achieved, target)
    deficits: tuple[tuple[int, int, int], ...]

    def violations(self, inst: Instance | None = None) -> list[str]:
        msgs = []
        for j, cls in self.overlaps:
            name = inst.tags[j] if inst is not None else f"tag {j}"
            msgs.append(f"{name} assigned to clusters {list(cls)} (descriptors must be disjoint)")
        for ell, got, want in self.deficits:
            msgs.append(f"cluster {ell} coverage {got} < target {want} (deficit {want - got})")
        return msgs


def coverage(spec: ProblemSpec, sol: DescriptorSolution) -> list[int]:
    """Per-cluster count of objects covered by their cluster's descriptor."""
    inst = spec.instance
    if len(sol.descriptors) != inst.k:
        raise ValueError(f"expected {inst.k} descriptors, got {len(sol.descriptors)}")
    out = [0] * inst.k
    for i, (c, ts) in enumerate(zip(inst.cluster_of, inst.tags_of)):
        if ts & sol.descriptors[c - 1]:
            out[c - 1] += 1
    return out


def is_feasible(spec: ProblemSpec, sol: DescriptorSolution) -> FeasibilityReport:
    """Pairwise disjointness plus coverage targets, with per-violation detail."""
    placements: dict[int, list[int]] = {}
    for ell, d in enumerate(sol.descriptors, start=1):
        for j in d:
            placements.setdefault(j, []).append(ell)
    overlaps = tuple(
        (j, tuple(cls)) for j, cls in sorted(placements.items()) if len(cls) > 1)
    got = coverage(spec, sol)
    deficits = tuple(
        (ell, g, m)
        for ell, (g, m) in enumerate(zip(got, spec.coverage_targets), start=1)
        if g < m)
    return FeasibilityReport(not overlaps and not deficits, overlaps, deficits)


def tag_modularity(spec: ProblemSpec, sol: DescriptorSolution) -> float:
    """Sum over descriptors of (sum of member tag degrees)^2 / (2 * edges).

    Counts ordered tag pairs including the diagonal, the same convention the
    quadratic encoding uses, so both routes agree exactly. High values mean
    the descriptors lean on globally frequent tags.
    """
    inst = spec.instance
    m = edge_count(inst)
    if m == 0:
        raise DegenerateInstanceError("tag modularity undefined: instance has no associations")
    degrees = inst._tag_degrees
    total = 0.0
    for d in sol.descriptors:
        s = sum(degrees[j] for j in d)
        total += float(s) * float(s)
    return total / (2.0 * m)


def objective(spec: ProblemSpec, sol: DescriptorSolution) -> float:
    """Descriptor size plus the weighted tag-modularity term."""
    base = float(sol.size)
    if spec.modularity_weight == 0:
        return base
    return base + spec.modularity_weight * tag_modularity(spec, sol)
