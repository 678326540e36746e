"""Explainability diagnostics and the structured run report.

The balance ratio of a tag compares its per-cluster association counts:
0 means the tag touches a single cluster (cluster-specific), 1 means the
counts are equal everywhere (generic). Reports bundle everything a run
produced into one JSON-ready document; every number except the solver
stats is recomputable from the spec and solution.
"""

from __future__ import annotations

import json
from typing import Any

from .instance import Instance, edge_count, tag_degree
from .model import (DescriptorSolution, ProblemSpec, coverage, is_feasible,
                    objective, tag_modularity)
from .oracle import ExactResult
from .solver import SolveResult


class UndefinedBalanceRatioError(ValueError):
    """Balance ratio is undefined for a tag with no associations."""


class EmptySelectionError(ValueError):
    """Average balance ratio over a selection with no positive-degree tags."""


def balance_ratio(inst: Instance, t: int) -> float:
    """How evenly tag `t`'s associations spread over the clusters, in [0, 1].

    For two clusters this is min/max of the per-cluster counts; in general
    (sum - max) / ((k - 1) * max), which coincides at k = 2 and keeps the
    endpoints: 0 for a single-cluster tag, 1 for perfectly even counts.
    """
    if tag_degree(inst, t) == 0:
        raise UndefinedBalanceRatioError(
            f"tag {inst.tags[t]!r} has no associations; balance ratio undefined")
    counts = [0] * inst.k
    for c, ts in zip(inst.cluster_of, inst.tags_of):
        if t in ts:
            counts[c - 1] += 1
    mx = max(counts)
    if inst.k == 1:
        return 1.0
    return (sum(counts) - mx) / ((inst.k - 1) * mx)


def average_br(inst: Instance, sol: DescriptorSolution) -> float:
    """Mean balance ratio over the selected tags (union of all descriptors).

    Selected tags without associations have no defined ratio and are skipped;
    raises if nothing remains.
    """
    eligible = [t for t in sorted(sol.selected) if tag_degree(inst, t) > 0]
    if not eligible:
        raise EmptySelectionError("no selected tag has a defined balance ratio")
    return sum(balance_ratio(inst, t) for t in eligible) / len(eligible)


def make_report(spec: ProblemSpec, result, penalties=None) -> dict[str, Any]:
    """Assemble the run report for a SolveResult, ExactResult, or a bare
    DescriptorSolution (evaluation mode)."""
    inst = spec.instance
    if isinstance(result, SolveResult):
        sol = result.solution
        res = result.residuals
        solver: dict[str, Any] = {
            "method": "anneal",
            "best_energy": result.best_energy,
            "penalty_residual": res.penalty if res is not None else None,
            "stats": result.stats,
        }
    elif isinstance(result, ExactResult):
        sol = result.solution
        solver = {
            "method": "exact",
            "spec_feasible": result.feasible,
            "unique_optimum": result.unique,
            "optimum_count": result.optimum_count,
            "assignments_checked": result.assignments_checked,
        }
    elif isinstance(result, DescriptorSolution):
        sol = result
        solver = {"method": "eval"}
    else:
        raise TypeError(f"cannot report on {type(result).__name__}")

    report: dict[str, Any] = {
        "instance": {
            "objects": inst.n,
            "tags": inst.n_tags,
            "clusters": inst.k,
            "cluster_sizes": list(inst.cluster_sizes),
            "edges": edge_count(inst),
            "warnings": list(inst.warnings),
        },
        "problem": {
            "coverage_targets": list(spec.coverage_targets),
            "modularity_weight": spec.modularity_weight,
        },
        "penalties": (
            {"A": penalties[0], "B": penalties[1], "C": penalties[2]}
            if penalties is not None else None),
    }

    if sol is None:
        report.update({
            "descriptors": None, "feasible": False,
            "violations": ["no feasible solution exists for these targets"],
            "coverage": {"achieved": None, "targets": list(spec.coverage_targets)},
            "objective": None,
            "balance_ratio": {"per_tag": {}, "average": None},
        })
    else:
        feas = is_feasible(spec, sol)
        got = coverage(spec, sol)
        tag_count = sol.size
        tm = tag_modularity(spec, sol) if edge_count(inst) > 0 else None
        total = objective(spec, sol) if (tm is not None or spec.modularity_weight == 0) else None
        per_tag = {
            inst.tags[t]: (balance_ratio(inst, t) if tag_degree(inst, t) > 0 else None)
            for t in sorted(sol.selected)
        }
        defined = [v for v in per_tag.values() if v is not None]
        report.update({
            "descriptors": sol.tag_names(inst),
            "feasible": feas.feasible,
            "violations": feas.violations(inst),
            "coverage": {"achieved": got, "targets": list(spec.coverage_targets)},
            "objective": {
                "tag_count": tag_count,
                "tag_modularity": tm,
                "weighted_modularity": (spec.modularity_weight * tm) if tm is not None else None,
                "total": total,
            },
            "balance_ratio": {
                "per_tag": per_tag,
                "average": sum(defined) / len(defined) if defined else None,
            },
        })
    report["solver"] = solver
    return report


def _round_floats(value, digits: int = 6):
    if isinstance(value, float):
        return float(f"{value:.{digits}g}")
    if isinstance(value, dict):
        return {k: _round_floats(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_floats(v, digits) for v in value]
    return value


def report_json(report: dict[str, Any]) -> str:
    """Serialize a report with reals at 6 significant digits."""
    return json.dumps(_round_floats(report), indent=2) + "\n"
