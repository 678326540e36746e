"""Disjoint tag descriptors for clustered data via quadratic binary optimization.

Given objects partitioned into clusters and a secondary tag set, find one tag
set per cluster such that the sets are pairwise disjoint, each cluster meets
its coverage target, and the total size plus a weighted tag-modularity term
is minimal. The problem compiles to an unconstrained quadratic binary model
solved by an annealing heuristic, certified against exact enumeration on
small instances.
"""

from .instance import (Instance, InstanceError, ParseError, ValidationError,
                       dump_edge_csv, dump_json, edge_count, load_instance,
                       tag_degree)
from .model import (DegenerateInstanceError, DescriptorSolution,
                    FeasibilityReport, InfeasibleSpecError, ProblemSpec,
                    coverage, is_feasible, objective, tag_modularity)
from .oracle import (BudgetExceededError, ExactResult, exact_descriptors,
                     greedy_baseline)
from .qubo import (QuboModel, VariableIndex, build_qubo, decode,
                   default_penalties, encode_solution, energy, export_qubo,
                   slack_coefficients)
from .solver import (FieldState, SolverConfig, SolveResult,
                     TooManyVariablesError, anneal, exhaustive_min, flip_delta)
from .metrics import (average_br, balance_ratio, make_report, report_json,
                      EmptySelectionError, UndefinedBalanceRatioError)
from .toy import toy_instance, toy_json

__version__ = "0.1.0"

__all__ = [
    "Instance", "InstanceError", "ParseError", "ValidationError",
    "load_instance", "dump_json", "dump_edge_csv", "tag_degree", "edge_count",
    "ProblemSpec", "DescriptorSolution", "FeasibilityReport",
    "InfeasibleSpecError", "DegenerateInstanceError",
    "coverage", "is_feasible", "tag_modularity", "objective",
    "QuboModel", "VariableIndex", "slack_coefficients", "build_qubo",
    "default_penalties", "energy", "decode", "encode_solution", "export_qubo",
    "SolverConfig", "SolveResult", "FieldState", "flip_delta", "anneal",
    "exhaustive_min", "TooManyVariablesError",
    "ExactResult", "BudgetExceededError", "exact_descriptors", "greedy_baseline",
    "balance_ratio", "average_br", "make_report", "report_json",
    "UndefinedBalanceRatioError", "EmptySelectionError",
    "toy_instance", "toy_json",
    "__version__",
]
