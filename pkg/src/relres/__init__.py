"""Reliability-aware processor estimation for redundant control specifications."""

from .errors import (
    Diagnostic, ExplorationCapExceeded, NoAdmissibleStrategy, RelresError,
    SpecError,
)
from .planner import (
    ConstraintSet, Group, Schedule, TimingConstraint, build_constraints,
    demand_profile, min_resources, solve_feasible,
)
from .reliability import (
    admissible_strategies, computed_reliability, count_ways, exact_reliability,
    strategy_reliability,
)
from .smtlib import export_smtlib
from .spec_model import SpecSuite, format_suite, parse_suite
from .strategy import compute_bounds, enumerate_strategies, flatten

__version__ = "0.1.0"

__all__ = [
    "ConstraintSet", "Diagnostic", "ExplorationCapExceeded", "Group",
    "NoAdmissibleStrategy", "RelresError", "Schedule", "SpecError",
    "SpecSuite", "TimingConstraint", "admissible_strategies",
    "build_constraints", "compute_bounds", "computed_reliability",
    "count_ways", "demand_profile", "enumerate_strategies",
    "exact_reliability", "export_smtlib", "flatten", "format_suite",
    "min_resources", "parse_suite", "solve_feasible", "strategy_reliability",
]
