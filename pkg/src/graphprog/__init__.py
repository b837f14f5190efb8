"""Graph programs with relabelling, checked against an incorrectness logic."""

from .econd import satisfies
from .graph import Graph
from .program import Budget, outcomes, run_random
from .proof import Triple, check_proof, discharge_implication
from .rules import RuleSchema, apply, find_matches
from .syntax import Workspace, builtin_rules, parse_condition, parse_graph, parse_program
from .transform import app, wpost

__all__ = [
    "Graph", "RuleSchema", "find_matches", "apply", "Budget", "outcomes",
    "run_random", "satisfies", "app", "wpost", "Triple", "check_proof",
    "discharge_implication", "Workspace", "builtin_rules", "parse_condition",
    "parse_graph", "parse_program",
]
