"""Convex shrinking-horizon optimal control problem: assembly, solver, oracle."""

from .problem import (OcpProblem, OcpSolution, Tolerances, assemble,
                      recovery_report, STATUS_OPTIMAL, STATUS_INFEASIBLE,
                      STATUS_MAX_ITERATIONS)
from .ipm import solve
from .oracle import brute_force_reference, oracle_grid_slack

__all__ = [
    "OcpProblem", "OcpSolution", "Tolerances", "assemble", "solve",
    "brute_force_reference", "oracle_grid_slack", "recovery_report",
    "STATUS_OPTIMAL", "STATUS_INFEASIBLE", "STATUS_MAX_ITERATIONS",
]
