"""Exception hierarchy shared across the package."""


class HemaError(Exception):
    """Base class for all package-specific errors."""


class InfeasibleBatteryDraw(HemaError):
    """Demanded electrical power exceeds the battery's maximum deliverable power."""


class OutOfRange(HemaError):
    """Requested battery power lies outside the range of the forward map."""


class AlphaOutOfRange(HemaError):
    """Angle of attack outside the fitted aerodynamic coefficient domain."""


class GridOutOfRange(HemaError):
    """Lookup coordinate falls outside the fan-map grid hull."""


class CoeffOutOfTable(HemaError):
    """Shaft speed falls outside the coefficient table breakpoints."""


class DimensionMismatch(HemaError):
    """Inconsistent array lengths when assembling an optimal control problem."""


class InconsistentBounds(HemaError):
    """Problem data violates its own bound constraints (e.g. E0 outside the SOC band)."""


class OracleTooLarge(HemaError):
    """Brute-force enumeration would exceed the configured budget."""


class BatteryBoundsBreach(HemaError):
    """Plant SOC left the allowed band by more than the model-mismatch tolerance."""


class DemandExceedsCapacity(HemaError):
    """Heuristic split cannot cover the demanded drive power within power limits."""


class MissionInfeasible(HemaError):
    """Closed-loop run halted on an infeasible optimal control problem.

    Carries the partial mission log so post-mortems stay possible.
    """

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = log


class MismatchedScenario(HemaError):
    """Reports being compared were not produced from the same scenario/plan."""


class OrderingViolation(HemaError):
    """The optimiser lost to a heuristic baseline; something is deeply wrong."""


class ScenarioError(HemaError):
    """Scenario file missing, unreadable, or failing validation."""
