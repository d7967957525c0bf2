"""Energy management for parallel hybrid-electric aircraft.

Computes the fuel-optimal gas-turbine / electric-motor power split over a
planned flight path with a shrinking-horizon model predictive controller
built on a convex reformulation of the powertrain and point-mass flight
dynamics, and compares it against heuristic baselines.
"""

from . import control, flight_dynamics, ocp, powertrain, scheduling
from .kernels import backend_name

__version__ = "0.1.0"

__all__ = ["powertrain", "flight_dynamics", "scheduling", "ocp", "control",
           "backend_name", "__version__"]
