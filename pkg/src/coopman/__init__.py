"""Deterministic simulation and decentralized control of cooperative manipulation.

A rigid object is grasped by N robotic agents; the package provides the
coupled object-agents dynamics, an adaptive quaternion-feedback tracking
controller, a prescribed-performance (funnel) controller, a fixed-step RK4
scenario runner with CSV telemetry, and closed-form performance/effort bounds.
"""

__version__ = "0.1.0"

from . import spatial  # noqa: F401
from .errors import (  # noqa: F401
    CoopmanError,
    FunnelViolation,
    InfeasibleBounds,
    NoFeasibleGains,
    RepresentationSingularity,
    ScenarioError,
)
