"""Dynamics models: agent teams, the carried object, grasp maps, disturbances."""

from .agents import PlanarArmTeam, SixDofEffectorTeam  # noqa: F401
from .rigid_body import RigidBody  # noqa: F401
from .grasp import (  # noqa: F401
    grasp_map,
    grasp_map_dot,
    internal_wrench_component,
    load_distribution,
    nullspace_filter,
    offset_twist_map,
    offset_twist_map_dot,
)
from .disturbance import StructuredDisturbance  # noqa: F401
from .coupled import CoupledPlant  # noqa: F401
