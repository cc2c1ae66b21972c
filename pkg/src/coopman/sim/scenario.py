"""TOML scenario descriptions and the builders that realize them.

A scenario file pins down a complete run: object and team physics, grasp
geometry, disturbances, the pose reference, the initial state, integration
settings and one or both controller sections.  Every key is checked against
the schema below and unknown keys are rejected outright, so a typo cannot
silently fall back to a default.  Scenarios bundled with the package sit
next to this module and are addressed by bare name.
"""

from importlib import resources
from pathlib import Path
from types import SimpleNamespace

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from ..bounds import reference_extremes
from ..ctrl_adaptive import AdaptiveController
from ..ctrl_ppc import (Funnel, FunnelController, pose_funnel_auto,
                        velocity_funnel_auto)
from ..errors import ScenarioError
from ..model import (CoupledPlant, PlanarArmTeam, RigidBody,
                     SixDofEffectorTeam, StructuredDisturbance)
from .trajectory import SinusoidReference

_SCHEMA = {
    "name": None,
    "seed": None,
    "expect_violation": None,
    "object": {"mass": None, "inertia": None, "gravity": None},
    "grasp": {"offsets": None, "mass_shares": None, "inertia_shares": None},
    "team": {
        "planar": {"lengths": None, "masses": None, "com": None,
                   "inertias": None, "bases": None, "elbow": None,
                   "ee_angle": None, "offplane": None,
                   "gravity_comp": None, "damping": None},
        "effector": {"mass_matrix": None, "modulation": None,
                     "gravity_load": None},
    },
    "disturbance": {"agents": None, "object": None},
    "reference": {"offset": None, "amplitude": None, "frequency": None,
                  "phase": None},
    "initial": {"pose": None, "velocity": None, "joints": None},
    "simulation": {"duration": None, "mode": None, "control_rate": None,
                   "substeps": None, "dt": None, "torque_limit": None,
                   "record_energy": None},
    "controller": {
        "type": None,
        "adaptive": {"pos_gain": None, "att_gain": None, "vel_gain": None,
                     "agent_learn_rate": None, "agent_dist_rate": None,
                     "object_learn_rate": None, "object_dist_rate": None,
                     "estimates": None, "squeeze": None},
        "funnel": {"pose_gain": None, "vel_gain": None,
                   "pose": {"rho0": None, "rho_inf": None, "decay": None},
                   "pose_auto": {"margin": None, "rho_inf": None,
                                 "decay": None, "pitch_cap": None},
                   "velocity": {"rho0": None, "rho_inf": None,
                                "decay": None},
                   "velocity_auto": {"pad": None, "rho_inf": None,
                                     "decay": None}},
    },
}


def _check_keys(table, schema, crumb=""):
    for key, value in table.items():
        if key not in schema:
            raise ScenarioError("unknown scenario key '%s%s'" % (crumb, key))
        sub = schema[key]
        if isinstance(sub, dict):
            if not isinstance(value, dict):
                raise ScenarioError("scenario key '%s%s' must be a table"
                                    % (crumb, key))
            _check_keys(value, sub, crumb + key + ".")


def _require(table, key, crumb):
    if key not in table:
        raise ScenarioError("scenario is missing '%s.%s'" % (crumb, key)
                            if crumb else "scenario is missing '%s'" % key)
    return table[key]


def bundled_scenarios():
    """Names of the scenario files shipped with the package."""
    root = resources.files("coopman") / "scenarios"
    return sorted(entry.name[:-5] for entry in root.iterdir()
                  if entry.name.endswith(".toml"))


def load_scenario(source):
    """Parses and schema-checks a scenario file or bundled scenario name."""
    path = Path(source)
    if path.is_file():
        raw = path.read_bytes()
    else:
        entry = resources.files("coopman") / "scenarios" / (str(source)
                                                            + ".toml")
        if not entry.is_file():
            raise ScenarioError(
                "no scenario file %r and no bundled scenario named %r "
                "(available: %s)" % (str(source), str(source),
                                     ", ".join(bundled_scenarios())))
        raw = entry.read_bytes()
    try:
        config = tomllib.loads(raw.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError("scenario file is not valid TOML: %s" % exc)
    _check_keys(config, _SCHEMA)
    if "name" not in config:
        config["name"] = path.stem if path.is_file() else str(source)
    return config


def _per_agent(value, n_agents, rank):
    """Tiles a shared parameter (one row / one matrix) to all agents."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == rank - 1:
        arr = np.tile(arr, (n_agents,) + (1,) * (rank - 1))
    return arr


def build_plant(config, seed=None):
    """Object + team + grasp + disturbance from a checked scenario table."""
    obj = _require(config, "object", "")
    gravity = float(obj.get("gravity", 9.81))
    body = RigidBody(_require(obj, "mass", "object"),
                     _require(obj, "inertia", "object"), gravity=gravity)

    grasp = _require(config, "grasp", "")
    offsets = np.atleast_2d(np.asarray(_require(grasp, "offsets", "grasp"),
                                       float))
    n_agents = offsets.shape[0]

    team_cfg = _require(config, "team", "")
    if ("planar" in team_cfg) == ("effector" in team_cfg):
        raise ScenarioError(
            "scenario must define exactly one of team.planar/team.effector")
    if "planar" in team_cfg:
        arm = team_cfg["planar"]
        lengths = _per_agent(_require(arm, "lengths", "team.planar"),
                             n_agents, 2)
        masses = _per_agent(_require(arm, "masses", "team.planar"),
                            n_agents, 2)
        com = _per_agent(arm.get("com", lengths / 2.0), n_agents, 2)
        inertias = _per_agent(arm.get("inertias",
                                      masses * lengths ** 2 / 12.0),
                              n_agents, 2)
        # gravity_comp models servo drivers that null their own link weight;
        # the commanded torques then act on a gravity-free arm while the
        # object keeps its full weight.  damping is the viscous gear
        # friction per joint (the plant feels it; controllers do not know
        # about it).
        arm_gravity = 0.0 if arm.get("gravity_comp", False) else gravity
        damping = arm.get("damping")
        if damping is not None:
            damping = _per_agent(damping, n_agents, 2)
        team = PlanarArmTeam(lengths, masses, com, inertias,
                             bases=_require(arm, "bases", "team.planar"),
                             elbow=_require(arm, "elbow", "team.planar"),
                             ee_angle=_require(arm, "ee_angle", "team.planar"),
                             offplane=_per_agent(
                                 _require(arm, "offplane", "team.planar"),
                                 n_agents, 2),
                             gravity=arm_gravity, damping=damping)
    else:
        eff = team_cfg["effector"]
        team = SixDofEffectorTeam(
            _per_agent(_require(eff, "mass_matrix", "team.effector"),
                       n_agents, 3),
            _per_agent(_require(eff, "modulation", "team.effector"),
                       n_agents, 2),
            _per_agent(_require(eff, "gravity_load", "team.effector"),
                       n_agents, 2))

    if team.n_agents != n_agents:
        raise ScenarioError("team defines %d agents but grasp has %d offsets"
                            % (team.n_agents, n_agents))

    if "disturbance" in config:
        dist_cfg = config["disturbance"]
        seed = config.get("seed", 0) if seed is None else seed
        disturbance = StructuredDisturbance(
            _require(dist_cfg, "agents", "disturbance"),
            _require(dist_cfg, "object", "disturbance"),
            np.random.default_rng(seed))
    else:
        disturbance = StructuredDisturbance.disabled(n_agents)
    return CoupledPlant(body, team, offsets,
                        _require(grasp, "mass_shares", "grasp"),
                        _require(grasp, "inertia_shares", "grasp"),
                        disturbance)


def build_reference(config):
    ref = _require(config, "reference", "")
    return SinusoidReference(_require(ref, "offset", "reference"),
                             _require(ref, "amplitude", "reference"),
                             _require(ref, "frequency", "reference"),
                             _require(ref, "phase", "reference"))


def _funnel_from(section, crumb):
    return Funnel(np.broadcast_to(_require(section, "rho0", crumb),
                                  (6,)).astype(float),
                  np.broadcast_to(_require(section, "rho_inf", crumb),
                                  (6,)).astype(float),
                  np.broadcast_to(_require(section, "decay", crumb),
                                  (6,)).astype(float))


def build_controller(config, plant, reference, kind=None):
    """Instantiates the requested (or default) controller section."""
    ctrl_cfg = _require(config, "controller", "")
    if kind is None:
        kind = ctrl_cfg.get("type")
        if kind is None:
            raise ScenarioError(
                "scenario has no controller.type default; pass the "
                "controller explicitly")
    if kind not in ("adaptive", "funnel"):
        raise ScenarioError("unknown controller kind %r" % kind)
    if kind not in ctrl_cfg:
        raise ScenarioError("scenario has no [controller.%s] section" % kind)
    section = ctrl_cfg[kind]
    pose0 = np.asarray(_require(_require(config, "initial", ""), "pose",
                                "initial"), dtype=float)
    if pose0.shape != (6,):
        raise ScenarioError("initial.pose must have 6 entries")
    v0 = np.asarray(config["initial"].get("velocity", np.zeros(6)), float)

    if kind == "adaptive":
        ctrl = AdaptiveController(
            plant, reference,
            pos_gain=np.broadcast_to(_require(section, "pos_gain",
                                              "controller.adaptive"), (3,)),
            att_gain=np.broadcast_to(_require(section, "att_gain",
                                              "controller.adaptive"), (3,)),
            vel_gain=np.broadcast_to(_require(section, "vel_gain",
                                              "controller.adaptive"), (6,)),
            agent_learn_rate=section.get("agent_learn_rate", 1.0),
            agent_dist_rate=section.get("agent_dist_rate", 1.0),
            object_learn_rate=section.get("object_learn_rate", 1.0),
            object_dist_rate=section.get("object_dist_rate", 1.0),
            squeeze=section.get("squeeze"))
        start = section.get("estimates", "zero")
        if start == "zero":
            est0 = None
        elif start == "true":
            est0 = ctrl.perfect_estimates()
        else:
            raise ScenarioError(
                "controller.adaptive.estimates must be 'zero' or 'true'")
        return ctrl, est0

    pose_gain = float(_require(section, "pose_gain", "controller.funnel"))
    vel_gain = float(_require(section, "vel_gain", "controller.funnel"))
    e_s0 = pose0 - reference.at(0.0).pose
    if ("pose" in section) == ("pose_auto" in section):
        raise ScenarioError("controller.funnel needs exactly one of "
                            "pose/pose_auto")
    if "pose" in section:
        pose_f = _funnel_from(section["pose"], "controller.funnel.pose")
    else:
        auto = section["pose_auto"]
        pose_f = pose_funnel_auto(
            e_s0, _require(auto, "rho_inf", "controller.funnel.pose_auto"),
            _require(auto, "decay", "controller.funnel.pose_auto"),
            _require(auto, "margin", "controller.funnel.pose_auto"),
            _require(auto, "pitch_cap", "controller.funnel.pose_auto"),
            reference_extremes(reference).pitch_max)
    if ("velocity" in section) == ("velocity_auto" in section):
        raise ScenarioError("controller.funnel needs exactly one of "
                            "velocity/velocity_auto")
    if "velocity" in section:
        vel_f = _funnel_from(section["velocity"],
                             "controller.funnel.velocity")
    else:
        # the feedback twist at t=0 sets the initial velocity error
        probe = FunnelController(plant, reference, pose_f,
                                 Funnel(np.ones(6), np.ones(6), np.zeros(6)),
                                 pose_gain, vel_gain)
        v_r0 = probe.reference_twist(0.0, pose0[3:], pose0).v_r
        auto = section["velocity_auto"]
        vel_f = velocity_funnel_auto(
            v0 - v_r0,
            _require(auto, "rho_inf", "controller.funnel.velocity_auto"),
            _require(auto, "decay", "controller.funnel.velocity_auto"),
            _require(auto, "pad", "controller.funnel.velocity_auto"))
    return FunnelController(plant, reference, pose_f, vel_f,
                            pose_gain, vel_gain), None


def build_run(config, controller=None, dt=None, duration=None, seed=None):
    """Everything ``simulate`` needs for one scenario run."""
    plant = build_plant(config, seed=seed)
    reference = build_reference(config)
    ctrl, est0 = build_controller(config, plant, reference, kind=controller)

    sim = _require(config, "simulation", "")
    initial = _require(config, "initial", "")
    pose0 = np.asarray(_require(initial, "pose", "initial"), dtype=float)
    if pose0.shape != (6,):
        raise ScenarioError("initial.pose must have 6 entries")
    v0 = np.asarray(initial.get("velocity", np.zeros(6)), dtype=float)
    q0 = initial.get("joints")
    kwargs = {
        "p0": pose0[:3], "eta0": pose0[3:], "v0": v0, "q0": q0,
        "est0": est0,
        "duration": float(duration if duration is not None
                          else _require(sim, "duration", "simulation")),
        "mode": sim.get("mode", "sampled"),
        "control_rate": sim.get("control_rate"),
        "substeps": int(sim.get("substeps", 1)),
        "dt": float(dt) if dt is not None else sim.get("dt"),
        "torque_limit": sim.get("torque_limit"),
        "name": config["name"],
        "seed": seed if seed is not None else config.get("seed"),
        "record_energy": bool(sim.get("record_energy", False)),
    }
    return SimpleNamespace(plant=plant, reference=reference, controller=ctrl,
                           kwargs=kwargs,
                           torque_limit=sim.get("torque_limit"),
                           duration=kwargs["duration"], name=config["name"])
