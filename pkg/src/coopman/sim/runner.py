"""Fixed-step closed-loop simulation of the coupled plant.

Two control timing modes:

* ``sampled`` -- the controller runs at ``control_rate``; its wrench command
  and estimate rates are held constant over each control period while the
  plant integrates with ``substeps`` RK4 steps per period (holding the
  estimate rate constant makes the estimate update an explicit Euler step,
  matching a discrete implementation).
* ``continuous`` -- the controller is evaluated inside every RK4 stage, so
  the closed loop is integrated as one smooth vector field with step ``dt``
  (the idealized analysis setting; also what the convergence-order and
  energy audits exercise).

The integrator state stacks [position(3), quaternion(4), object twist(6),
agent coordinates (free effectors only), controller estimates].  The
quaternion is renormalized after every step.  Euler angles are tracked
unwrapped (continuous across the +-pi seam) for funnel feedback and
telemetry; the attitude itself always lives on the quaternion.

A ``FunnelViolation`` anywhere (control sample or RK4 stage) aborts the run
and is reported; so does a ``WorkspaceViolation`` (an arm dragged to the
edge of its reach).  Torque-limit crossings are counted but do not abort.
"""

import time
from dataclasses import dataclass
from types import SimpleNamespace
from typing import Optional

import numpy as np

from .. import spatial
from ..errors import FunnelViolation, ScenarioError
from ..model.agents import WorkspaceViolation


@dataclass
class RunReport:
    """Summary of one simulation run (JSON-friendly)."""

    name: str
    controller: str
    mode: str
    dt: float
    control_period: float
    duration: float
    periods: int
    seed: Optional[int] = None
    completed: bool = False
    wall_time: float = 0.0
    failure: Optional[dict] = None
    torque_limit: Optional[list] = None
    max_torque: Optional[list] = None
    torque_violations: int = 0
    max_pose_margin: Optional[float] = None
    max_velocity_margin: Optional[float] = None
    final_position_error: Optional[float] = None
    final_attitude_error: Optional[float] = None
    final_pose_error: Optional[list] = None
    storage_nonincreasing: Optional[bool] = None
    max_storage_rate: Optional[float] = None
    max_estimate_norm: Optional[float] = None
    energy_drift: Optional[float] = None

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class RunResult:
    time: np.ndarray
    columns: dict
    report: RunReport

    def column(self, name):
        return self.columns[name]


class _Coast:
    """Zero-wrench stand-in controller (plant audits)."""

    uses_estimates = False
    estimate_size = 0

    def __init__(self, n_agents):
        self.n_agents = n_agents

    def initial_estimates(self):
        return np.zeros(0)

    def command(self, t, kin, est, eta):
        return (np.zeros((self.n_agents, 6)), np.zeros(0),
                SimpleNamespace())


class _Layout:
    """Index bookkeeping for the stacked integrator state."""

    def __init__(self, plant, est_size):
        self.n_q = plant.joint_state_size
        self.n_est = est_size
        self.size = 13 + self.n_q + self.n_est

    def split(self, y):
        q_end = 13 + self.n_q
        return (y[:3], y[3:7], y[7:13], y[13:q_end], y[q_end:])

    def pack(self, p, quat, v, q_state, est):
        return np.concatenate([p, quat, v, q_state, est])


def _rk4(flow, t, y, h):
    k1 = flow(t, y)
    k2 = flow(t + 0.5 * h, y + (0.5 * h) * k1)
    k3 = flow(t + 0.5 * h, y + (0.5 * h) * k2)
    k4 = flow(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def simulate(plant, controller, p0, eta0, v0=None, q0=None, est0=None,
             quat0=None, duration=10.0, mode="sampled", control_rate=None,
             substeps=1, dt=None, torque_limit=None, name="", seed=None,
             record_energy=False):
    """Integrates the closed loop and returns telemetry plus a report.

    ``controller`` may be None to coast (zero wrenches).  ``eta0`` anchors
    euler unwrapping and must describe the same attitude as the initial
    reference convention; the initial quaternion is built from it unless
    ``quat0`` overrides it directly.
    """
    if controller is None:
        controller = _Coast(plant.n_agents)
    if mode == "sampled":
        if not control_rate or control_rate <= 0:
            raise ScenarioError("sampled mode needs a positive control_rate")
        period = 1.0 / float(control_rate)
        substeps = int(substeps)
        if substeps < 1:
            raise ScenarioError("substeps must be >= 1")
        h = period / substeps
    elif mode == "continuous":
        if not dt or dt <= 0:
            raise ScenarioError("continuous mode needs a positive dt")
        period = h = float(dt)
        substeps = 1
    else:
        raise ScenarioError("unknown timing mode %r" % mode)

    eta0 = np.asarray(eta0, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    v0 = np.zeros(6) if v0 is None else np.asarray(v0, dtype=float)
    if quat0 is None:
        quat0 = spatial.quat_from_euler(eta0, canonical=False)
    else:
        quat0 = spatial.quat_normalize(quat0)
    q_state0 = plant.initial_joint_state(p0, quat0, q0)
    est = (controller.initial_estimates() if est0 is None
           else np.asarray(est0, dtype=float))
    layout = _Layout(plant, est.size)
    y = layout.pack(p0, quat0, v0, q_state0, est)

    periods = int(round(duration / period))
    n_rows = periods + 1
    n, dof = plant.n_agents, plant.team.dof
    cols = {
        "pose": np.zeros((n_rows, 6)),
        "quat": np.zeros((n_rows, 4)),
        "v_o": np.zeros((n_rows, 6)),
        "u": np.zeros((n_rows, n, 6)),
        "tau": np.zeros((n_rows, n, dof)),
    }
    if record_energy:
        cols["energy"] = np.zeros(n_rows)
    diag_cols = None

    limit = None if torque_limit is None else np.asarray(torque_limit, float)
    report = RunReport(
        name=name, controller=type(controller).__name__, mode=mode, dt=h,
        control_period=period, duration=periods * period, periods=periods,
        seed=seed,
        torque_limit=None if limit is None else limit.tolist())
    has_storage = hasattr(controller, "storage")
    has_est_err = hasattr(controller, "estimate_errors")
    max_tau = np.zeros(dof)
    max_margin_s = max_margin_v = 0.0
    max_est = 0.0
    max_storage_rate = -np.inf if has_storage else None
    start = time.perf_counter()
    eta_prev = eta0.copy()
    rows = 0
    failure = None

    def closed_flow(t, y_, eta_anchor):
        p, quat, v, qs, es = layout.split(y_)
        kin = plant.kin_state(p, quat, v, qs)
        eta = spatial.unwrap_near(
            spatial.euler_from_rotmat(kin.R, strict=False), eta_anchor)
        u, est_rate, _ = controller.command(t, kin, es, eta)
        vdot = plant.object_accel(kin, t, u)
        qsd = kin.v_i.reshape(-1) if layout.n_q else np.zeros(0)
        return layout.pack(v[:3], spatial.quat_derivative(kin.quat, v[3:]),
                           vdot, qsd, est_rate)

    def frozen_flow(t, y_, u, est_rate):
        p, quat, v, qs, _ = layout.split(y_)
        kin = plant.kin_state(p, quat, v, qs)
        vdot = plant.object_accel(kin, t, u)
        qsd = kin.v_i.reshape(-1) if layout.n_q else np.zeros(0)
        return layout.pack(v[:3], spatial.quat_derivative(kin.quat, v[3:]),
                           vdot, qsd, est_rate)

    k = 0
    try:
        for k in range(n_rows):
            t = k * period
            p, quat, v, qs, es = layout.split(y)
            kin = plant.kin_state(p, quat, v, qs)
            eta = spatial.unwrap_near(
                spatial.euler_from_rotmat(kin.R, strict=False), eta_prev)
            eta_prev = eta
            u, est_rate, info = controller.command(t, kin, es, eta)
            tau = plant.team.torques(kin.q, u)

            cols["pose"][k, :3], cols["pose"][k, 3:] = p, eta
            cols["quat"][k] = kin.quat
            cols["v_o"][k] = v
            cols["u"][k] = u
            cols["tau"][k] = tau
            if record_energy:
                cols["energy"][k] = plant.energy(kin)
            if diag_cols is None:
                diag_cols = [f for f in ("e_p", "e_eps", "e_phi", "e_vf",
                                         "e_s", "xi_s", "e_v", "xi_v")
                             if hasattr(info, f)]
                for f in diag_cols:
                    val = np.asarray(getattr(info, f))
                    cols[f] = np.zeros((n_rows,) + val.shape)
                if has_storage:
                    cols["storage"] = np.zeros(n_rows)
                    cols["storage_rate"] = np.zeros(n_rows)
                if has_est_err:
                    cols["est_param_err"] = np.zeros(n_rows)
                    cols["est_dist_err"] = np.zeros(n_rows)
            for f in diag_cols:
                cols[f][k] = getattr(info, f)
            if has_est_err:
                cols["est_param_err"][k], cols["est_dist_err"][k] = \
                    controller.estimate_errors(es)
            if has_storage:
                V, rate, spread = controller.storage(t, kin, es)
                cols["storage"][k] = V
                cols["storage_rate"][k] = rate
                max_storage_rate = max(max_storage_rate, float(rate))
                if spread > 1e-9:
                    raise ScenarioError(
                        "object-estimate copies diverged (spread %.3e)"
                        % spread)
            max_tau = np.maximum(max_tau, np.abs(tau).max(axis=0))
            if limit is not None and np.any(np.abs(tau) > limit):
                report.torque_violations += 1
            if hasattr(info, "margin_s"):
                max_margin_s = max(max_margin_s, float(info.margin_s))
                max_margin_v = max(max_margin_v, float(info.margin_v))
            if es.size:
                max_est = max(max_est, float(np.abs(es).max()))
            rows = k + 1
            if k == periods:
                break

            if mode == "continuous":
                y = _rk4(lambda tt, yy: closed_flow(tt, yy, eta), t, y, h)
                y[3:7] = spatial.quat_normalize(y[3:7])
            else:
                for s in range(substeps):
                    y = _rk4(lambda tt, yy: frozen_flow(tt, yy, u, est_rate),
                             t + s * h, y, h)
                    y[3:7] = spatial.quat_normalize(y[3:7])
        report.completed = failure is None
    except FunnelViolation as exc:
        failure = {"type": "funnel", "message": str(exc), "t": exc.t,
                   "channel": exc.channel, "value": exc.value,
                   "bound": exc.bound}
        report.failure = failure
    except WorkspaceViolation as exc:
        failure = {"type": "workspace", "message": str(exc),
                   "t": float(k * period)}
        report.failure = failure
    report.wall_time = time.perf_counter() - start

    for key in cols:
        cols[key] = cols[key][:rows]
    tgrid = np.arange(rows) * period

    report.max_torque = max_tau.tolist()
    if "e_s" in cols and rows:
        report.max_pose_margin = max_margin_s
        report.max_velocity_margin = max_margin_v
        report.final_pose_error = cols["e_s"][-1].tolist()
    if "e_p" in cols and rows:
        report.final_position_error = float(
            np.linalg.norm(cols["e_p"][-1]))
        report.final_attitude_error = float(
            np.linalg.norm(cols["e_eps"][-1]))
    if has_storage and rows:
        report.storage_nonincreasing = bool(max_storage_rate <= 0.0)
        report.max_storage_rate = float(max_storage_rate)
        report.max_estimate_norm = max_est
    if record_energy and rows:
        e0 = cols["energy"][0]
        report.energy_drift = float(
            np.abs(cols["energy"] - e0).max() / max(1.0, abs(e0)))
    return RunResult(time=tgrid, columns=cols, report=report)
