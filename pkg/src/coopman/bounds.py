"""Certified closed-loop envelopes for the funnel controller.

The funnel controller keeps every normalized error strictly inside (-1, 1),
and that confinement alone -- no model knowledge -- implies computable
worst-case bounds on the transformed errors, the object twist, each agent's
end-effector speed and each agent's commanded wrench.  This module evaluates
that chain of inequalities from the funnel shapes, the two gains, and
worst-case constants of the coupled model over the reachable region, and
uses it to certify (or honestly refuse to certify) a joint-torque budget.

The barrier slope grows like exp(eps) and the wrench bound like a second
exponential on top of that, so every derived quantity is carried as a
natural logarithm.  Linear values and decimal logs are views; an infinite
linear value simply means the bound exceeds float64 range, which is itself
faithful output (the guarantee still holds, it is just astronomically thin).
"""

import math
from dataclasses import dataclass
from types import SimpleNamespace

import numpy as np

from . import spatial
from .ctrl_ppc import barrier
from .errors import FunnelViolation, InfeasibleBounds, NoFeasibleGains
from .model.agents import WorkspaceViolation
from .model.grasp import grasp_map

LN2 = math.log(2.0)
LN10 = math.log(10.0)
SQRT2 = math.sqrt(2.0)
SQRT6 = math.sqrt(6.0)

# ||d/dt T(eta)|| <= TILT_RATE_COEFF * ||eta_dot||: the yaw partial of the
# euler-rate matrix has spectral norm sqrt(2), the pitch partial norm 1, the
# roll partial vanishes, and |psi_dot| + |theta_dot| <= sqrt(2) ||eta_dot||.
TILT_RATE_COEFF = 2.0

# Any joint angle returned by the planar inverse kinematics lies in
# (-pi, pi], so ||q_i|| <= pi * sqrt(3) for the 3-link arms.
_PLANAR_JOINT_NORM_CAP = math.pi * math.sqrt(3.0)


def _log(x):
    """Natural log mapping 0 -> -inf and inf -> inf without warnings."""
    x = float(x)
    if x < 0.0:
        raise ValueError("expected a nonnegative quantity")
    if x == 0.0:
        return -math.inf
    if math.isinf(x):
        return math.inf
    return math.log(x)


def _exp(logx):
    """Linear view of a natural-log quantity, saturating at inf."""
    if logx > 709.0:
        return math.inf
    return math.exp(logx)


def _log_barrier_slope(eps):
    """log of r(eps) = (e^eps + 1)^2 / (2 e^eps), stable for any eps >= 0."""
    eps = float(eps)
    if math.isinf(eps):
        return math.inf
    return eps - LN2 + 2.0 * math.log1p(math.exp(-min(eps, 700.0)))


def _logaddexp(*terms):
    out = -math.inf
    for term in terms:
        out = np.logaddexp(out, term)
    return float(out)


class BoundsReport:
    """Ordered map of named nonnegative bounds stored as natural logs."""

    def __init__(self, logs):
        self._logs = dict(logs)

    def names(self):
        return list(self._logs)

    def log(self, name):
        return self._logs[name]

    def log10(self, name):
        return self._logs[name] / LN10

    def value(self, name):
        return _exp(self._logs[name])

    def to_dict(self):
        return {name: {"value": self.value(name), "log10": self.log10(name)}
                for name in self._logs}

    def as_text(self):
        lines = []
        for name in self._logs:
            lines.append("%s = %.9g" % (name, self.value(name)))
            lines.append("%s_log10 = %.9g" % (name, self.log10(name)))
        return "\n".join(lines) + "\n"


@dataclass
class ModelEnvelope:
    """Worst-case constants of the coupled model over the reachable region.

    Sampled quantities are maxima/minima over a seeded sweep of the funnel
    region; analytic ones hold everywhere.  ``arm_map_norm`` converts a
    wrench-norm bound into joint-torque norms (ones for free effectors,
    whose commanded wrench is the actuation itself).
    """

    mass_min: float
    mass_max: float
    coriolis_coeff: float
    gravity_max: float
    load_map_norm: np.ndarray
    twist_map_norm: np.ndarray
    arm_map_norm: np.ndarray
    dist_agent_norm: np.ndarray
    dist_object_norm: float
    joint_norm_init: np.ndarray
    joint_norm_cap: float
    samples: int


def _region_kinematics(plant, p, quat, v_o, q_state):
    """kin_state over a sample batch, dropping unreachable poses."""
    count = p.shape[0]
    try:
        return plant.kin_state(p, quat, v_o, q_state), count
    except WorkspaceViolation:
        keep = []
        for k in range(count):
            qk = q_state[k] if q_state.size else q_state
            try:
                plant.kin_state(p[k], quat[k], v_o[k], qk)
            except WorkspaceViolation:
                continue
            keep.append(k)
        if len(keep) < 0.8 * count:
            raise InfeasibleBounds(
                "only %d of %d sampled funnel poses are reachable; the "
                "funnel region leaves the team workspace" % (len(keep), count))
        keep = np.asarray(keep)
        qk = q_state[keep] if q_state.size else q_state
        return plant.kin_state(p[keep], quat[keep], v_o[keep], qk), len(keep)


def sample_model_envelope(plant, reference, pose_funnel, duration,
                          n_samples=2000, seed=0, q0=None):
    """Sweeps the funnel-reachable pose region for worst-case model constants.

    Poses are drawn uniformly inside the pose funnel around the reference;
    free-effector joint coordinates are drawn over a full period of their
    mass-matrix modulation.  The coriolis coefficient is certified per
    sample: the coriolis matrix is linear in the twist, so its norm on the
    six basis twists bounds it for every twist by Cauchy-Schwarz.
    """
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.0, duration, n_samples)
    ref = reference.at(t)
    rho = pose_funnel.value(t)
    pose = ref.pose + rho * rng.uniform(-1.0, 1.0, (n_samples, 6))
    p = pose[:, :3]
    quat = spatial.quat_from_euler(pose[:, 3:], canonical=False)
    if plant.planar:
        q_state = np.zeros(0)
    else:
        q_state = rng.uniform(-np.pi, np.pi,
                              (n_samples, plant.joint_state_size))

    zero_v = np.zeros((n_samples, 6))
    kin0, kept = _region_kinematics(plant, p, quat, zero_v, q_state)
    Mt = plant.coupled_terms(kin0, 0.0)[0]
    eigs = np.linalg.eigvalsh(Mt)
    mass_min = float(eigs[:, 0].min())
    mass_max = float(eigs[:, -1].max())

    # Gravity wrench of the coupled system (disturbances are bounded
    # separately because they scale with speed).
    gi = plant.team.task_matrices(kin0.q, kin0.qd)[2]
    gt = plant.body.gravity_wrench() + np.einsum("...nji,...nj->...i",
                                                 kin0.J, gi)
    gravity_max = float(np.linalg.norm(gt, axis=-1).max())

    load_map_norm = np.linalg.svd(kin0.D, compute_uv=False)[..., 0].max(axis=0)
    if plant.planar:
        arm_jac = plant.team.jacobian(kin0.q)
        arm_map_norm = np.linalg.svd(
            arm_jac, compute_uv=False)[..., 0].max(axis=0)
    else:
        arm_map_norm = np.ones(plant.n_agents)

    # Coriolis coefficient: ||Ct(x, v)|| <= sqrt(sum_k ||Ct(x, e_k)||^2) ||v||.
    n_kept = Mt.shape[0]
    basis = np.tile(np.eye(6), (n_kept, 1))

    def rep(a):
        return np.repeat(a, 6, axis=0)

    if plant.planar:
        kin_b, _ = _region_kinematics(plant, rep(kin0.p), rep(kin0.quat),
                                      basis, q_state)
    else:
        kin_b = plant.kin_state(rep(kin0.p), rep(kin0.quat), basis,
                                rep(kin0.q).reshape(n_kept * 6, -1))
    Cb = plant.coupled_terms(kin_b, 0.0)[1]
    cnorm = np.linalg.svd(Cb, compute_uv=False)[..., 0].reshape(-1, 6)
    coriolis_coeff = float(np.sqrt((cnorm ** 2).sum(axis=1)).max())

    if q0 is None:
        joint_norm_init = np.zeros(plant.n_agents)
    else:
        joint_norm_init = np.linalg.norm(
            np.asarray(q0, dtype=float).reshape(plant.n_agents, -1), axis=-1)
    return ModelEnvelope(
        mass_min=mass_min, mass_max=mass_max,
        coriolis_coeff=coriolis_coeff, gravity_max=gravity_max,
        load_map_norm=np.asarray(load_map_norm, dtype=float),
        twist_map_norm=np.linalg.norm(plant.offsets_body, axis=-1) + 1.0,
        arm_map_norm=np.asarray(arm_map_norm, dtype=float),
        dist_agent_norm=np.linalg.norm(plant.disturbance.dbar_agents, axis=-1),
        dist_object_norm=float(np.linalg.norm(plant.disturbance.dbar_object)),
        joint_norm_init=joint_norm_init,
        joint_norm_cap=_PLANAR_JOINT_NORM_CAP if plant.planar else math.inf,
        samples=kept)


def reference_extremes(reference):
    """Analytic pose/rate extremes of a sinusoid reference."""
    amp = np.abs(reference.amplitude)
    rate_amp = amp * np.abs(reference.frequency)
    return SimpleNamespace(
        pose_norm_max=float(np.linalg.norm(np.abs(reference.offset) + amp)),
        rate_norm_max=float(np.linalg.norm(rate_amp)),
        pitch_max=float(abs(reference.offset[4]) + amp[4]))


def funnel_bound_chain(plant, controller, envelope, duration,
                       pose0, v0=None):
    """Evaluates the full inequality chain for one funnel-controlled run.

    Returns a :class:`BoundsReport` whose per-agent keys
    ``speed_bound_a{i}`` and ``wrench_bound_a{i}`` bound the end-effector
    speed and commanded wrench norms along any run that starts inside the
    funnels at ``pose0`` / ``v0``.  Raises ``FunnelViolation`` when the
    initial errors are not strictly inside, ``InfeasibleBounds`` when the
    total pitch can reach the euler-rate singularity.
    """
    pose0 = np.asarray(pose0, dtype=float)
    v0 = np.zeros(6) if v0 is None else np.asarray(v0, dtype=float)
    g_s, g_v = controller.pose_gain, controller.vel_gain
    pf, vf = controller.pose_funnel, controller.vel_funnel
    ext = reference_extremes(controller.reference)

    # Total pitch excursion must stay clear of the representation
    # singularity for the pose-rate map to stay bounded.
    theta_total = ext.pitch_max + float(pf.rho0[4])
    if theta_total >= np.pi / 2 - 1e-9:
        raise InfeasibleBounds(
            "reference pitch %.3f plus pitch funnel %.3f reaches pi/2"
            % (ext.pitch_max, float(pf.rho0[4])))
    rate_map_max = 1.0 / math.sqrt(1.0 - math.sin(theta_total))

    tw = controller.reference_twist(0.0, pose0[3:], pose0)
    eps_s0 = float(np.linalg.norm(barrier(tw.xi_s)[0]))
    e_v0 = v0 - tw.v_r
    xi_v0 = vf.check(0.0, e_v0, "initial velocity")[1]
    eps_v0 = float(np.linalg.norm(barrier(xi_v0)[0]))

    rho_s0_max = float(pf.rho0.max())
    rho_sinf_min = float(pf.rho_inf.min())
    rho_v0_max = float(vf.rho0.max())
    rho_vinf_min = float(vf.rho_inf.min())
    drop_s = float((pf.decay * (pf.rho0 - pf.rho_inf)).max())
    drop_v = float((vf.decay * (vf.rho0 - vf.rho_inf)).max())

    # --- pose stage: transformed error, barrier slope, feedback twist ---
    drive_s = (SQRT6 * rate_map_max * rho_v0_max + ext.rate_norm_max
               + SQRT6 * drop_s)
    eps_s = max(eps_s0, rho_s0_max * drive_s / (2.0 * g_s))
    xi_s = math.tanh(eps_s / 2.0)
    log_r_s = _log_barrier_slope(eps_s)
    log_v_r = _log(g_s * SQRT2 * eps_s / rho_sinf_min) + log_r_s
    log_v_o = _logaddexp(log_v_r, _log(SQRT6 * rho_v0_max))
    log_speed = np.log(envelope.twist_map_norm) + log_v_o

    # --- feedback-twist rate: product rule over the rate map, the funnel
    # normalization and the barrier slope, each replaced by its extreme ---
    log_xi_s_rate = (_logaddexp(_log(rate_map_max) + log_v_o,
                                _log(ext.rate_norm_max + drop_s))
                     - _log(rho_sinf_min))
    log_vr_rate = _logaddexp(
        _log(g_s * SQRT2 * TILT_RATE_COEFF * rate_map_max / rho_sinf_min)
        + log_v_o + log_r_s + _log(eps_s),
        _log(g_s * SQRT2 * drop_s / rho_sinf_min ** 2) + log_r_s + _log(eps_s),
        _log(g_s * SQRT2 / rho_sinf_min) + 2.0 * log_r_s + log_xi_s_rate
        + _log(xi_s * eps_s + 1.0))

    # --- disturbance and velocity stage ---
    joint_norm = np.minimum(
        envelope.joint_norm_init + np.array([_exp(s) for s in log_speed])
        * duration, envelope.joint_norm_cap)
    dist_terms = []
    if envelope.dist_object_norm > 0:
        dist_terms.append(_log(2.0 * envelope.dist_object_norm) + log_v_o)
    for i in range(plant.n_agents):
        mapped = envelope.dist_agent_norm[i] * envelope.twist_map_norm[i]
        if mapped > 0:
            dist_terms.append(_logaddexp(
                _log(mapped) + _log(joint_norm[i]),
                _log(mapped) + log_speed[i]))
    log_dist = _logaddexp(*dist_terms) if dist_terms else -math.inf
    log_model_load = _logaddexp(
        _log(envelope.coriolis_coeff) + 2.0 * log_v_o,
        _log(envelope.gravity_max), log_dist) - _log(envelope.mass_min)
    log_drive_v = _logaddexp(_log(SQRT6 * drop_v), log_vr_rate,
                             log_model_load)
    log_eps_v = max(_log(eps_v0),
                    _log(rho_v0_max * envelope.mass_max / (2.0 * g_v))
                    + log_drive_v)
    eps_v = _exp(log_eps_v)
    log_r_v = _log_barrier_slope(eps_v)
    log_wrench = (_log(g_v / rho_vinf_min) + np.log(envelope.load_map_norm)
                  + log_r_v + log_eps_v)

    logs = {
        "pitch_total": _log(theta_total),
        "pose_rate_map": _log(rate_map_max),
        "pose_barrier": _log(eps_s),
        "pose_barrier_slope": log_r_s,
        "feedback_twist": log_v_r,
        "object_twist": log_v_o,
        "feedback_twist_rate": log_vr_rate,
        "disturbance_load": log_dist,
        "velocity_barrier": log_eps_v,
        "velocity_barrier_slope": log_r_v,
    }
    for i in range(plant.n_agents):
        logs["speed_bound_a%d" % (i + 1)] = float(log_speed[i])
    for i in range(plant.n_agents):
        logs["wrench_bound_a%d" % (i + 1)] = float(log_wrench[i])
    return BoundsReport(logs)


def torque_wrench_limits(envelope, torque_limit):
    """Largest per-agent wrench norms guaranteed to respect joint limits.

    The tightest joint budget divided by the worst arm-Jacobian norm keeps
    every |torque_j| <= limit_j whenever the commanded wrench norm stays
    under the returned values.
    """
    limit = float(np.asarray(torque_limit, dtype=float).min())
    if limit <= 0:
        raise InfeasibleBounds("torque limits must be positive")
    return limit / envelope.arm_map_norm


def certify_wrench_budget(report, wrench_limits):
    """Compares the wrench bounds against per-agent wrench-norm budgets."""
    wrench_limits = np.asarray(wrench_limits, dtype=float)
    ratios = np.array([report.log10("wrench_bound_a%d" % (i + 1))
                       - math.log10(wrench_limits[i])
                       for i in range(wrench_limits.size)])
    worst = int(np.argmax(ratios))
    return SimpleNamespace(feasible=bool(ratios[worst] <= 0.0),
                           worst_log10=float(ratios[worst]),
                           binding_agent=worst + 1,
                           ratios_log10=ratios)


def verify_run_bounds(plant, result, report):
    """Checks logged telemetry against the certified envelopes.

    End-effector twists are reconstructed from the logged object state
    through the rigid-grasp map; wrench norms come straight from the logged
    commands.  Comparison is linear with inf-saturated bounds, so a bound
    whose log exceeds float range still certifies every finite sample.
    """
    quat = result.columns["quat"]
    v_o = result.columns["v_o"]
    u = result.columns["u"]
    J = grasp_map(spatial.rotmat_from_quat(quat), plant.offsets_body)[0]
    speed = np.linalg.norm(np.einsum("knij,kj->kni", J, v_o), axis=-1)
    wrench = np.linalg.norm(u, axis=-1)
    speed_bound = np.array([report.value("speed_bound_a%d" % (i + 1))
                            for i in range(plant.n_agents)])
    wrench_bound = np.array([report.value("wrench_bound_a%d" % (i + 1))
                             for i in range(plant.n_agents)])
    speed_bad = int((speed > speed_bound).sum())
    wrench_bad = int((wrench > wrench_bound).sum())
    return SimpleNamespace(
        ok=speed_bad == 0 and wrench_bad == 0,
        speed_violations=speed_bad, wrench_violations=wrench_bad,
        speed_max=speed.max(axis=0), wrench_max=wrench.max(axis=0),
        speed_bound=speed_bound, wrench_bound=wrench_bound)


def tune_gains(build_report, wrench_limits, pose_gain_log10=(-4.0, 2.0),
               vel_gain_log10=(-2.0, 6.0), grid=13, rounds=3):
    """Deterministic refined grid search certifying a wrench budget.

    ``build_report(pose_gain, vel_gain)`` must rebuild any gain-dependent
    funnels and return the bound chain; gain pairs whose chain is
    infeasible are skipped.  Returns the best feasible gains, or raises
    ``NoFeasibleGains`` carrying the least-violating candidate, since both
    bounds grow without bound in every gain direction away from a finite
    optimum.
    """
    wrench_limits = np.asarray(wrench_limits, dtype=float)

    def evaluate(gs_log10, gv_log10):
        try:
            report = build_report(10.0 ** gs_log10, 10.0 ** gv_log10)
        except (InfeasibleBounds, FunnelViolation):
            return None
        return certify_wrench_budget(report, wrench_limits)

    spans = (pose_gain_log10, vel_gain_log10)
    center = [np.mean(pose_gain_log10), np.mean(vel_gain_log10)]
    width = [np.ptp(pose_gain_log10), np.ptp(vel_gain_log10)]
    best = None
    for _ in range(rounds):
        gs_axis = np.linspace(center[0] - width[0] / 2,
                              center[0] + width[0] / 2, grid)
        gv_axis = np.linspace(center[1] - width[1] / 2,
                              center[1] + width[1] / 2, grid)
        gs_axis = np.clip(gs_axis, *spans[0])
        gv_axis = np.clip(gv_axis, *spans[1])
        for gs in gs_axis:
            for gv in gv_axis:
                cert = evaluate(gs, gv)
                if cert is None:
                    continue
                if best is None or cert.worst_log10 < best.worst_log10:
                    best = SimpleNamespace(
                        pose_gain=10.0 ** gs, vel_gain=10.0 ** gv,
                        worst_log10=cert.worst_log10,
                        binding_agent=cert.binding_agent)
                    center = [gs, gv]
        width = [w * 2.0 / (grid - 1) * 2.0 for w in width]
    if best is None:
        raise NoFeasibleGains(
            "no gain pair in the search box yields a feasible bound chain")
    if best.worst_log10 > 0.0:
        raise NoFeasibleGains(
            "wrench bound exceeds the budget by 10^%.3g at the best gains "
            "(agent %d binding)" % (best.worst_log10, best.binding_agent),
            best=best)
    return best
