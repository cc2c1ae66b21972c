"""Decentralized adaptive pose tracking with quaternion attitude feedback.

Each agent runs the same law on locally available signals (object state,
its own joint state, the shared reference) and its own parameter estimates;
no estimates or forces are exchanged.  Writing ``e_p`` for the position
error, ``(e_phi, e_eps)`` for the scalar/vector parts of the error
quaternion ``quat_ref * conj(quat)``, and ``e = [e_p; -e_eps]``, the law
tracks the filtered velocity reference

    v_f = v_ref - K_f e,        e_vf = v_o - v_f

and commands, per agent,

    u_i = Y_i th_i + B_i d_i + D_i (Y_o th_oi + B_o d_oi - e - K_v e_vf)

where Y_i / Y_o are the agent / object regressors evaluated along the
filtered reference, B_i / B_o the known disturbance bases, D_i the agent's
wrench-distribution block, and (th_i, d_i, th_oi, d_oi) its estimates --
each agent carries its *own copy* of the object estimates, and the copies
stay identical because they see identical signals.  Estimates follow
gradient adaptation driven by e_vf (object) and J_i e_vf (agent).

Along exact dynamics the monitored storage function

    V = 0.5 |e_p|^2 + 2 (1 - e_phi) + 0.5 e_vf' Mt e_vf
        + sum of weighted squared estimate errors

decreases at the rate ``-e_p' Kp e_p - e_eps' Kz e_eps - e_vf' Kv e_vf``.

Only *structure* (grasp geometry, distribution blocks, regressor shapes,
disturbance bases) is used for control; true parameter values appear solely
in the storage-function monitor, which exists for verification.
"""

from types import SimpleNamespace

import numpy as np

from . import spatial
from .model.grasp import nullspace_filter


class AdaptiveController:
    """Adaptive tracking law plus estimate dynamics for the whole team.

    Gains: pos_gain (3,) and att_gain (3,) form the diagonal error-filter
    gain K_f; vel_gain (6,) is the diagonal of K_v.  Learning rates are
    scalars shared across agents.  ``squeeze`` is an optional (N, 6) array
    of internal-wrench setpoints applied through the grasp null space; it
    never moves the object.
    """

    uses_estimates = True

    def __init__(self, plant, reference, pos_gain, att_gain, vel_gain,
                 agent_learn_rate=1.0, agent_dist_rate=1.0,
                 object_learn_rate=1.0, object_dist_rate=1.0, squeeze=None):
        self.plant = plant
        self.reference = reference
        self.pos_gain = np.asarray(pos_gain, dtype=float)
        self.att_gain = np.asarray(att_gain, dtype=float)
        self.vel_gain = np.asarray(vel_gain, dtype=float)
        self.kf = np.concatenate([self.pos_gain, self.att_gain])
        self.agent_learn_rate = float(agent_learn_rate)
        self.agent_dist_rate = float(agent_dist_rate)
        self.object_learn_rate = float(object_learn_rate)
        self.object_dist_rate = float(object_dist_rate)
        self.squeeze = None if squeeze is None else np.asarray(squeeze, float)
        self.n_agents = plant.n_agents
        self.n_params = plant.team.n_params
        # per-agent estimate block: [th_i, d_i, th_oi, d_oi]
        self.block_size = self.n_params + 6 + 7 + 6

    @property
    def estimate_size(self):
        return self.n_agents * self.block_size

    def initial_estimates(self):
        """All-zero estimates (nothing assumed known)."""
        return np.zeros(self.estimate_size)

    def perfect_estimates(self):
        """True-parameter estimates (verification helper, not a controller
        capability -- real agents never see these values)."""
        blocks = np.concatenate([
            self.plant.team.theta,
            self.plant.disturbance.dbar_agents,
            np.broadcast_to(self.plant.body.theta, (self.n_agents, 7)),
            np.broadcast_to(self.plant.disturbance.dbar_object,
                            (self.n_agents, 6)),
        ], axis=-1)
        return blocks.reshape(-1)

    def unpack(self, est):
        """Split flat estimates into (th_a, d_a, th_o, d_o) agent blocks."""
        est = np.asarray(est, dtype=float)
        blocks = est.reshape(est.shape[:-1] + (self.n_agents, self.block_size))
        P = self.n_params
        return (blocks[..., :P], blocks[..., P:P + 6],
                blocks[..., P + 6:P + 13], blocks[..., P + 13:])

    def errors(self, t, kin):
        """Tracking errors and the filtered-velocity frame at time t."""
        ref = self.reference.at(t)
        e_p = kin.p - ref.p
        eq = spatial.quat_mul(ref.quat, spatial.quat_conj(kin.quat))
        e_phi, e_eps = eq[..., 0], eq[..., 1:]
        omega = kin.v_o[..., 3:]
        omega_ref = ref.v[..., 3:]
        e_w = omega - omega_ref
        e = np.concatenate([e_p, -e_eps], axis=-1)
        v_f = ref.v - self.kf * e
        e_vf = kin.v_o - v_f
        # error rates (exact, not differenced)
        eps_rate = (-0.5 * (e_phi[..., None] * e_w + np.cross(e_eps, e_w))
                    - np.cross(e_eps, omega_ref))
        e_rate = np.concatenate([kin.v_o[..., :3] - ref.v[..., :3],
                                 -eps_rate], axis=-1)
        vdot_f = ref.acc - self.kf * e_rate
        return SimpleNamespace(ref=ref, e_p=e_p, e_phi=e_phi, e_eps=e_eps,
                               e=e, e_vf=e_vf, v_f=v_f, vdot_f=vdot_f)

    def command(self, t, kin, est, eta=None):
        """Agent wrenches (..., N, 6), estimate rates, and diagnostics.

        ``eta`` (unwrapped euler angles) is accepted for interface parity
        with the funnel controller; quaternion feedback never needs it.
        """
        th_a, d_a, th_o, d_o = self.unpack(est)
        err = self.errors(t, kin)
        z_i = np.einsum("...nij,...j->...ni", kin.J, err.v_f)
        w_i = (np.einsum("...nij,...j->...ni", kin.J, err.vdot_f)
               + np.einsum("...nij,...j->...ni", kin.Jd, err.v_f))
        Y_a = self.plant.team.regressor(kin.q, kin.qd, z_i, w_i)
        B_a = self.plant.disturbance.agent_basis_diag(kin.q, kin.v_i, t)
        Y_o = self.plant.body.regressor(kin.R, kin.v_o[..., 3:],
                                        err.v_f, err.vdot_f)
        B_o = self.plant.disturbance.object_basis_diag(kin.v_o, t)
        feedback = err.e + self.vel_gain * err.e_vf
        shared = (np.einsum("...ia,...na->...ni", Y_o, th_o)
                  + B_o[..., None, :] * d_o
                  - feedback[..., None, :])
        u = (np.einsum("...nia,...na->...ni", Y_a, th_a)
             + B_a * d_a
             + np.einsum("...nij,...nj->...ni", kin.D, shared))
        if self.squeeze is not None:
            u = u + nullspace_filter(kin.J, kin.D,
                                     np.broadcast_to(self.squeeze, u.shape))
        # gradient adaptation
        e_vi = np.einsum("...nij,...j->...ni", kin.J, err.e_vf)
        rates = np.concatenate([
            -self.agent_learn_rate
            * np.einsum("...nia,...ni->...na", Y_a, e_vi),
            -self.agent_dist_rate * B_a * e_vi,
            np.broadcast_to(
                (-self.object_learn_rate
                 * np.einsum("...ia,...i->...a", Y_o, err.e_vf))[..., None, :],
                th_o.shape),
            np.broadcast_to(
                (-self.object_dist_rate
                 * (B_o * err.e_vf))[..., None, :], d_o.shape),
        ], axis=-1)
        est_rate = rates.reshape(np.shape(est))
        info = SimpleNamespace(
            e_p=err.e_p, e_phi=err.e_phi, e_eps=err.e_eps, e_vf=err.e_vf,
            storage_rate=-(
                np.einsum("...i,...i->...", err.e_p,
                          self.pos_gain * err.e_p)
                + np.einsum("...i,...i->...", err.e_eps,
                            self.att_gain * err.e_eps)
                + np.einsum("...i,...i->...", err.e_vf,
                            self.vel_gain * err.e_vf)))
        return u, est_rate, info

    def estimate_errors(self, est):
        """Norms of the (parameter, disturbance) estimate errors against the
        true plant values (verification helper, like ``storage``)."""
        th_a, d_a, th_o, d_o = self.unpack(est)
        lead = np.shape(est)[:-1]
        th_err = np.concatenate([
            (th_a - self.plant.team.theta).reshape(lead + (-1,)),
            (th_o - self.plant.body.theta).reshape(lead + (-1,)),
        ], axis=-1)
        d_err = np.concatenate([
            (d_a - self.plant.disturbance.dbar_agents).reshape(lead + (-1,)),
            (d_o - self.plant.disturbance.dbar_object).reshape(lead + (-1,)),
        ], axis=-1)
        return (np.linalg.norm(th_err, axis=-1),
                np.linalg.norm(d_err, axis=-1))

    def storage(self, t, kin, est):
        """Monitored storage function (uses true parameters; verification
        only).  Returns (V, analytic dV/dt, object-copy spread)."""
        th_a, d_a, th_o, d_o = self.unpack(est)
        err = self.errors(t, kin)
        Mt = self.plant.coupled_mass(kin)
        th_a_err = th_a - self.plant.team.theta
        d_a_err = d_a - self.plant.disturbance.dbar_agents
        th_o_err = th_o[..., 0, :] - self.plant.body.theta
        d_o_err = d_o[..., 0, :] - self.plant.disturbance.dbar_object
        spread = max(np.abs(th_o - th_o[..., :1, :]).max(),
                     np.abs(d_o - d_o[..., :1, :]).max())

        def sq(x):
            return np.einsum("...i,...i->...", x, x)

        V = (0.5 * sq(err.e_p) + 2.0 * (1.0 - err.e_phi)
             + 0.5 * np.einsum("...i,...ij,...j->...", err.e_vf, Mt, err.e_vf)
             + 0.5 / self.agent_learn_rate * sq(th_a_err).sum(axis=-1)
             + 0.5 / self.agent_dist_rate * sq(d_a_err).sum(axis=-1)
             + 0.5 / self.object_learn_rate * sq(th_o_err)
             + 0.5 / self.object_dist_rate * sq(d_o_err))
        rate = -(np.einsum("...i,...i->...", err.e_p, self.pos_gain * err.e_p)
                 + np.einsum("...i,...i->...", err.e_eps,
                             self.att_gain * err.e_eps)
                 + np.einsum("...i,...i->...", err.e_vf,
                             self.vel_gain * err.e_vf))
        return V, rate, spread
