"""Coupled object-agents dynamics under a rigid grasp.

Eliminating the interaction wrenches with the rigid-grasp constraint
``v_i = J_i(q) v_o`` gives a single 6-dof system in the object twist:

    Mt(x) vdot_o + Ct(x, v) v_o + gt(x) + dt(x, t) = sum_i J_i^T u_i

with Mt = M_o + sum J_i^T M_i J_i, Ct = C_o + sum J_i^T (C_i J_i + M_i Jdot_i),
etc.  Mt is symmetric positive definite and Mt_dot - 2 Ct is skew-symmetric
(each agent contribution inherits the property from its joint-space model).

``kin_state`` resolves everything configuration-dependent once per
evaluation; the heavy assembly then runs batched over agents.
"""

import numpy as np

from ..spatial import quat_derivative, rotmat_from_quat, quat_normalize
from .agents import PlanarArmTeam, PLANE_EMBED
from .grasp import (check_share_balance, grasp_map, grasp_map_dot,
                    load_distribution)


class KinState:
    """Per-state kinematics bundle.

    The load-distribution matrices ``D`` are only needed by the controllers
    (once per control period), not by the plant flow evaluated at every
    integrator stage, so they are computed lazily on first access.
    """

    __slots__ = ("p", "quat", "R", "v_o", "p_rel", "J", "Jd", "q", "qd",
                 "v_i", "J_arm", "_shares", "_D")

    def __init__(self, **kw):
        self._D = None
        for key, value in kw.items():
            setattr(self, key, value)

    @property
    def D(self):
        if self._D is None:
            self._D = load_distribution(self.p_rel, *self._shares)
        return self._D


class CoupledPlant:
    """Rigid body + agent team + grasp geometry + disturbances."""

    def __init__(self, body, team, offsets_body, mass_shares, inertia_shares,
                 disturbance):
        self.body = body
        self.team = team
        self.offsets_body = np.atleast_2d(np.asarray(offsets_body, dtype=float))
        self.mass_shares = np.asarray(mass_shares, dtype=float)
        self.inertia_shares = np.asarray(inertia_shares, dtype=float)
        self.disturbance = disturbance
        self.n_agents = self.offsets_body.shape[0]
        self.planar = isinstance(team, PlanarArmTeam)
        check_share_balance(self.offsets_body, self.mass_shares)

    @property
    def joint_state_size(self):
        """Agent coordinates carried in the integrator state (0 when arms
        are position-resolved through inverse kinematics)."""
        return 0 if self.planar else self.n_agents * self.team.dof

    def initial_joint_state(self, p, quat, q0=None):
        if self.planar:
            return np.zeros(0)
        if q0 is None:
            return np.zeros(self.n_agents * self.team.dof)
        return np.asarray(q0, dtype=float).reshape(-1)

    def kin_state(self, p, quat, v_o, q_state):
        """Resolves per-agent kinematics for one (batched) plant state."""
        p = np.asarray(p, dtype=float)
        quat = quat_normalize(quat)
        v_o = np.asarray(v_o, dtype=float)
        R = rotmat_from_quat(quat)
        J, p_rel = grasp_map(R, self.offsets_body)
        Jd = grasp_map_dot(p_rel, v_o[..., 3:])
        v_i = np.einsum("...nij,...j->...ni", J, v_o)
        if self.planar:
            pitch = np.arcsin(np.clip(-R[..., 2, 0], -1.0, 1.0))
            pe = p[..., None, :] + p_rel
            pose = np.stack([pe[..., 0] - self.team.bases[:, 0],
                             pe[..., 2] - self.team.bases[:, 1],
                             self.team.ee_angle - pitch[..., None]], axis=-1)
            q = self.team.ik(pose)
            J_arm = self.team.jacobian(q)
            planar_vel = np.einsum("ia,...ni->...na", PLANE_EMBED, v_i)
            qd = self.team.joint_rates(q, planar_vel, J=J_arm)
        else:
            q = np.asarray(q_state, dtype=float).reshape(
                p.shape[:-1] + (self.n_agents, self.team.dof))
            qd = v_i
            J_arm = None
        kin = KinState(p=p, quat=quat, R=R, v_o=v_o, p_rel=p_rel,
                       J=J, Jd=Jd, q=q, qd=qd, v_i=v_i, J_arm=J_arm)
        kin._shares = (self.mass_shares, self.inertia_shares)
        return kin

    def coupled_terms(self, kin, t):
        """(Mt, Ct, load); load = gravity + disturbances + gear friction."""
        Mi, Ci, gi = self.team.task_matrices(kin.q, kin.qd, J=kin.J_arm)
        JT = np.swapaxes(kin.J, -1, -2)
        MJ = Mi @ kin.J
        Mt = self.body.mass_matrix(kin.R) + np.sum(JT @ MJ, axis=-3)
        CJ = Ci @ kin.J + Mi @ kin.Jd
        Ct = self.body.coriolis(kin.R, kin.v_o[..., 3:]) + np.sum(JT @ CJ, axis=-3)
        di = self.disturbance.agent_force(kin.q, kin.v_i, t)
        do = self.disturbance.object_force(kin.v_o, t)
        fric = self.team.task_friction(kin.q, kin.qd, J=kin.J_arm)
        load = (self.body.gravity_wrench() + do
                + np.einsum("...nji,...nj->...i", kin.J, gi + di + fric))
        return Mt, Ct, load

    def object_accel(self, kin, t, u):
        """Object twist rate under per-agent commanded wrenches u (..., N, 6)."""
        Mt, Ct, load = self.coupled_terms(kin, t)
        fo = np.einsum("...nji,...nj->...i", kin.J, np.asarray(u, dtype=float))
        rhs = fo - np.einsum("...ij,...j->...i", Ct, kin.v_o) - load
        return np.linalg.solve(Mt, rhs[..., None])[..., 0]

    def rhs(self, t, p, quat, v_o, q_state, u):
        """Plant derivative (pdot, quatdot, vdot_o, q_state_dot)."""
        kin = self.kin_state(p, quat, v_o, q_state)
        vdot = self.object_accel(kin, t, u)
        quatdot = quat_derivative(kin.quat, v_o[..., 3:])
        if self.planar:
            qsd = np.zeros(0)
        else:
            qsd = kin.v_i.reshape(np.shape(q_state))
        return v_o[..., :3], quatdot, vdot, qsd

    def interaction_wrenches(self, kin, t, vdot_o, u):
        """Wrenches each agent applies to the object: u_i minus its own load."""
        Mi, Ci, gi = self.team.task_matrices(kin.q, kin.qd, J=kin.J_arm)
        vdot_i = (np.einsum("...nij,...j->...ni", kin.J, vdot_o)
                  + np.einsum("...nij,...j->...ni", kin.Jd, kin.v_o))
        di = self.disturbance.agent_force(kin.q, kin.v_i, t)
        fric = self.team.task_friction(kin.q, kin.qd, J=kin.J_arm)
        own = (np.einsum("...nij,...nj->...ni", Mi, vdot_i)
               + np.einsum("...nij,...nj->...ni", Ci, kin.v_i) + gi + di + fric)
        return np.asarray(u, dtype=float) - own

    def coupled_mass(self, kin):
        return self.coupled_terms(kin, 0.0)[0]

    def energy(self, kin):
        """Total mechanical energy 0.5 v^T Mt v + potential (object + agents)."""
        Mt = self.coupled_mass(kin)
        ke = 0.5 * np.einsum("...i,...ij,...j->...", kin.v_o, Mt, kin.v_o)
        pot = self.body.potential_energy(kin.p) + np.sum(
            self.team.potential_energy(kin.q), axis=-1)
        return ke + pot
