"""Agent dynamics in end-effector (task) coordinates.

Two agent families are provided, each managed as a *team* so that per-agent
quantities stay stacked in arrays (leading axis = agent index, with optional
extra batch axes in front):

* ``PlanarArmTeam`` -- 3-link revolute arms moving in the world x-z plane,
  the hardware-like model.  Joint dynamics use the classic six-parameter
  formulation of a planar 3R chain; task-space dynamics are expressed at the
  end effector and embedded into full 6-dof world coordinates, with
  placeholder mass/inertia on the three out-of-plane directions so the
  embedded mass matrix stays positive definite.
* ``SixDofEffectorTeam`` -- fully actuated 6-dof effectors whose generalized
  coordinates coincide with task coordinates (the commanded wrench equals the
  joint force).  Their mass matrix A + sum_m b_m sin(q_m) P_m has a
  configuration-dependent part so adaptive-control regressors are exercised
  in all 6 axes.

Shared conventions:

* task vectors are world-frame twists/wrenches ``[v; omega]`` / ``[f; m]``;
* ``task_matrices(q, qd) -> (M, C, g)`` gives the task-space dynamics
  ``M vdot + C v + g = u - f_interaction``, with C built from Christoffel
  symbols so that ``Mdot - 2C`` is skew-symmetric;
* ``regressor(q, qd, z, w) @ theta == M(q) @ w + C(q, qd) @ z + g(q)`` holds
  for any test vectors z, w -- controllers rely on this identity with
  z = reference velocity and w = reference acceleration;
* ``theta`` is the vector of dynamic base parameters (unknown to the
  controllers; the regressor structure itself is assumed known).

The planar frame of an arm has X along world +x from the arm base, Y along
world +z, and link angle measured counter-clockwise from +X.  A rotation by
``pitch`` about world +y moves the end effector clockwise in this frame, so
the planar end-effector angle is ``ee_angle - pitch`` and planar coordinates
relate to world twists through the constant embedding ``PLANE_EMBED`` (the
third planar axis maps to -omega_y).
"""

import numpy as np

from ..errors import ScenarioError, CoopmanError


class WorkspaceViolation(CoopmanError):
    """An arm was driven outside its reachable/nonsingular workspace."""


# world twist components spanned by planar motion: v_x, v_z, -omega_y
PLANE_EMBED = np.zeros((6, 3))
PLANE_EMBED[0, 0] = 1.0
PLANE_EMBED[2, 1] = 1.0
PLANE_EMBED[4, 2] = -1.0

# indices of the out-of-plane world axes carrying placeholder inertia
_OFFPLANE_AXES = (1, 3, 5)


def christoffel_matrix(dMdq, qd):
    """Coriolis matrix from the mass-matrix gradient.

    dMdq[..., k, j, l] = d M_kj / d q_l.  The returned C satisfies both
    C(q, qd) qd = coriolis/centrifugal force and skew-symmetry of Mdot - 2C.
    """
    t1 = np.einsum("...kjl,...l->...kj", dMdq, qd)
    t2 = np.einsum("...klj,...l->...kj", dMdq, qd)
    t3 = np.einsum("...jlk,...l->...kj", dMdq, qd)
    return 0.5 * (t1 + t2 - t3)


# ---------------------------------------------------------------------------
# planar 3R arms
# ---------------------------------------------------------------------------

# coefficient stencils of the configuration-dependent mass-matrix terms
_K_L1C2 = np.array([[2.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
_K_L1C23 = np.array([[2.0, 1.0, 1.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
_K_L2C3 = np.array([[2.0, 2.0, 1.0], [2.0, 2.0, 1.0], [1.0, 1.0, 0.0]])


class PlanarArmTeam:
    """N identical-topology planar 3R arms with per-arm parameters.

    Parameters are arrays with leading axis N: link lengths (N,3), link
    masses (N,3), center-of-mass offsets along each link (N,3), link moments
    of inertia about their COM (N,3), base positions in the world x-z plane
    (N,2 as [x, z]), elbow branch signs (N, +1 or -1), end-effector angle
    offsets (N,), and placeholder out-of-plane parameters (N,3 as
    [mass_y, inertia_x, inertia_z]).
    """

    dof = 3
    n_params = 9

    def __init__(self, lengths, masses, com, inertias, bases, elbow,
                 ee_angle, offplane, gravity=9.81, damping=None):
        self.lengths = np.atleast_2d(np.asarray(lengths, dtype=float))
        self.masses = np.atleast_2d(np.asarray(masses, dtype=float))
        self.com = np.atleast_2d(np.asarray(com, dtype=float))
        self.inertias = np.atleast_2d(np.asarray(inertias, dtype=float))
        self.bases = np.atleast_2d(np.asarray(bases, dtype=float))
        self.elbow = np.atleast_1d(np.asarray(elbow, dtype=float))
        self.ee_angle = np.atleast_1d(np.asarray(ee_angle, dtype=float))
        self.offplane = np.atleast_2d(np.asarray(offplane, dtype=float))
        self.gravity = float(gravity)
        self.n_agents = self.lengths.shape[0]
        if damping is None:
            self.damping = np.zeros((self.n_agents, 3))
        else:
            self.damping = np.atleast_2d(np.asarray(damping, dtype=float))
        for name in ("masses", "com", "inertias", "bases", "elbow",
                     "ee_angle", "offplane", "damping"):
            if getattr(self, name).shape[0] != self.n_agents:
                raise ScenarioError("planar arm parameter %r has wrong length" % name)
        if np.any(self.lengths <= 0) or np.any(self.masses <= 0):
            raise ScenarioError("planar arm lengths and masses must be positive")
        if np.any(self.offplane <= 0):
            raise ScenarioError("placeholder out-of-plane parameters must be positive")
        if np.any(np.abs(self.elbow) != 1.0):
            raise ScenarioError("elbow branch must be +1 or -1 per arm")
        if np.any(self.damping < 0):
            raise ScenarioError("joint damping coefficients must be nonnegative")
        self._theta = self._base_params()

    def _base_params(self):
        l1, l2 = self.lengths[:, 0], self.lengths[:, 1]
        m1, m2, m3 = self.masses.T
        c1, c2, c3 = self.com.T
        i1, i2, i3 = self.inertias.T
        th = np.empty((self.n_agents, 9))
        th[:, 0] = i1 + m1 * c1 ** 2 + (m2 + m3) * l1 ** 2
        th[:, 1] = i2 + m2 * c2 ** 2 + m3 * l2 ** 2
        th[:, 2] = i3 + m3 * c3 ** 2
        th[:, 3] = m2 * c2 + m3 * l2
        th[:, 4] = m3 * c3
        th[:, 5] = m1 * c1 + (m2 + m3) * l1
        th[:, 6:9] = self.offplane
        return th

    @property
    def theta(self):
        """True dynamic base parameters, (N, 9)."""
        return self._theta.copy()

    # -- planar kinematics --------------------------------------------------

    def fk(self, q):
        """Planar end-effector pose [X, Y, angle] from joint angles (..., N, 3)."""
        q = np.asarray(q, dtype=float)
        a1 = q[..., 0]
        a2 = a1 + q[..., 1]
        a3 = a2 + q[..., 2]
        l1, l2, l3 = self.lengths[:, 0], self.lengths[:, 1], self.lengths[:, 2]
        x = l1 * np.cos(a1) + l2 * np.cos(a2) + l3 * np.cos(a3)
        y = l1 * np.sin(a1) + l2 * np.sin(a2) + l3 * np.sin(a3)
        return np.stack([x, y, a3], axis=-1)

    def ik(self, pose):
        """Joint angles from planar pose [X, Y, angle], honoring the elbow branch."""
        pose = np.asarray(pose, dtype=float)
        l1, l2, l3 = self.lengths[:, 0], self.lengths[:, 1], self.lengths[:, 2]
        wx = pose[..., 0] - l3 * np.cos(pose[..., 2])
        wy = pose[..., 1] - l3 * np.sin(pose[..., 2])
        c2 = (wx ** 2 + wy ** 2 - l1 ** 2 - l2 ** 2) / (2.0 * l1 * l2)
        if np.any(np.abs(c2) > 1.0 - 1e-10):
            raise WorkspaceViolation("end-effector pose at or beyond arm reach")
        s2 = self.elbow * np.sqrt(1.0 - c2 ** 2)
        q2 = np.arctan2(s2, c2)
        q1 = np.arctan2(wy, wx) - np.arctan2(l2 * s2, l1 + l2 * c2)
        q3 = pose[..., 2] - q1 - q2
        return np.stack([q1, q2, q3], axis=-1)

    def jacobian(self, q):
        """Planar Jacobian: [Xdot, Ydot, angledot] = J(q) qdot."""
        q = np.asarray(q, dtype=float)
        a1 = q[..., 0]
        a2 = a1 + q[..., 1]
        a3 = a2 + q[..., 2]
        l1, l2, l3 = self.lengths[:, 0], self.lengths[:, 1], self.lengths[:, 2]
        t1, t2, t3 = l1 * np.sin(a1), l2 * np.sin(a2), l3 * np.sin(a3)
        u1, u2, u3 = l1 * np.cos(a1), l2 * np.cos(a2), l3 * np.cos(a3)
        J = np.empty(q.shape[:-1] + (3, 3))
        J[..., 0, 0] = -(t1 + t2 + t3)
        J[..., 0, 1] = -(t2 + t3)
        J[..., 0, 2] = -t3
        J[..., 1, 0] = u1 + u2 + u3
        J[..., 1, 1] = u2 + u3
        J[..., 1, 2] = u3
        J[..., 2, :] = 1.0
        return J

    def jacobian_dot(self, q, qd):
        """Time derivative of the planar Jacobian."""
        q = np.asarray(q, dtype=float)
        qd = np.asarray(qd, dtype=float)
        a1 = q[..., 0]
        a2 = a1 + q[..., 1]
        a3 = a2 + q[..., 2]
        d1 = qd[..., 0]
        d2 = d1 + qd[..., 1]
        d3 = d2 + qd[..., 2]
        l1, l2, l3 = self.lengths[:, 0], self.lengths[:, 1], self.lengths[:, 2]
        p1, p2, p3 = l1 * np.cos(a1) * d1, l2 * np.cos(a2) * d2, l3 * np.cos(a3) * d3
        r1, r2, r3 = l1 * np.sin(a1) * d1, l2 * np.sin(a2) * d2, l3 * np.sin(a3) * d3
        Jd = np.zeros(q.shape[:-1] + (3, 3))
        Jd[..., 0, 0] = -(p1 + p2 + p3)
        Jd[..., 0, 1] = -(p2 + p3)
        Jd[..., 0, 2] = -p3
        Jd[..., 1, 0] = -(r1 + r2 + r3)
        Jd[..., 1, 1] = -(r2 + r3)
        Jd[..., 1, 2] = -r3
        return Jd

    def joint_rates(self, q, planar_vel, J=None):
        """qdot from the planar end-effector velocity, qdot = J(q)^-1 v_planar."""
        if J is None:
            J = self.jacobian(q)
        s2 = np.sin(np.asarray(q, dtype=float)[..., 1])
        if np.any(np.abs(s2) < 1e-8):
            raise WorkspaceViolation("arm at a straight/folded elbow singularity")
        return np.linalg.solve(J, np.asarray(planar_vel, dtype=float)[..., None])[..., 0]

    # -- joint-space dynamics ----------------------------------------------

    def _trig(self, q):
        q = np.asarray(q, dtype=float)
        return (np.cos(q[..., 1]), np.sin(q[..., 1]),
                np.cos(q[..., 2]), np.sin(q[..., 2]),
                np.cos(q[..., 1] + q[..., 2]), np.sin(q[..., 1] + q[..., 2]))

    def joint_mass(self, q):
        """Joint-space mass matrix (..., N, 3, 3)."""
        c2, _, c3, _, c23, _ = self._trig(q)
        l1, l2 = self.lengths[:, 0], self.lengths[:, 1]
        th = self._theta
        t123 = th[:, 0] + th[:, 1] + th[:, 2]
        t23 = th[:, 1] + th[:, 2]
        a = l1 * th[:, 3] * c2          # l1 theta4 cos q2
        b = l2 * th[:, 4] * c3          # l2 theta5 cos q3
        c = l1 * th[:, 4] * c23         # l1 theta5 cos(q2+q3)
        M = np.empty(np.broadcast_shapes(a.shape, b.shape) + (3, 3))
        M[..., 0, 0] = t123 + 2.0 * a + 2.0 * b + 2.0 * c
        M[..., 0, 1] = t23 + a + 2.0 * b + c
        M[..., 0, 2] = th[:, 2] + b + c
        M[..., 1, 1] = t23 + 2.0 * b
        M[..., 1, 2] = th[:, 2] + b
        M[..., 2, 2] = th[:, 2] * np.ones_like(a)
        M[..., 1, 0] = M[..., 0, 1]
        M[..., 2, 0] = M[..., 0, 2]
        M[..., 2, 1] = M[..., 1, 2]
        return M

    def _joint_mass_gradient(self, q):
        """dM/dq as (..., N, 3, 3, 3); only q2 and q3 slices are nonzero."""
        _, s2, _, s3, _, s23 = self._trig(q)
        l1, l2 = self.lengths[:, 0], self.lengths[:, 1]
        th = self._theta
        g2 = -(l1 * th[:, 3] * s2)[..., None, None] * _K_L1C2 \
             - (l1 * th[:, 4] * s23)[..., None, None] * _K_L1C23
        g3 = -(l2 * th[:, 4] * s3)[..., None, None] * _K_L2C3 \
             - (l1 * th[:, 4] * s23)[..., None, None] * _K_L1C23
        out = np.zeros(g2.shape[:-2] + (3, 3, 3))
        out[..., 1] = g2
        out[..., 2] = g3
        return out

    def joint_coriolis(self, q, qd):
        """Joint-space Coriolis matrix via Christoffel symbols."""
        return christoffel_matrix(self._joint_mass_gradient(q), qd)

    def joint_gravity(self, q):
        """Joint torques of gravity (gravity pulls along world -z = planar -Y)."""
        q = np.asarray(q, dtype=float)
        a1 = q[..., 0]
        a12 = a1 + q[..., 1]
        a123 = a12 + q[..., 2]
        th = self._theta
        g = self.gravity
        out = np.empty(q.shape)
        out[..., 2] = g * th[:, 4] * np.cos(a123)
        out[..., 1] = g * th[:, 3] * np.cos(a12) + out[..., 2]
        out[..., 0] = g * th[:, 5] * np.cos(a1) + out[..., 1]
        return out

    def potential_energy(self, q):
        """Gravitational potential of each arm (world z reference at base height)."""
        q = np.asarray(q, dtype=float)
        a1 = q[..., 0]
        a12 = a1 + q[..., 1]
        a123 = a12 + q[..., 2]
        th = self._theta
        v = self.gravity * (th[:, 5] * np.sin(a1) + th[:, 3] * np.sin(a12)
                            + th[:, 4] * np.sin(a123))
        return v + self.masses.sum(axis=-1) * self.gravity * self.bases[:, 1]

    # -- task-space dynamics -------------------------------------------------

    def task_matrices(self, q, qd, J=None):
        """(M, C, g) of the 6-dof embedded end-effector dynamics."""
        if J is None:
            J = self.jacobian(q)
        Jd = self.jacobian_dot(q, qd)
        Ji = np.linalg.inv(J)
        JiT = np.swapaxes(Ji, -1, -2)
        Mj = self.joint_mass(q)
        Cj = self.joint_coriolis(q, qd)
        Mt = JiT @ Mj @ Ji
        Ct = JiT @ (Cj - Mj @ Ji @ Jd) @ Ji
        gt = (JiT @ self.joint_gravity(q)[..., None])[..., 0]
        E = PLANE_EMBED
        M6 = np.einsum("ia,...ab,jb->...ij", E, Mt, E)
        C6 = np.einsum("ia,...ab,jb->...ij", E, Ct, E)
        g6 = np.einsum("ia,...a->...i", E, gt)
        for k, ax in enumerate(_OFFPLANE_AXES):
            M6[..., ax, ax] = self.offplane[:, k]
        return M6, C6, g6

    def regressor(self, q, qd, z, w):
        """Task-space regressor Y with Y @ theta = M w + C z + g, (..., N, 6, 9)."""
        q = np.asarray(q, dtype=float)
        c2, s2, c3, s3, c23, s23 = self._trig(q)
        l1, l2 = self.lengths[:, 0], self.lengths[:, 1]
        one = np.ones_like(c2)

        # joint-space basis stencils per base parameter (index b = 0..5)
        shape = c2.shape + (6, 3, 3)
        Mb = np.zeros(shape)
        Mb[..., 0, 0, 0] = one
        Mb[..., 1, :2, :2] = one[..., None, None]
        Mb[..., 2, :, :] = one[..., None, None]
        Mb[..., 3, :, :] = (l1 * c2)[..., None, None] * _K_L1C2
        Mb[..., 4, :, :] = (l2 * c3)[..., None, None] * _K_L2C3 \
            + (l1 * c23)[..., None, None] * _K_L1C23
        dMb = np.zeros(shape + (3,))
        dMb[..., 3, :, :, 1] = -(l1 * s2)[..., None, None] * _K_L1C2
        dMb[..., 4, :, :, 1] = -(l1 * s23)[..., None, None] * _K_L1C23
        dMb[..., 4, :, :, 2] = -(l2 * s3)[..., None, None] * _K_L2C3 \
            - (l1 * s23)[..., None, None] * _K_L1C23

        a1 = q[..., 0]
        a12 = a1 + q[..., 1]
        a123 = a12 + q[..., 2]
        gb = np.zeros(c2.shape + (6, 3))
        g = self.gravity
        gb[..., 3, 0] = g * np.cos(a12)
        gb[..., 3, 1] = g * np.cos(a12)
        gb[..., 4, :] = g * np.cos(a123)[..., None]
        gb[..., 5, 0] = g * np.cos(a1)

        # map the task test vectors into joint space
        J = self.jacobian(q)
        Jd = self.jacobian_dot(q, qd)
        Ji = np.linalg.inv(J)
        E = PLANE_EMBED
        zp = np.einsum("ia,...i->...a", E, np.asarray(z, dtype=float))
        wp = np.einsum("ia,...i->...a", E, np.asarray(w, dtype=float))
        bq = np.einsum("...ab,...b->...a", Ji, zp)
        aq = np.einsum("...ab,...b->...a", Ji, wp - np.einsum("...ab,...b->...a", Jd, bq))

        Cb = christoffel_matrix(dMb, qd[..., None, :])
        Yj = (np.einsum("...bkj,...j->...kb", Mb, aq)
              + np.einsum("...bkj,...j->...kb", Cb, bq)
              + np.swapaxes(gb, -1, -2))
        Y = np.zeros(c2.shape + (6, 9))
        Y[..., :6] = np.einsum("ir,...kr,...kb->...ib", E, Ji, Yj)
        w = np.asarray(w, dtype=float)
        for k, ax in enumerate(_OFFPLANE_AXES):
            Y[..., ax, 6 + k] = w[..., ax]
        return Y

    def torques(self, q, u):
        """Joint torques realizing a world end-effector wrench u."""
        J = self.jacobian(q)
        up = np.einsum("ia,...i->...a", PLANE_EMBED, np.asarray(u, dtype=float))
        return np.einsum("...ba,...b->...a", J, up)

    def task_friction(self, q, qd, J=None):
        """Viscous gear friction as a task-space load (left-hand-side sign).

        Joint friction torques damping*qd, reflected to the end effector
        through J^-T and embedded into world coordinates.  Zero damping
        (the default) keeps the arms lossless.
        """
        qd = np.asarray(qd, dtype=float)
        if not np.any(self.damping):
            return np.zeros(qd.shape[:-1] + (6,))
        tau_f = self.damping * qd
        if J is None:
            J = self.jacobian(q)
        f_planar = np.linalg.solve(np.swapaxes(J, -1, -2),
                                   tau_f[..., None])[..., 0]
        return np.einsum("ia,...a->...i", PLANE_EMBED, f_planar)


# ---------------------------------------------------------------------------
# six-dof wrench-actuated effectors
# ---------------------------------------------------------------------------

def _coupling_patterns():
    """Six fixed symmetric coupling stencils for the mass-matrix variation."""
    P = np.zeros((6, 6, 6))
    for m in range(6):
        P[m, m, m] = 1.0
        j = (m + 1) % 6
        k = (m + 3) % 6
        P[m, m, j] = P[m, j, m] = 0.5
        P[m, m, k] = P[m, k, m] = 0.25
    return P


COUPLING_PATTERNS = _coupling_patterns()

# symmetric basis for the constant part of the mass matrix (21 entries,
# row-major upper triangle)
_SYM_IDX = [(i, j) for i in range(6) for j in range(i, 6)]
_SYM_BASIS = np.zeros((21, 6, 6))
for _a, (_i, _j) in enumerate(_SYM_IDX):
    _SYM_BASIS[_a, _i, _j] = 1.0
    _SYM_BASIS[_a, _j, _i] = 1.0
del _a, _i, _j


class SixDofEffectorTeam:
    """N fully actuated 6-dof effectors; joint coordinates = task coordinates.

    Mass matrix M_i(q_i) = A_i + sum_m b_im sin(q_im) P_m with fixed symmetric
    stencils P_m, constant gravity load g_i, no other forces.  Parameters:
    A (N,6,6) symmetric positive definite, b (N,6), gvec (N,6).
    """

    dof = 6
    n_params = 33

    def __init__(self, A, b, gvec):
        self.A = np.asarray(A, dtype=float)
        if self.A.ndim == 2:
            self.A = self.A[None]
        self.b = np.atleast_2d(np.asarray(b, dtype=float))
        self.gvec = np.atleast_2d(np.asarray(gvec, dtype=float))
        self.n_agents = self.A.shape[0]
        if np.any(np.abs(self.A - np.swapaxes(self.A, -1, -2)) > 1e-12):
            raise ScenarioError("effector mass matrix A must be symmetric")
        lam = np.linalg.eigvalsh(self.A)[:, 0]
        margin = np.abs(self.b) @ np.linalg.norm(COUPLING_PATTERNS, ord=2, axis=(1, 2))
        if np.any(lam - margin <= 0.0):
            raise ScenarioError(
                "effector mass matrix can lose positive definiteness: "
                "lambda_min(A) must exceed sum_m |b_m| ||P_m||")

    @property
    def theta(self):
        """[upper-triangle of A (21), b (6), gvec (6)] per agent, (N, 33)."""
        th = np.empty((self.n_agents, 33))
        for a, (i, j) in enumerate(_SYM_IDX):
            th[:, a] = self.A[:, i, j]
        th[:, 21:27] = self.b
        th[:, 27:33] = self.gvec
        return th

    def task_matrices(self, q, qd, J=None):
        """(M, C, g); C comes from the Christoffel symbols of M."""
        q = np.asarray(q, dtype=float)
        qd = np.asarray(qd, dtype=float)
        bs = self.b * np.sin(q)
        bc = self.b * np.cos(q)
        M = self.A + np.einsum("...m,mij->...ij", bs, COUPLING_PATTERNS)
        # C = 0.5 * (sum_m bc_m qd_m P_m + W - W^T), W[:, m] = bc_m (P_m qd)
        S1 = np.einsum("...m,mij->...ij", bc * qd, COUPLING_PATTERNS)
        W = np.einsum("mkl,...l->...km", COUPLING_PATTERNS, qd) * bc[..., None, :]
        C = 0.5 * (S1 + W - np.swapaxes(W, -1, -2))
        g = np.broadcast_to(self.gvec, q.shape).copy()
        return M, C, g

    def regressor(self, q, qd, z, w):
        """Regressor with Y @ theta = M w + C z + g, (..., N, 6, 33)."""
        q = np.asarray(q, dtype=float)
        qd = np.asarray(qd, dtype=float)
        z = np.asarray(z, dtype=float)
        w = np.asarray(w, dtype=float)
        shape = np.broadcast_shapes(q.shape[:-1], z.shape[:-1], w.shape[:-1])
        Y = np.zeros(shape + (6, 33))
        Y[..., :21] = np.einsum("aij,...j->...ia", _SYM_BASIS, w)
        sq = np.sin(q)
        cq = np.cos(q)
        Pw = np.einsum("mkl,...l->...km", COUPLING_PATTERNS, w)
        Pz = np.einsum("mkl,...l->...km", COUPLING_PATTERNS, z)
        Pqd = np.einsum("mkl,...l->...km", COUPLING_PATTERNS, qd)
        # C^(m) z = 0.5 cos(q_m) [qd_m (P_m z) + z_m (P_m qd) - e_m (qd . P_m z)]
        cz = 0.5 * cq[..., None, :] * (qd[..., None, :] * Pz
                                       + z[..., None, :] * Pqd)
        diag_fix = 0.5 * cq * np.einsum("...l,...lm->...m", qd, Pz)
        Y[..., 21:27] = sq[..., None, :] * Pw + cz
        idx = np.arange(6)
        Y[..., idx, 21 + idx] -= diag_fix
        Y[..., 27:33] = np.eye(6)
        return Y

    def torques(self, q, u):
        """Generalized forces equal the commanded wrench for these effectors."""
        return np.asarray(u, dtype=float)

    def task_friction(self, q, qd, J=None):
        """These effectors are lossless; no friction load."""
        return np.zeros(np.shape(qd))

    def potential_energy(self, q):
        """Potential of the constant gravity load: g . q per agent."""
        return np.einsum("...i,...i->...", self.gvec, np.asarray(q, dtype=float))
