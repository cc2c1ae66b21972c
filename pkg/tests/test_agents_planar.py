"""Planar 3R arm model against independent constructions and finite differences."""

import numpy as np
import pytest

from coopman.errors import ScenarioError
from coopman.model.agents import PLANE_EMBED, PlanarArmTeam, WorkspaceViolation

N_CASES = 10_000


def make_team(n=2, rng=None, gravity=9.81):
    rng = rng or np.random.default_rng(0)
    lengths = rng.uniform(0.12, 0.3, (n, 3))
    masses = rng.uniform(0.1, 0.6, (n, 3))
    com = lengths * rng.uniform(0.3, 0.7, (n, 3))
    inertias = masses * lengths ** 2 / 12.0
    bases = rng.uniform(-0.5, 0.5, (n, 2))
    elbow = np.where(rng.uniform(size=n) < 0.5, 1.0, -1.0)
    ee_angle = rng.uniform(-1.0, 1.0, n)
    offplane = rng.uniform(0.2, 2.0, (n, 3))
    return PlanarArmTeam(lengths, masses, com, inertias, bases, elbow,
                         ee_angle, offplane, gravity=gravity)


def sample_q(team, rng, m):
    """Joint angles honoring each arm's elbow branch, away from singularities."""
    q = rng.uniform(-1.2, 1.2, (m, team.n_agents, 3))
    q[..., 1] = team.elbow * rng.uniform(0.35, 2.6, (m, team.n_agents))
    return q


def com_positions(team, q):
    """Per-link COM positions in the planar frame (oracle helper)."""
    a1 = q[..., 0]
    a2 = a1 + q[..., 1]
    a3 = a2 + q[..., 2]
    l1, l2 = team.lengths[:, 0], team.lengths[:, 1]
    c1, c2, c3 = team.com[:, 0], team.com[:, 1], team.com[:, 2]
    p1 = np.stack([c1 * np.cos(a1), c1 * np.sin(a1)], axis=-1)
    p2 = np.stack([l1 * np.cos(a1) + c2 * np.cos(a2),
                   l1 * np.sin(a1) + c2 * np.sin(a2)], axis=-1)
    p3 = np.stack([l1 * np.cos(a1) + l2 * np.cos(a2) + c3 * np.cos(a3),
                   l1 * np.sin(a1) + l2 * np.sin(a2) + c3 * np.sin(a3)], axis=-1)
    return p1, p2, p3


def mass_matrix_oracle(team, q):
    """Composite rigid-body mass matrix from numerical link Jacobians."""
    h = 1e-7
    coms = np.stack(com_positions(team, q), axis=0)  # (3 links, ..., N, 2)
    Jc = np.empty(coms.shape[:-1] + (2, 3))
    for j in range(3):
        dq = np.zeros(3)
        dq[j] = h
        cp = np.stack(com_positions(team, q + dq), axis=0)
        cm = np.stack(com_positions(team, q - dq), axis=0)
        Jc[..., j] = (cp - cm) / (2 * h)
    M = np.zeros(q.shape[:-1] + (3, 3))
    tri = np.tril(np.ones((3, 3)))  # link k rotates with joints 0..k
    for k in range(3):
        mk = team.masses[:, k]
        ik = team.inertias[:, k]
        Jk = Jc[k]
        wk = tri[k]
        M += mk[:, None, None] * np.einsum("...ai,...aj->...ij", Jk, Jk)
        M += ik[:, None, None] * np.outer(wk, wk)
    return M


def test_mass_matrix_matches_composite_rigid_body():
    rng = np.random.default_rng(21)
    team = make_team(3, rng)
    q = sample_q(team, rng, 400)
    M = team.joint_mass(q)
    assert np.abs(M - mass_matrix_oracle(team, q)).max() < 1e-6
    assert np.linalg.eigvalsh(M).min() > 0.0


def test_gravity_matches_potential_gradient():
    rng = np.random.default_rng(22)
    team = make_team(3, rng)
    q = sample_q(team, rng, 400)
    h = 1e-6
    g_fd = np.empty_like(q)
    for j in range(3):
        dq = np.zeros(3)
        dq[j] = h
        g_fd[..., j] = (team.potential_energy(q + dq)
                        - team.potential_energy(q - dq)) / (2 * h)
    assert np.abs(team.joint_gravity(q) - g_fd).max() < 1e-6


def test_coriolis_is_christoffel_consistent():
    rng = np.random.default_rng(23)
    team = make_team(2, rng)
    q = sample_q(team, rng, 400)
    qd = rng.normal(size=q.shape)
    h = 1e-6
    Mdot = (team.joint_mass(q + h * qd) - team.joint_mass(q - h * qd)) / (2 * h)
    C = team.joint_coriolis(q, qd)
    # Mdot = C + C^T and Mdot - 2C skew-symmetric
    assert np.abs(Mdot - C - np.swapaxes(C, -1, -2)).max() < 1e-6
    S = Mdot - 2 * C
    assert np.abs(S + np.swapaxes(S, -1, -2)).max() < 1e-6


def test_fk_ik_round_trip_10k():
    rng = np.random.default_rng(24)
    team = make_team(2, rng)
    q = sample_q(team, rng, N_CASES // 2)
    back = team.ik(team.fk(q))
    err = np.abs(back - q)
    err[..., 0] = np.abs(np.remainder(err[..., 0] + np.pi, 2 * np.pi) - np.pi)
    err[..., 2] = np.abs(np.remainder(err[..., 2] + np.pi, 2 * np.pi) - np.pi)
    assert err.max() < 1e-9


def test_ik_raises_out_of_reach():
    team = make_team(1)
    reach = team.lengths.sum()
    with pytest.raises(WorkspaceViolation):
        team.ik(np.array([[reach + 0.1, 0.0, 0.0]]))


def test_jacobian_matches_finite_difference():
    rng = np.random.default_rng(25)
    team = make_team(2, rng)
    q = sample_q(team, rng, 300)
    qd = rng.normal(size=q.shape)
    h = 1e-6
    fd = (team.fk(q + h * qd) - team.fk(q - h * qd)) / (2 * h)
    J = team.jacobian(q)
    assert np.abs(np.einsum("...ij,...j->...i", J, qd) - fd).max() < 1e-6
    Jd_fd = (team.jacobian(q + h * qd) - team.jacobian(q - h * qd)) / (2 * h)
    assert np.abs(team.jacobian_dot(q, qd) - Jd_fd).max() < 1e-6


def test_joint_rates_invert_jacobian():
    rng = np.random.default_rng(26)
    team = make_team(2, rng)
    q = sample_q(team, rng, 500)
    qd = rng.normal(size=q.shape)
    vel = np.einsum("...ij,...j->...i", team.jacobian(q), qd)
    assert np.abs(team.joint_rates(q, vel) - qd).max() < 1e-9


def test_task_dynamics_match_joint_dynamics():
    rng = np.random.default_rng(27)
    team = make_team(2, rng)
    q = sample_q(team, rng, 500)
    qd = rng.normal(size=q.shape)
    qdd = rng.normal(size=q.shape)
    tau = (np.einsum("...ij,...j->...i", team.joint_mass(q), qdd)
           + np.einsum("...ij,...j->...i", team.joint_coriolis(q, qd), qd)
           + team.joint_gravity(q))
    J = team.jacobian(q)
    Jd = team.jacobian_dot(q, qd)
    v = np.einsum("ia,...ab,...b->...i", PLANE_EMBED, J, qd)
    vdot = np.einsum("ia,...a->...i", PLANE_EMBED,
                     np.einsum("...ab,...b->...a", J, qdd)
                     + np.einsum("...ab,...b->...a", Jd, qd))
    M6, C6, g6 = team.task_matrices(q, qd)
    lhs = (np.einsum("...ij,...j->...i", M6, vdot)
           + np.einsum("...ij,...j->...i", C6, v) + g6)
    # in-plane components reproduce the joint dynamics...
    back = np.einsum("ia,...i->...a", PLANE_EMBED, lhs)
    JiT = np.swapaxes(np.linalg.inv(J), -1, -2)
    assert np.abs(back - np.einsum("...ab,...b->...a", JiT, tau)).max() < 1e-8
    # ...and nothing leaks out of plane for in-plane motion
    assert np.abs(lhs[..., [1, 3, 5]]).max() < 1e-10


def test_regressor_identity_10k():
    rng = np.random.default_rng(28)
    team = make_team(2, rng)
    q = sample_q(team, rng, N_CASES // 2)
    qd = rng.normal(size=q.shape)
    z = rng.normal(size=q.shape[:-1] + (6,))
    w = rng.normal(size=q.shape[:-1] + (6,))
    M6, C6, g6 = team.task_matrices(q, qd)
    want = (np.einsum("...ij,...j->...i", M6, w)
            + np.einsum("...ij,...j->...i", C6, z) + g6)
    got = np.einsum("...nij,nj->...ni", team.regressor(q, qd, z, w), team.theta)
    denom = 1.0 + np.abs(want)
    assert (np.abs(got - want) / denom).max() < 1e-10


def test_torque_map_is_power_consistent():
    rng = np.random.default_rng(29)
    team = make_team(2, rng)
    q = sample_q(team, rng, 500)
    qd = rng.normal(size=q.shape)
    u = rng.normal(size=q.shape[:-1] + (6,))
    v = np.einsum("ia,...ab,...b->...i", PLANE_EMBED, team.jacobian(q), qd)
    tau = team.torques(q, u)
    assert np.abs(np.einsum("...j,...j->...", tau, qd)
                  - np.einsum("...j,...j->...", u, v)).max() < 1e-10


def test_parameter_validation():
    with pytest.raises(ScenarioError):
        make_team(2).__class__(
            lengths=[[0.2, 0.2, -0.1]], masses=[[0.1, 0.1, 0.1]],
            com=[[0.1, 0.1, 0.1]], inertias=[[1e-3] * 3], bases=[[0, 0]],
            elbow=[1.0], ee_angle=[0.0], offplane=[[1, 1, 1]])
