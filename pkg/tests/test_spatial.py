"""Spatial algebra checks against scipy.spatial.transform and finite differences."""

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from coopman import spatial
from coopman.errors import RepresentationSingularity

N_CASES = 10_000


def random_unit_quats(rng, n):
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def random_euler_box(rng, n, margin=0.05):
    """Samples inside the open box, staying ``margin`` away from its faces."""
    roll = rng.uniform(-np.pi + margin, np.pi - margin, n)
    pitch = rng.uniform(-np.pi / 2 + margin, np.pi / 2 - margin, n)
    yaw = rng.uniform(-np.pi + margin, np.pi - margin, n)
    return np.stack([roll, pitch, yaw], axis=-1)


def quat_dist_up_to_sign(a, b):
    return np.minimum(np.linalg.norm(a - b, axis=-1), np.linalg.norm(a + b, axis=-1))


def test_quat_mul_matches_rotation_composition():
    rng = np.random.default_rng(1)
    a = random_unit_quats(rng, N_CASES)
    b = random_unit_quats(rng, N_CASES)
    Rab = spatial.rotmat_from_quat(spatial.quat_mul(a, b))
    err = np.abs(Rab - spatial.rotmat_from_quat(a) @ spatial.rotmat_from_quat(b))
    assert err.max() < 1e-12


def test_quat_mul_matches_scipy():
    rng = np.random.default_rng(2)
    a = random_unit_quats(rng, 500)
    b = random_unit_quats(rng, 500)
    ours = spatial.quat_mul(a, b)
    # scipy stores quaternions scalar-last
    sp = (Rotation.from_quat(a[:, [1, 2, 3, 0]]) * Rotation.from_quat(b[:, [1, 2, 3, 0]])).as_quat()
    assert quat_dist_up_to_sign(ours, sp[:, [3, 0, 1, 2]]).max() < 1e-12


def test_quat_conj_is_inverse():
    rng = np.random.default_rng(3)
    q = random_unit_quats(rng, N_CASES)
    ident = spatial.quat_mul(q, spatial.quat_conj(q))
    expect = np.zeros_like(ident)
    expect[:, 0] = 1.0
    assert np.abs(ident - expect).max() < 1e-13


def test_quat_rate_matrix_orthonormal_columns_10k():
    rng = np.random.default_rng(4)
    q = random_unit_quats(rng, N_CASES)
    E = spatial.quat_rate_matrix(q)
    gram = np.einsum("nji,njk->nik", E, E)
    assert np.abs(gram - np.eye(3)).max() < 1e-12


def test_quat_derivative_matches_finite_difference():
    rng = np.random.default_rng(5)
    n, h = 300, 1e-6
    q0 = random_unit_quats(rng, n)
    omega = rng.normal(size=(n, 3))
    # world-frame angular velocity acts by left multiplication
    def at(t):
        dq = Rotation.from_rotvec(omega * t).as_quat()[:, [3, 0, 1, 2]]
        return spatial.quat_mul(dq, q0)
    fd = (at(h) - at(-h)) / (2 * h)
    assert np.abs(spatial.quat_derivative(q0, omega) - fd).max() < 1e-7


def test_angular_velocity_round_trip():
    rng = np.random.default_rng(6)
    q = random_unit_quats(rng, N_CASES)
    omega = rng.normal(size=(N_CASES, 3))
    back = spatial.angular_velocity_from_quat_rate(q, spatial.quat_derivative(q, omega))
    assert np.abs(back - omega).max() < 1e-12


def test_rotmat_from_quat_matches_scipy():
    rng = np.random.default_rng(7)
    q = random_unit_quats(rng, 500)
    sp = Rotation.from_quat(q[:, [1, 2, 3, 0]]).as_matrix()
    assert np.abs(spatial.rotmat_from_quat(q) - sp).max() < 1e-12


def test_quat_from_rotmat_round_trip():
    rng = np.random.default_rng(8)
    q = random_unit_quats(rng, 500)
    for qi in q:
        back = spatial.quat_from_rotmat(spatial.rotmat_from_quat(qi))
        assert back[0] >= 0.0
        assert quat_dist_up_to_sign(back, qi).max() < 1e-12


def test_rotmat_from_euler_matches_scipy():
    rng = np.random.default_rng(9)
    eta = random_euler_box(rng, 2000)
    sp = Rotation.from_euler("ZYX", eta[:, ::-1]).as_matrix()
    assert np.abs(spatial.rotmat_from_euler(eta) - sp).max() < 1e-12


def test_euler_round_trips():
    rng = np.random.default_rng(10)
    eta = random_euler_box(rng, N_CASES)
    back = spatial.euler_from_quat(spatial.quat_from_euler(eta))
    assert np.abs(back - eta).max() < 1e-9
    q = random_unit_quats(rng, N_CASES)
    eta_q = spatial.euler_from_quat(q, strict=False)
    assert quat_dist_up_to_sign(spatial.quat_from_euler(eta_q),
                                np.where(q[:, :1] < 0, -q, q)).max() < 1e-9


def test_euler_from_rotmat_raises_at_gimbal_lock():
    R = spatial.rotmat_from_euler([0.3, np.pi / 2, -0.8])
    with pytest.raises(RepresentationSingularity):
        spatial.euler_from_rotmat(R)
    # the tolerant path still reports the pitch
    eta = spatial.euler_from_rotmat(R, strict=False)
    assert abs(eta[1] - np.pi / 2) < 1e-9


def test_quat_from_euler_raw_is_continuous_where_canonical_jumps():
    # roll sweeping through -pi makes w cross zero
    t = np.linspace(0, 1, 4001)
    eta = np.stack([-np.pi + 0.3 * np.sin(2.5 * (t - 0.5)), 0.4 * t, 0.2 * np.cos(t)],
                   axis=-1)
    raw = spatial.quat_from_euler(eta, canonical=False)
    canon = spatial.quat_from_euler(eta, canonical=True)
    step_raw = np.linalg.norm(np.diff(raw, axis=0), axis=-1).max()
    step_canon = np.linalg.norm(np.diff(canon, axis=0), axis=-1).max()
    assert step_raw < 5e-3
    assert step_canon > 1.0  # sign flips make the canonical path jump


def test_euler_rate_matrix_matches_finite_difference():
    rng = np.random.default_rng(11)
    n, h = 300, 1e-6
    eta = random_euler_box(rng, n)
    etadot = rng.normal(size=(n, 3))
    Rp = spatial.rotmat_from_euler(eta + h * etadot)
    Rm = spatial.rotmat_from_euler(eta - h * etadot)
    Wd = (Rp - Rm) / (2 * h) @ np.swapaxes(spatial.rotmat_from_euler(eta), -1, -2)
    omega_fd = np.stack([Wd[:, 2, 1], Wd[:, 0, 2], Wd[:, 1, 0]], axis=-1)
    omega = np.einsum("nij,nj->ni", spatial.euler_rate_matrix(eta), etadot)
    assert np.abs(omega - omega_fd).max() < 1e-7


def test_euler_rate_matrix_dot_matches_finite_difference():
    rng = np.random.default_rng(12)
    n, h = 300, 1e-6
    eta = random_euler_box(rng, n)
    etadot = rng.normal(size=(n, 3))
    fd = (spatial.euler_rate_matrix(eta + h * etadot)
          - spatial.euler_rate_matrix(eta - h * etadot)) / (2 * h)
    assert np.abs(spatial.euler_rate_matrix_dot(eta, etadot) - fd).max() < 1e-7


def test_euler_rate_matrix_inv_is_inverse():
    rng = np.random.default_rng(13)
    eta = random_euler_box(rng, N_CASES)
    prod = spatial.euler_rate_matrix_inv(eta) @ spatial.euler_rate_matrix(eta)
    assert np.abs(prod - np.eye(3)).max() < 1e-10


def test_pose_rate_matrix_norms_match_numeric():
    rng = np.random.default_rng(14)
    eta = random_euler_box(rng, 2000)
    num = np.linalg.norm(spatial.pose_rate_matrix(eta), ord=2, axis=(-2, -1))
    num_inv = np.linalg.norm(spatial.pose_rate_matrix_inv(eta), ord=2, axis=(-2, -1))
    assert np.abs(num - spatial.pose_rate_matrix_norm(eta)).max() < 1e-9
    assert np.abs(num_inv - spatial.pose_rate_matrix_inv_norm(eta)).max() < 1e-9


def test_pose_rate_matrix_inv_norm_bound_10k():
    rng = np.random.default_rng(15)
    eta = random_euler_box(rng, N_CASES, margin=1e-6)
    norms = np.linalg.norm(spatial.pose_rate_matrix_inv(eta), ord=2, axis=(-2, -1))
    assert norms.max() <= np.sqrt(2.0) + 1e-12
    assert np.abs(spatial.pose_rate_matrix_inv_norm(eta) - norms).max() < 1e-9


def test_pose_rate_matrices_are_mutual_inverses():
    rng = np.random.default_rng(16)
    eta = random_euler_box(rng, 2000)
    prod = spatial.pose_rate_matrix(eta) @ spatial.pose_rate_matrix_inv(eta)
    assert np.abs(prod - np.eye(6)).max() < 1e-10


def test_wrap_angle_range_and_fixed_points():
    rng = np.random.default_rng(17)
    x = rng.uniform(-50, 50, N_CASES)
    w = spatial.wrap_angle(x)
    assert np.all(w > -np.pi) and np.all(w <= np.pi)
    d = np.remainder(x - w, 2 * np.pi)
    assert np.minimum(d, 2 * np.pi - d).max() < 1e-9  # differs by a multiple of 2*pi
    assert spatial.wrap_angle(np.pi) == np.pi
    assert spatial.wrap_angle(-np.pi) == np.pi


def test_unwrap_near_lands_within_pi_of_reference():
    rng = np.random.default_rng(18)
    eta = rng.uniform(-np.pi, np.pi, (N_CASES, 3))
    ref = rng.uniform(-40, 40, (N_CASES, 3))
    out = spatial.unwrap_near(eta, ref)
    assert np.abs(out - ref).max() <= np.pi + 1e-12
    assert np.abs(spatial.wrap_angle(out - eta)).max() < 1e-12


def test_skew_cross_product_identity():
    rng = np.random.default_rng(19)
    a = rng.normal(size=(N_CASES, 3))
    b = rng.normal(size=(N_CASES, 3))
    sk = np.einsum("nij,nj->ni", spatial.skew(a), b)
    assert np.abs(sk - np.cross(a, b)).max() < 1e-12


def test_frozen_samples():
    # quarter-turn about x
    q = spatial.quat_from_euler([np.pi / 2, 0.0, 0.0])
    assert np.allclose(q, [np.sqrt(0.5), np.sqrt(0.5), 0.0, 0.0], atol=1e-15)
    # euler-rate matrix at a frozen pose
    T = spatial.euler_rate_matrix([0.2, 0.5, -0.3])
    expect = np.array([
        [np.cos(-0.3) * np.cos(0.5), -np.sin(-0.3), 0.0],
        [np.sin(-0.3) * np.cos(0.5), np.cos(-0.3), 0.0],
        [-np.sin(0.5), 0.0, 1.0],
    ])
    assert np.allclose(T, expect, atol=1e-15)
    assert abs(np.linalg.det(T) - np.cos(0.5)) < 1e-15
    assert spatial.in_euler_box([0.2, 0.5, -0.3])
    assert not spatial.in_euler_box([0.2, np.pi / 2, -0.3])
