"""Spatial algebra: quaternions, Z-Y-X Euler angles and twist mappings.

Conventions
-----------
* Quaternions are unit and scalar-first, ``[w, x, y, z]``.  The product
  ``quat_mul(a, b)`` composes rotations so that
  ``rotmat_from_quat(quat_mul(a, b)) = rotmat_from_quat(a) @ rotmat_from_quat(b)``.
* Euler angles are stored ``[roll, pitch, yaw]`` and follow the intrinsic
  Z-Y-X convention, ``R = Rz(yaw) @ Ry(pitch) @ Rx(roll)``.  The valid open
  box is ``roll, yaw in (-pi, pi)`` and ``pitch in (-pi/2, pi/2)``.
* Angular velocities are expressed in the world frame, so the quaternion
  kinematics read ``qdot = 0.5 * quat_rate_matrix(q) @ omega``.
* Everything is float64 and broadcasts over leading axes unless noted.
"""

import numpy as np

from .errors import RepresentationSingularity

# half-width of the guard band around the pitch singularity (rad)
PITCH_GUARD = 1e-9


def skew(v):
    """Maps a vector to the skew-symmetric matrix such that skew(a) @ b = a x b."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    out[..., 0, 1] = -z
    out[..., 0, 2] = y
    out[..., 1, 0] = z
    out[..., 1, 2] = -x
    out[..., 2, 0] = -y
    out[..., 2, 1] = x
    return out


def quat_mul(a, b):
    """Hamilton product of two scalar-first quaternions."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, av = a[..., :1], a[..., 1:]
    bw, bv = b[..., :1], b[..., 1:]
    w = aw * bw - np.sum(av * bv, axis=-1, keepdims=True)
    v = aw * bv + bw * av + np.cross(av, bv)
    return np.concatenate([w, v], axis=-1)


def quat_conj(q):
    """Conjugate (= inverse for unit quaternions)."""
    q = np.asarray(q, dtype=float)
    return np.concatenate([q[..., :1], -q[..., 1:]], axis=-1)


def quat_normalize(q):
    """Rescales to unit norm; raises ValueError on a near-zero quaternion."""
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(n < 1e-12):
        raise ValueError("cannot normalize a near-zero quaternion")
    return q / n


def quat_rate_matrix(q):
    """4x3 matrix E(q) with qdot = 0.5 * E(q) @ omega (world-frame omega).

    Satisfies E(q).T @ E(q) = I for unit q, and omega = 2 E(q).T @ qdot.
    """
    q = np.asarray(q, dtype=float)
    w, v = q[..., 0], q[..., 1:]
    top = -v[..., None, :]
    eye = np.broadcast_to(np.eye(3), v.shape[:-1] + (3, 3))
    bottom = w[..., None, None] * eye - skew(v)
    return np.concatenate([top, bottom], axis=-2)


def quat_derivative(q, omega):
    """Time derivative of a unit quaternion under world-frame angular velocity."""
    omega = np.asarray(omega, dtype=float)
    return 0.5 * np.einsum("...ij,...j->...i", quat_rate_matrix(q), omega)


def angular_velocity_from_quat_rate(q, qdot):
    """Recovers world-frame omega from (q, qdot): omega = 2 E(q).T qdot."""
    qdot = np.asarray(qdot, dtype=float)
    return 2.0 * np.einsum("...ji,...j->...i", quat_rate_matrix(q), qdot)


def rotmat_from_quat(q):
    """Rotation matrix of a unit scalar-first quaternion."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    out = np.empty(q.shape[:-1] + (3, 3))
    out[..., 0, 0] = 1.0 - 2.0 * (y * y + z * z)
    out[..., 0, 1] = 2.0 * (x * y - w * z)
    out[..., 0, 2] = 2.0 * (x * z + w * y)
    out[..., 1, 0] = 2.0 * (x * y + w * z)
    out[..., 1, 1] = 1.0 - 2.0 * (x * x + z * z)
    out[..., 1, 2] = 2.0 * (y * z - w * x)
    out[..., 2, 0] = 2.0 * (x * z - w * y)
    out[..., 2, 1] = 2.0 * (y * z + w * x)
    out[..., 2, 2] = 1.0 - 2.0 * (x * x + y * y)
    return out


def quat_from_rotmat(R):
    """Unit quaternion (w >= 0) of a single 3x3 rotation matrix."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise ValueError("quat_from_rotmat expects a single 3x3 matrix")
    # Shepperd's method: pick the largest of the four squared components.
    tr = np.trace(R)
    cand = np.array([tr, R[0, 0], R[1, 1], R[2, 2]])
    k = int(np.argmax(cand))
    if k == 0:
        s = np.sqrt(1.0 + tr) * 2.0
        q = np.array([0.25 * s,
                      (R[2, 1] - R[1, 2]) / s,
                      (R[0, 2] - R[2, 0]) / s,
                      (R[1, 0] - R[0, 1]) / s])
    elif k == 1:
        s = np.sqrt(1.0 + 2.0 * R[0, 0] - tr) * 2.0
        q = np.array([(R[2, 1] - R[1, 2]) / s,
                      0.25 * s,
                      (R[0, 1] + R[1, 0]) / s,
                      (R[0, 2] + R[2, 0]) / s])
    elif k == 2:
        s = np.sqrt(1.0 + 2.0 * R[1, 1] - tr) * 2.0
        q = np.array([(R[0, 2] - R[2, 0]) / s,
                      (R[0, 1] + R[1, 0]) / s,
                      0.25 * s,
                      (R[1, 2] + R[2, 1]) / s])
    else:
        s = np.sqrt(1.0 + 2.0 * R[2, 2] - tr) * 2.0
        q = np.array([(R[1, 0] - R[0, 1]) / s,
                      (R[0, 2] + R[2, 0]) / s,
                      (R[1, 2] + R[2, 1]) / s,
                      0.25 * s])
    if q[0] < 0.0:
        q = -q
    return q / np.linalg.norm(q)


def rotmat_from_euler(eta):
    """Rotation matrix of [roll, pitch, yaw] (intrinsic Z-Y-X)."""
    eta = np.asarray(eta, dtype=float)
    cr, sr = np.cos(eta[..., 0]), np.sin(eta[..., 0])
    cp, sp = np.cos(eta[..., 1]), np.sin(eta[..., 1])
    cy, sy = np.cos(eta[..., 2]), np.sin(eta[..., 2])
    out = np.empty(eta.shape[:-1] + (3, 3))
    out[..., 0, 0] = cy * cp
    out[..., 0, 1] = cy * sp * sr - sy * cr
    out[..., 0, 2] = cy * sp * cr + sy * sr
    out[..., 1, 0] = sy * cp
    out[..., 1, 1] = sy * sp * sr + cy * cr
    out[..., 1, 2] = sy * sp * cr - cy * sr
    out[..., 2, 0] = -sp
    out[..., 2, 1] = cp * sr
    out[..., 2, 2] = cp * cr
    return out


def euler_from_rotmat(R, strict=True):
    """[roll, pitch, yaw] of a rotation matrix, principal values.

    With ``strict=True`` raises RepresentationSingularity when the pitch is
    within PITCH_GUARD of +/- pi/2 (roll and yaw are then not separable);
    with ``strict=False`` the atan2 fallback values are returned instead.
    """
    R = np.asarray(R, dtype=float)
    pitch = np.arcsin(np.clip(-R[..., 2, 0], -1.0, 1.0))
    if strict and np.any(np.pi / 2.0 - np.abs(pitch) < PITCH_GUARD):
        raise RepresentationSingularity(
            "pitch within %.1e rad of +/- pi/2; roll/yaw are undefined" % PITCH_GUARD)
    roll = np.arctan2(R[..., 2, 1], R[..., 2, 2])
    yaw = np.arctan2(R[..., 1, 0], R[..., 0, 0])
    return np.stack([roll, pitch, yaw], axis=-1)


def quat_from_euler(eta, canonical=True):
    """Unit quaternion of [roll, pitch, yaw].

    Composed as qz(yaw/2) * qy(pitch/2) * qx(roll/2).  With ``canonical=True``
    the sign is flipped so that w >= 0.  Pass ``canonical=False`` when
    sampling a smooth angle path: the raw composition is continuous in eta,
    whereas canonicalization introduces sign jumps whenever w crosses zero.
    """
    eta = np.asarray(eta, dtype=float)
    hr, hp, hy = eta[..., 0] / 2.0, eta[..., 1] / 2.0, eta[..., 2] / 2.0
    zero = np.zeros_like(hr)
    qx = np.stack([np.cos(hr), np.sin(hr), zero, zero], axis=-1)
    qy = np.stack([np.cos(hp), zero, np.sin(hp), zero], axis=-1)
    qz = np.stack([np.cos(hy), zero, zero, np.sin(hy)], axis=-1)
    q = quat_mul(qz, quat_mul(qy, qx))
    if canonical:
        q = np.where(q[..., :1] < 0.0, -q, q)
    return q


def euler_from_quat(q, strict=True):
    """[roll, pitch, yaw] principal values of a unit quaternion."""
    return euler_from_rotmat(rotmat_from_quat(q), strict=strict)


def euler_rate_matrix(eta):
    """3x3 matrix T(eta) with omega = T(eta) @ etadot (world-frame omega).

    det T = cos(pitch); T loses rank exactly at the pitch singularity.
    """
    eta = np.asarray(eta, dtype=float)
    cp, sp = np.cos(eta[..., 1]), np.sin(eta[..., 1])
    cy, sy = np.cos(eta[..., 2]), np.sin(eta[..., 2])
    out = np.zeros(eta.shape[:-1] + (3, 3))
    out[..., 0, 0] = cy * cp
    out[..., 0, 1] = -sy
    out[..., 1, 0] = sy * cp
    out[..., 1, 1] = cy
    out[..., 2, 0] = -sp
    out[..., 2, 2] = 1.0
    return out


def euler_rate_matrix_dot(eta, etadot):
    """Time derivative of euler_rate_matrix along (eta, etadot)."""
    eta = np.asarray(eta, dtype=float)
    etadot = np.asarray(etadot, dtype=float)
    cp, sp = np.cos(eta[..., 1]), np.sin(eta[..., 1])
    cy, sy = np.cos(eta[..., 2]), np.sin(eta[..., 2])
    dp, dy = etadot[..., 1], etadot[..., 2]
    out = np.zeros(eta.shape[:-1] + (3, 3))
    out[..., 0, 0] = -sy * dy * cp - cy * sp * dp
    out[..., 0, 1] = -cy * dy
    out[..., 1, 0] = cy * dy * cp - sy * sp * dp
    out[..., 1, 1] = -sy * dy
    out[..., 2, 0] = -cp * dp
    return out


def euler_rate_matrix_inv(eta):
    """Closed-form inverse of euler_rate_matrix; raises near the singularity."""
    eta = np.asarray(eta, dtype=float)
    cp, sp = np.cos(eta[..., 1]), np.sin(eta[..., 1])
    cy, sy = np.cos(eta[..., 2]), np.sin(eta[..., 2])
    if np.any(np.abs(cp) < 1e-12):
        raise RepresentationSingularity("euler_rate_matrix is singular at pitch = +/- pi/2")
    out = np.zeros(eta.shape[:-1] + (3, 3))
    out[..., 0, 0] = cy / cp
    out[..., 0, 1] = sy / cp
    out[..., 1, 0] = -sy
    out[..., 1, 1] = cy
    out[..., 2, 0] = cy * sp / cp
    out[..., 2, 1] = sy * sp / cp
    out[..., 2, 2] = 1.0
    return out


def _pose_block(top, bottom):
    """Assembles diag(top, bottom) for 3x3 blocks with broadcasting."""
    shape = np.broadcast_shapes(top.shape[:-2], bottom.shape[:-2])
    out = np.zeros(shape + (6, 6))
    out[..., :3, :3] = top
    out[..., 3:, 3:] = bottom
    return out


def pose_rate_matrix(eta):
    """6x6 map from a world twist [v, omega] to pose rates [pdot, etadot]."""
    eta = np.asarray(eta, dtype=float)
    eye = np.broadcast_to(np.eye(3), eta.shape[:-1] + (3, 3))
    return _pose_block(eye, euler_rate_matrix_inv(eta))


def pose_rate_matrix_inv(eta):
    """6x6 map from pose rates [pdot, etadot] to the world twist [v, omega]."""
    eta = np.asarray(eta, dtype=float)
    eye = np.broadcast_to(np.eye(3), eta.shape[:-1] + (3, 3))
    return _pose_block(eye, euler_rate_matrix(eta))


def pose_rate_matrix_norm(eta):
    """Spectral norm of pose_rate_matrix: 1 / sqrt(1 - |sin(pitch)|).

    Follows from T(eta).T T(eta) having eigenvalues {1, 1 +/- |sin(pitch)|}.
    """
    eta = np.asarray(eta, dtype=float)
    s = np.abs(np.sin(eta[..., 1]))
    if np.any(1.0 - s < 1e-15):
        raise RepresentationSingularity("pose-rate map unbounded at pitch = +/- pi/2")
    return 1.0 / np.sqrt(1.0 - s)


def pose_rate_matrix_inv_norm(eta):
    """Spectral norm of pose_rate_matrix_inv: sqrt(1 + |sin(pitch)|) <= sqrt(2)."""
    eta = np.asarray(eta, dtype=float)
    return np.sqrt(1.0 + np.abs(np.sin(eta[..., 1])))


def wrap_angle(x):
    """Wraps angles into (-pi, pi]."""
    x = np.asarray(x, dtype=float)
    y = np.mod(x + np.pi, 2.0 * np.pi) - np.pi
    return np.where(y == -np.pi, np.pi, y)


def unwrap_near(eta, ref):
    """Shifts each angle by a multiple of 2*pi to land closest to ``ref``."""
    eta = np.asarray(eta, dtype=float)
    ref = np.asarray(ref, dtype=float)
    return eta + 2.0 * np.pi * np.round((ref - eta) / (2.0 * np.pi))


def in_euler_box(eta):
    """True when eta lies in the open box (-pi,pi) x (-pi/2,pi/2) x (-pi,pi)."""
    eta = np.asarray(eta, dtype=float)
    return bool(np.all(np.abs(eta[..., [0, 2]]) < np.pi)
                and np.all(np.abs(eta[..., 1]) < np.pi / 2.0))
