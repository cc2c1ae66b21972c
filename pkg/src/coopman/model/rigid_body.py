"""Newton-Euler dynamics of the carried rigid body in world coordinates.

The body frame sits at the center of mass.  With world-frame twist
``v = [vdot; omega]`` the dynamics read

    M(R) vdot + C(R, omega) v + g + d = f

where M = diag(m I, R I_body R^T), C = [[0, 0], [0, skew(omega) I_world]],
and g = [0, 0, m * gravity, 0, 0, 0] (the weight moved to the left-hand
side).  Mdot - 2C is skew-symmetric by construction.
"""

import numpy as np

from ..errors import ScenarioError
from ..spatial import skew

# symmetric basis of the 3x3 inertia tensor, row-major upper triangle
_INERTIA_IDX = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
_INERTIA_BASIS = np.zeros((6, 3, 3))
for _a, (_i, _j) in enumerate(_INERTIA_IDX):
    _INERTIA_BASIS[_a, _i, _j] = 1.0
    _INERTIA_BASIS[_a, _j, _i] = 1.0
del _a, _i, _j


class RigidBody:
    """Rigid body with mass, body-frame inertia tensor and uniform gravity."""

    n_params = 7

    def __init__(self, mass, inertia, gravity=9.81):
        self.mass = float(mass)
        inertia = np.asarray(inertia, dtype=float)
        if inertia.shape == (3,):
            inertia = np.diag(inertia)
        self.inertia = inertia
        self.gravity = float(gravity)
        if self.mass <= 0.0:
            raise ScenarioError("object mass must be positive")
        if inertia.shape != (3, 3) or np.any(np.abs(inertia - inertia.T) > 1e-12):
            raise ScenarioError("object inertia must be a symmetric 3x3 tensor")
        if np.any(np.linalg.eigvalsh(inertia) <= 0.0):
            raise ScenarioError("object inertia must be positive definite")

    @property
    def theta(self):
        """[mass, Ixx, Ixy, Ixz, Iyy, Iyz, Izz]."""
        th = np.empty(7)
        th[0] = self.mass
        for a, (i, j) in enumerate(_INERTIA_IDX):
            th[1 + a] = self.inertia[i, j]
        return th

    def world_inertia(self, R):
        """Inertia tensor expressed in the world frame, R I R^T."""
        R = np.asarray(R, dtype=float)
        return R @ self.inertia @ np.swapaxes(R, -1, -2)

    def mass_matrix(self, R):
        R = np.asarray(R, dtype=float)
        out = np.zeros(R.shape[:-2] + (6, 6))
        out[..., 0, 0] = out[..., 1, 1] = out[..., 2, 2] = self.mass
        out[..., 3:, 3:] = self.world_inertia(R)
        return out

    def coriolis(self, R, omega):
        out = np.zeros(np.asarray(R).shape[:-2] + (6, 6))
        out[..., 3:, 3:] = skew(omega) @ self.world_inertia(R)
        return out

    def gravity_wrench(self):
        out = np.zeros(6)
        out[2] = self.mass * self.gravity
        return out

    def force_balance(self, R, omega, vdot, v):
        """Left-hand side M vdot + C v + g; equals the applied wrench."""
        return (np.einsum("...ij,...j->...i", self.mass_matrix(R), vdot)
                + np.einsum("...ij,...j->...i", self.coriolis(R, omega), v)
                + self.gravity_wrench())

    def regressor(self, R, omega, z, w):
        """Y with Y @ theta = M w + C z + g for test twists z, w; (..., 6, 7)."""
        R = np.asarray(R, dtype=float)
        omega = np.asarray(omega, dtype=float)
        z = np.asarray(z, dtype=float)
        w = np.asarray(w, dtype=float)
        shape = np.broadcast_shapes(R.shape[:-2], omega.shape[:-1],
                                    z.shape[:-1], w.shape[:-1])
        Y = np.zeros(shape + (6, 7))
        Y[..., :3, 0] = w[..., :3]
        Y[..., 2, 0] += self.gravity
        # world-frame inertia basis R E_a R^T applied to the angular parts
        RE = np.einsum("...ip,apq,...jq->...aij", R, _INERTIA_BASIS, R)
        Y[..., 3:, 1:] = np.moveaxis(
            np.einsum("...aij,...j->...ai", RE, w[..., 3:])
            + np.einsum("...ij,...ajk,...k->...ai", skew(omega), RE, z[..., 3:]),
            -2, -1)
        return Y

    def kinetic_energy(self, R, v):
        v = np.asarray(v, dtype=float)
        M = self.mass_matrix(R)
        return 0.5 * np.einsum("...i,...ij,...j->...", v, M, v)

    def potential_energy(self, p):
        return self.mass * self.gravity * np.asarray(p, dtype=float)[..., 2]
