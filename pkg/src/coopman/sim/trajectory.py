"""Smooth pose references with analytic twist and acceleration.

Each of the six pose axes [x, y, z, roll, pitch, yaw] follows
``offset + amplitude * sin(frequency * t + phase)``, which covers constant
holds (zero amplitude), sine and cosine drives, and phase-shifted starts.
Orientation axes are ZYX extrinsic-roll-pitch-yaw angles; the reference
angular velocity/acceleration are returned in world frame via the euler-rate
map and its derivative, so controllers never differentiate numerically.

The reference quaternion is built *without* the canonical sign flip: along a
smooth euler path the raw product quaternion stays smooth even when the
scalar part crosses zero, which matters for attitude-error feedback.
"""

from types import SimpleNamespace

import numpy as np

from .. import spatial
from ..errors import ScenarioError


class SinusoidReference:
    """Per-axis sinusoid pose reference with exact derivatives."""

    def __init__(self, offset, amplitude, frequency, phase):
        self.offset = np.asarray(offset, dtype=float)
        self.amplitude = np.asarray(amplitude, dtype=float)
        self.frequency = np.asarray(frequency, dtype=float)
        self.phase = np.asarray(phase, dtype=float)
        for name in ("offset", "amplitude", "frequency", "phase"):
            if getattr(self, name).shape != (6,):
                raise ScenarioError(
                    "reference %s must have 6 entries (x y z roll pitch yaw)"
                    % name)

    @classmethod
    def hold(cls, pose):
        """Constant reference at the given pose."""
        z = np.zeros(6)
        return cls(pose, z, z, z)

    def at(self, t):
        """Reference state at time t (scalar or batched)."""
        t = np.asarray(t, dtype=float)
        arg = self.frequency * t[..., None] + self.phase
        pose = self.offset + self.amplitude * np.sin(arg)
        rate = self.amplitude * self.frequency * np.cos(arg)
        curv = -self.amplitude * self.frequency ** 2 * np.sin(arg)
        eta, eta_rate, eta_curv = pose[..., 3:], rate[..., 3:], curv[..., 3:]
        T = spatial.euler_rate_matrix(eta)
        Td = spatial.euler_rate_matrix_dot(eta, eta_rate)
        omega = np.einsum("...ij,...j->...i", T, eta_rate)
        omega_rate = (np.einsum("...ij,...j->...i", Td, eta_rate)
                      + np.einsum("...ij,...j->...i", T, eta_curv))
        return SimpleNamespace(
            pose=pose,
            p=pose[..., :3],
            eta=eta,
            eta_rate=eta_rate,
            quat=spatial.quat_from_euler(eta, canonical=False),
            v=np.concatenate([rate[..., :3], omega], axis=-1),
            acc=np.concatenate([curv[..., :3], omega_rate], axis=-1),
        )
