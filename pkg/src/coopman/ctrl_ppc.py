"""Decentralized funnel (prescribed-performance) pose tracking.

Drives each pose channel [x y z roll pitch yaw] and each velocity channel
inside a shrinking symmetric funnel ``|e_k(t)| < rho_k(t)`` where

    rho_k(t) = (rho_k0 - rho_k_inf) * exp(-decay_k * t) + rho_k_inf.

Errors are normalized (``xi = e / rho``), mapped through the barrier
``eps = ln((1+xi)/(1-xi))`` whose slope is ``r = 2/(1-xi^2)``, and fed back
proportionally -- no dynamic model, no disturbance model, no adaptation:

    v_r  = -pose_gain * Jinv(eta) * rho_s^-1 * r_s * eps_s      (object twist)
    u_i  = -vel_gain * D_i * rho_v^-1 * r_v * eps_v,  e_v = v_o - v_r

with ``Jinv = diag(I, T(eta))`` mapping pose-space rates to world twists and
``D_i`` the agent's wrench-distribution block.  All agents compute the same
normalized velocity error from the shared object state, so the commanded
object wrench sums to ``-vel_gain * rho_v^-1 * r_v * eps_v`` exactly.

Pose errors use unwrapped euler angles (the caller maintains continuity
across the +-pi seam).  Leaving a funnel is unrecoverable for the barrier
and raises ``FunnelViolation`` rather than clipping.
"""

from types import SimpleNamespace

import numpy as np

from . import spatial
from .errors import FunnelViolation, ScenarioError

_CHANNELS = ("x", "y", "z", "roll", "pitch", "yaw")


class Funnel:
    """Six exponentially shrinking symmetric bounds."""

    def __init__(self, rho0, rho_inf, decay):
        self.rho0 = np.asarray(rho0, dtype=float)
        self.rho_inf = np.asarray(rho_inf, dtype=float)
        self.decay = np.asarray(decay, dtype=float)
        for name in ("rho0", "rho_inf", "decay"):
            arr = getattr(self, name)
            if arr.shape != (6,):
                raise ScenarioError("funnel %s must have 6 entries" % name)
        if np.any(self.rho_inf <= 0) or np.any(self.rho0 < self.rho_inf):
            raise ScenarioError("funnels need rho0 >= rho_inf > 0")
        if np.any(self.decay < 0):
            raise ScenarioError("funnel decay rates must be >= 0")

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return ((self.rho0 - self.rho_inf) * np.exp(-self.decay * t[..., None])
                + self.rho_inf)

    def rate(self, t):
        t = np.asarray(t, dtype=float)
        return (-self.decay * (self.rho0 - self.rho_inf)
                * np.exp(-self.decay * t[..., None]))

    def check(self, t, e, label):
        """Normalized error xi = e / rho(t); raises when any |xi| >= 1."""
        rho = self.value(t)
        xi = e / rho
        if np.any(np.abs(xi) >= 1.0):
            bad = np.unravel_index(np.abs(xi).argmax(), xi.shape)
            t_full = np.broadcast_to(np.asarray(t, dtype=float)[..., None],
                                     xi.shape)
            raise FunnelViolation(
                "%s error left its funnel on channel %s" %
                (label, _CHANNELS[bad[-1]]),
                t=float(t_full[bad]), channel=_CHANNELS[bad[-1]],
                value=float(np.broadcast_to(e, xi.shape)[bad]),
                bound=float(np.broadcast_to(rho, xi.shape)[bad]))
        return rho, xi


def barrier(xi):
    """(eps, r): symmetric log barrier of the normalized error and its slope."""
    eps = np.log1p(xi) - np.log1p(-xi)
    r = 2.0 / (1.0 - xi * xi)
    return eps, r


def pose_funnel_auto(e0, rho_inf, decay, margin, pitch_error_cap,
                     reference_pitch_max):
    """Initial pose funnel: measured start errors plus a margin, except the
    pitch channel which gets the fixed cap keeping total pitch away from
    the euler-rate singularity (requires cap + max reference pitch < pi/2)."""
    e0 = np.asarray(e0, dtype=float)
    if pitch_error_cap + reference_pitch_max >= np.pi / 2:
        raise ScenarioError(
            "pitch cap %.3f + reference pitch %.3f reaches the euler "
            "singularity" % (pitch_error_cap, reference_pitch_max))
    if abs(e0[4]) >= pitch_error_cap:
        raise ScenarioError("initial pitch error exceeds its funnel cap")
    rho0 = np.abs(e0) + margin
    rho0[4] = pitch_error_cap
    rho_inf = np.broadcast_to(rho_inf, (6,)).astype(float).copy()
    rho0 = np.maximum(rho0, rho_inf)
    return Funnel(rho0, rho_inf, np.broadcast_to(decay, (6,)))


def velocity_funnel_auto(e_v0, rho_inf, decay, pad):
    """Initial velocity funnel: measured start error plus a pad, per axis."""
    e_v0 = np.asarray(e_v0, dtype=float)
    rho_inf = np.broadcast_to(rho_inf, (6,)).astype(float).copy()
    rho0 = np.maximum(np.abs(e_v0) + pad, rho_inf)
    return Funnel(rho0, rho_inf, np.broadcast_to(decay, (6,)))


class FunnelController:
    """Model-free funnel tracking for the whole team."""

    uses_estimates = False

    def __init__(self, plant, reference, pose_funnel, vel_funnel,
                 pose_gain, vel_gain):
        self.plant = plant
        self.reference = reference
        self.pose_funnel = pose_funnel
        self.vel_funnel = vel_funnel
        self.pose_gain = float(pose_gain)
        self.vel_gain = float(vel_gain)

    @property
    def estimate_size(self):
        return 0

    def initial_estimates(self):
        return np.zeros(0)

    def reference_twist(self, t, eta, pose):
        """Funnel-feedback object twist v_r and pose-error diagnostics."""
        ref = self.reference.at(t)
        e_s = pose - ref.pose
        rho_s, xi_s = self.pose_funnel.check(t, e_s, "pose")
        eps_s, r_s = barrier(xi_s)
        grad = r_s * eps_s / rho_s
        Jinv = spatial.pose_rate_matrix_inv(eta)
        v_r = -self.pose_gain * np.einsum("...ij,...j->...i", Jinv, grad)
        return SimpleNamespace(e_s=e_s, rho_s=rho_s, xi_s=xi_s, v_r=v_r)

    def command(self, t, kin, est, eta):
        """Agent wrenches (..., N, 6) plus empty estimate rates."""
        pose = np.concatenate([kin.p, eta], axis=-1)
        pos = self.reference_twist(t, eta, pose)
        e_v = kin.v_o - pos.v_r
        rho_v, xi_v = self.vel_funnel.check(t, e_v, "velocity")
        eps_v, r_v = barrier(xi_v)
        w = self.vel_gain * r_v * eps_v / rho_v
        u = -np.einsum("...nij,...j->...ni", kin.D, w)
        info = SimpleNamespace(e_s=pos.e_s, xi_s=pos.xi_s, v_r=pos.v_r,
                               e_v=e_v, xi_v=xi_v,
                               margin_s=np.abs(pos.xi_s).max(axis=-1),
                               margin_v=np.abs(xi_v).max(axis=-1))
        return u, np.zeros(np.shape(est)), info
