"""Rigid-grasp kinematics: twist propagation, grasp matrix, load distribution.

Grasp points are fixed in the object frame at body offsets ``b_i`` (position
of end effector i relative to the object COM).  With ``p_i = R b_i`` the
world offset, the end-effector twist is ``v_i = offset_twist_map(p_i) @ v_o``
and the object wrench collects as ``f_o = sum_i offset_twist_map(p_i)^T f_i``.

``load_distribution`` builds the wrench-distribution blocks from virtual
mass/inertia shares (m*_i, J*_i).  Stacked over agents they form a right
inverse of the stacked transposed grasp maps; the shares must satisfy
``sum_i m*_i b_i = 0`` so the off-diagonal coupling cancels.
"""

import numpy as np

from ..errors import ScenarioError
from ..spatial import skew


def offset_twist_map(p_rel):
    """6x6 map propagating an object twist to a point at world offset p_rel.

    [[I, -skew(p_rel)], [0, I]]; its spectral norm is at most ||p_rel|| + 1.
    """
    p_rel = np.asarray(p_rel, dtype=float)
    out = np.zeros(p_rel.shape[:-1] + (6, 6))
    idx = np.arange(6)
    out[..., idx, idx] = 1.0
    out[..., :3, 3:] = -skew(p_rel)
    return out


def offset_twist_map_dot(p_rel, omega):
    """Time derivative of offset_twist_map when the offset rotates with omega."""
    pdot = np.cross(np.asarray(omega, dtype=float), np.asarray(p_rel, dtype=float))
    out = np.zeros(pdot.shape[:-1] + (6, 6))
    out[..., :3, 3:] = -skew(pdot)
    return out


def grasp_map(R, offsets_body):
    """Per-agent twist maps (..., N, 6, 6) for body-frame grasp offsets (N, 3)."""
    R = np.asarray(R, dtype=float)
    offsets_body = np.asarray(offsets_body, dtype=float)
    p_rel = np.einsum("...ij,nj->...ni", R, offsets_body)
    return offset_twist_map(p_rel), p_rel


def grasp_map_dot(p_rel, omega):
    """Per-agent twist-map rates given world offsets (..., N, 3) and omega."""
    return offset_twist_map_dot(p_rel, np.asarray(omega, dtype=float)[..., None, :])


def load_distribution(p_rel, mass_shares, inertia_shares):
    """Wrench-distribution blocks (..., N, 6, 6) from virtual shares.

    mass_shares (N,) and inertia_shares (N,) scalars (isotropic virtual
    inertia J*_i = j_i I).  Requires sum_i m*_i p_i = 0; then the blocks
    stack into a right inverse of the stacked transposed twist maps.
    """
    p_rel = np.asarray(p_rel, dtype=float)
    m = np.asarray(mass_shares, dtype=float)
    j = np.asarray(inertia_shares, dtype=float)
    if np.any(m <= 0.0) or np.any(j <= 0.0):
        raise ScenarioError("virtual load shares must be positive")
    total_m = m.sum()
    Sp = skew(p_rel)
    # J*_o = sum_i J*_i I - sum_i m*_i skew(p_i)^2  (symmetric positive definite)
    Jo = j.sum() * np.eye(3) - np.einsum("n,...nij,...njk->...ik", m, Sp, Sp)
    Jo_inv = np.linalg.inv(Jo)
    out = np.zeros(p_rel.shape[:-1] + (6, 6))
    idx = np.arange(3)
    out[..., idx, idx] = (m / total_m)[:, None]
    # offset of the object relative to the effector is -p_i
    out[..., :3, 3:] = -m[:, None, None] * Sp @ Jo_inv[..., None, :, :]
    out[..., 3:, 3:] = j[:, None, None] * np.broadcast_to(
        Jo_inv[..., None, :, :], out[..., 3:, 3:].shape)
    return out


def check_share_balance(offsets_body, mass_shares, tol=1e-12):
    """Raises unless sum_i m*_i b_i = 0 (required by load_distribution)."""
    r = np.einsum("n,nj->j", np.asarray(mass_shares, dtype=float),
                  np.asarray(offsets_body, dtype=float))
    if np.linalg.norm(r) > tol:
        raise ScenarioError(
            "virtual mass shares must balance the grasp offsets: "
            "sum_i m*_i b_i = %s" % np.array_str(r, precision=6))


def stacked(blocks):
    """Reshapes (..., N, 6, 6) per-agent blocks into a (..., 6N, 6) stack."""
    blocks = np.asarray(blocks, dtype=float)
    return blocks.reshape(blocks.shape[:-3] + (blocks.shape[-3] * 6, 6))


def nullspace_filter(G_blocks, D_blocks, f_agents):
    """Removes the object-moving part of stacked agent wrenches.

    Returns (I - D G^T) f for per-agent wrench rows f_agents (..., N, 6),
    where G are the twist-map blocks and D the distribution blocks.  The
    result adds up to a zero object wrench, so it only squeezes the grasp.
    """
    f_agents = np.asarray(f_agents, dtype=float)
    fo = np.einsum("...nji,...nj->...i", G_blocks, f_agents)
    return f_agents - np.einsum("...nij,...j->...ni", D_blocks, fo)


def internal_wrench_component(G_blocks, f_agents):
    """Least-squares internal (motion-free) part of the interaction wrenches.

    Projects the stacked wrenches onto the null space of the stacked
    transposed twist maps using the unweighted pseudoinverse.
    """
    f_agents = np.asarray(f_agents, dtype=float)
    fo = np.einsum("...nji,...nj->...i", G_blocks, f_agents)
    gram = np.einsum("...nji,...njk->...ik", G_blocks, G_blocks)
    lam = np.linalg.solve(gram, fo[..., None])[..., 0]
    return f_agents - np.einsum("...nij,...j->...ni", G_blocks, lam)
