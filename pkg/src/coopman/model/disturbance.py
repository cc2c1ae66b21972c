"""Structured bounded disturbances acting on agents and object.

Each disturbance is d = B(state, t) dbar with a known, bounded basis matrix B
(diagonal here) and an unknown constant vector dbar -- the structure the
adaptive controller compensates exactly.  Basis diagonals:

* agent i:  ||q_i|| sin(w_i t + phi_i) + v_i   (v_i = task twist of agent i)
* object:   ||v_o|| sin(w_o t + phi_o) + v_o

Frequencies/phases are drawn once from the scenario RNG, so runs with equal
seeds are bit-identical.  ``dbar`` rows of zeros disable a channel.
"""

import numpy as np


class StructuredDisturbance:
    """Holds the drawn basis coefficients and the true dbar vectors."""

    def __init__(self, dbar_agents, dbar_object, rng):
        self.dbar_agents = np.atleast_2d(np.asarray(dbar_agents, dtype=float))
        self.dbar_object = np.asarray(dbar_object, dtype=float)
        n = self.dbar_agents.shape[0]
        self.freq_agents = rng.uniform(0.0, 1.0, n)
        self.phase_agents = rng.uniform(0.0, 1.0, n)
        self.freq_object = rng.uniform(0.0, 1.0)
        self.phase_object = rng.uniform(0.0, 1.0)

    @classmethod
    def disabled(cls, n_agents):
        rng = np.random.default_rng(0)
        return cls(np.zeros((n_agents, 6)), np.zeros(6), rng)

    @property
    def enabled(self):
        return bool(np.any(self.dbar_agents) or np.any(self.dbar_object))

    def agent_basis_diag(self, q, v_task, t):
        """Diagonal entries of the per-agent basis matrices, (..., N, 6)."""
        q = np.asarray(q, dtype=float)
        v_task = np.asarray(v_task, dtype=float)
        qn = np.linalg.norm(q, axis=-1)
        s = np.sin(self.freq_agents * np.asarray(t, dtype=float)[..., None]
                   + self.phase_agents)
        return (qn * s)[..., None] + v_task

    def object_basis_diag(self, v_o, t):
        """Diagonal entries of the object basis matrix, (..., 6)."""
        v_o = np.asarray(v_o, dtype=float)
        s = np.sin(self.freq_object * np.asarray(t, dtype=float) + self.phase_object)
        return (np.linalg.norm(v_o, axis=-1) * s)[..., None] + v_o

    def agent_force(self, q, v_task, t):
        return self.agent_basis_diag(q, v_task, t) * self.dbar_agents

    def object_force(self, v_o, t):
        return self.object_basis_diag(v_o, t) * self.dbar_object
