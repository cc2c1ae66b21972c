"""Scenario configuration, reference trajectories, and the simulation loop."""

from .trajectory import SinusoidReference

__all__ = ["SinusoidReference"]
