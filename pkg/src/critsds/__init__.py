"""Simulation and numerical verification of stochastic dynamical systems
on the real line in the critical regime E[log A] = 0.

Subpackages map onto the pieces of the problem: exact affine-group
algebra (`affine`), random map families (`maps`), normalizing
conjugations (`conjugate`), seeded trajectory simulation (`engine`),
empirical invariant Radon measures and their tail diagnostics
(`measure`), ladder-epoch renewal machinery (`renewal`), the reflected
random walk (`reflected`) and a scenario-driven CLI (`cli`).
"""

from ._kernels import BACKEND_NAME

__all__ = ["BACKEND_NAME"]
__version__ = "0.1.0"
