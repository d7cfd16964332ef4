"""Finite-difference laboratory for divergence-form operators whose
coefficient degenerates or blows up on the hyperplane y = 0.

Modules: weights (analytic layer), mesh, assembly, solver, calculus,
analysis, frequency, experiments (scenario runner and CLI).
"""

from .weights import WeightParams, eval_weight, u_bar, catalog

__all__ = ["WeightParams", "eval_weight", "u_bar", "catalog"]
__version__ = "0.1.0"
