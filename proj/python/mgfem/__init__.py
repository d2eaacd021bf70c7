"""Geometric multigrid finite element solvers.

Matrices are returned as ``(data, indices, indptr, shape)`` and can be
passed straight to ``scipy.sparse.csr_matrix``.
"""

from ._mgfem import (
    ConfigError,
    DimensionError,
    Error,
    NumericalError,
    SolverError,
    UnsupportedError,
    adaptive_mesh_stats,
    config_keys,
    default_config,
    mass_matrix,
    mesh_node_count,
    normalize_config,
    prolongation_matrix,
    run,
    stiffness_matrix,
    td_exact,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "Error",
    "NumericalError",
    "SolverError",
    "UnsupportedError",
    "adaptive_mesh_stats",
    "config_keys",
    "default_config",
    "mass_matrix",
    "mesh_node_count",
    "normalize_config",
    "prolongation_matrix",
    "run",
    "stiffness_matrix",
    "td_exact",
]
