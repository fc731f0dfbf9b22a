"""Elastic wave scattering by many small rigid bodies.

Point-interaction (Foldy-Lax) approximation built on elastic capacitances,
with a boundary-element reference solver to measure its error.
"""

from .capacitance import (
    CapacitanceMatrix,
    acoustic_capacitance,
    capacitance_matrix,
    verify_eigenvalue_bounds,
)
from .convergence import fibonacci_directions, fit_loglog_slope, run_compare, sweep
from .errors import (
    ConditionInapplicableError,
    ConfigError,
    DomainError,
    FoldyLaxError,
    InvertibilityError,
    NumericalError,
    UsageError,
)
from .foldy_lax import (
    ChargeSet,
    FarFieldPattern,
    FoldyLaxSystem,
    IncidentWave,
    ScatteringConfig,
    ValidityReport,
    assemble,
    error_budget,
    farfield,
    incident_field,
    solvability_check,
    solve_charges,
    validity_report,
)
from .geometry import GeometryStats, Obstacle, SurfaceMesh, compute_stats, load_mesh, make_cube_mesh, make_sphere_mesh
from .kernels import (
    LameParameters,
    WaveNumbers,
    farfield_kernel_p,
    farfield_kernel_s,
    kelvin_tensor,
    kupradze_gradient,
    kupradze_tensor,
)
from .oracle import OracleSolution, boundary_residual, compare, oracle_farfield, oracle_solve

__version__ = "0.1.0"

__all__ = [
    "CapacitanceMatrix",
    "ChargeSet",
    "ConditionInapplicableError",
    "ConfigError",
    "DomainError",
    "FarFieldPattern",
    "FoldyLaxError",
    "FoldyLaxSystem",
    "GeometryStats",
    "IncidentWave",
    "InvertibilityError",
    "LameParameters",
    "NumericalError",
    "Obstacle",
    "OracleSolution",
    "ScatteringConfig",
    "SurfaceMesh",
    "UsageError",
    "ValidityReport",
    "WaveNumbers",
    "acoustic_capacitance",
    "assemble",
    "boundary_residual",
    "capacitance_matrix",
    "compare",
    "compute_stats",
    "error_budget",
    "farfield",
    "farfield_kernel_p",
    "farfield_kernel_s",
    "fibonacci_directions",
    "fit_loglog_slope",
    "incident_field",
    "kelvin_tensor",
    "kupradze_gradient",
    "kupradze_tensor",
    "load_mesh",
    "make_cube_mesh",
    "make_sphere_mesh",
    "oracle_farfield",
    "oracle_solve",
    "run_compare",
    "solvability_check",
    "solve_charges",
    "sweep",
    "validity_report",
    "verify_eigenvalue_bounds",
]
