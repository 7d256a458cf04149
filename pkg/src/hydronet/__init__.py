"""Steady-state hydraulic analysis of pipe-only water distribution networks.

Solves for pipe flow rates and junction heads given one fixed-head
reservoir and junction demands, using a fixed-point iteration on the flow
vector backed by weighted-Laplacian linear solves. Includes contraction
diagnostics (map Jacobian, spectral radius, convergence-rate estimate)
and an independent damped Newton-Raphson solver for cross-validation.
"""

from .contraction import (
    ContractionReport,
    contraction_report,
    finite_difference_jacobian,
    jacobian_at,
    spectral_radius,
)
from .errors import (
    HydronetError,
    JacobianError,
    ParseError,
    SingularNetworkError,
    ValidationError,
)
from .hydraulics import (
    FluidProperties,
    head_loss,
    min_turbulent_flow,
    resistance_coefficient,
    resistance_vector,
    reynolds_number,
)
from .netfile import parse_network_file, parse_network_text, serialize_network
from .network import (
    IncidenceDecomposition,
    Junction,
    Network,
    Pipe,
    Reservoir,
    build_incidence,
    validate,
)
from .newton import FullState, NewtonResult, full_residual, newton_solve
from .solver import (
    HydraulicSystem,
    IterationRecord,
    SolveResult,
    SolverConfig,
    conductance,
    laplacian,
    solve,
)
from .units import GPM_PER_CFS, cfs_to_gpm, convert_units, gpm_to_cfs

__version__ = "0.1.0"

__all__ = [
    "GPM_PER_CFS",
    "ContractionReport",
    "FluidProperties",
    "FullState",
    "HydraulicSystem",
    "HydronetError",
    "IncidenceDecomposition",
    "IterationRecord",
    "JacobianError",
    "Junction",
    "Network",
    "NewtonResult",
    "ParseError",
    "Pipe",
    "Reservoir",
    "SingularNetworkError",
    "SolveResult",
    "SolverConfig",
    "ValidationError",
    "build_incidence",
    "cfs_to_gpm",
    "conductance",
    "contraction_report",
    "convert_units",
    "finite_difference_jacobian",
    "full_residual",
    "gpm_to_cfs",
    "head_loss",
    "jacobian_at",
    "laplacian",
    "min_turbulent_flow",
    "newton_solve",
    "parse_network_file",
    "parse_network_text",
    "resistance_coefficient",
    "resistance_vector",
    "reynolds_number",
    "serialize_network",
    "solve",
    "spectral_radius",
    "validate",
]
