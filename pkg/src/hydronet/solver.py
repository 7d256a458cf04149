"""Fixed-point solver for the steady-state water flow problem.

The flow equations (continuity I*q = s, energy headloss(q) = I'*(h - h0))
are reduced to a fixed-point map on pipe flows

    T(q) = G(q) * I' * Z(q)^-1 * s,
    G(q) = diag(|q|**-0.852 / A),   Z(q) = I * diag(G(q)) * I'

where I is the reduced incidence matrix and A the Hazen-Williams
resistance vector. Z(q) is the weighted Laplacian of the network with the
reservoir row removed; it is symmetric positive definite on connected
networks, so a Cholesky factorization backs every linear solve. Iterating
q <- T(q) to a tolerance measured in GPM yields the flows, after which
heads follow from h = Z(q*)^-1 s + h0.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import SingularNetworkError
from .hydraulics import (
    FLOW_EXPONENT,
    FluidProperties,
    head_loss,
    min_turbulent_flow,
    resistance_vector,
)
from .network import IncidenceDecomposition, Network, build_incidence
from .units import GPM_PER_CFS, cfs_to_gpm, gpm_to_cfs

DEFAULT_TOLERANCE_GPM = 0.001
DEFAULT_MAX_ITERATIONS = 1000
DEFAULT_INITIAL_FLOW_GPM = 600.0
DEFAULT_FLOW_FLOOR_CFS = 1e-8


@dataclass(frozen=True)
class SolverConfig:
    """Fixed-point iteration settings.

    ``tolerance_gpm`` bounds the map gap ||q - T(q)||_inf in GPM;
    ``initial_flow_gpm`` is a scalar applied to every pipe or a per-pipe
    sequence; ``flow_floor_cfs`` is the minimum |q| substituted inside the
    map's diagonal weights so the Laplacian stays positive definite.
    """

    tolerance_gpm: float = DEFAULT_TOLERANCE_GPM
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    initial_flow_gpm: float | tuple[float, ...] = DEFAULT_INITIAL_FLOW_GPM
    flow_floor_cfs: float = DEFAULT_FLOW_FLOOR_CFS
    fluid: FluidProperties = field(default_factory=FluidProperties)

    def __post_init__(self):
        if not self.tolerance_gpm > 0:
            raise ValueError("tolerance_gpm must be positive")
        if not self.max_iterations >= 1:
            raise ValueError("max_iterations must be at least 1")
        if not self.flow_floor_cfs > 0:
            raise ValueError("flow_floor_cfs must be positive")

    def initial_flows_cfs(self, num_pipes: int) -> np.ndarray:
        q0 = np.asarray(self.initial_flow_gpm, dtype=float)
        if q0.ndim == 0:
            q0 = np.full(num_pipes, float(q0))
        elif q0.shape != (num_pipes,):
            raise ValueError(
                f"initial_flow_gpm must be scalar or length {num_pipes}, got shape {q0.shape}"
            )
        return gpm_to_cfs(q0)


@dataclass(frozen=True)
class IterationRecord:
    """One committed iteration: step size in GPM and the successive ratio."""

    iteration: int
    step_inf_gpm: float
    ratio: float | None


@dataclass
class SolveResult:
    """Converged flows/heads plus the full iteration trace and residuals."""

    flows_gpm: np.ndarray
    heads_ft: np.ndarray
    reservoir_intake_gpm: float
    iterations: int
    converged: bool
    trace: list[IterationRecord]
    continuity_residual_gpm: float
    energy_residual_ft: float
    final_map_gap_gpm: float
    floor_activations: int
    warnings: list[str]

    @property
    def flows_cfs(self) -> np.ndarray:
        return gpm_to_cfs(self.flows_gpm)


def conductance(q_cfs, resistance, floor_cfs: float = DEFAULT_FLOW_FLOOR_CFS) -> np.ndarray:
    """Diagonal map weights G = max(|q|, floor)**-0.852 / A, all positive."""
    q = np.asarray(q_cfs, dtype=float)
    return np.maximum(np.abs(q), floor_cfs) ** -FLOW_EXPONENT / resistance


def laplacian(weights, incidence: IncidenceDecomposition) -> np.ndarray:
    """Reduced weighted Laplacian Z = I * diag(w) * I', an N x N SPD matrix."""
    reduced = incidence.reduced
    w = np.asarray(weights, dtype=float)
    return reduced @ (w[:, None] * reduced.T)


class HydraulicSystem:
    """A network with its solver-ready matrices precomputed.

    Construction validates the network (raising ``ValidationError`` on the
    first violation) and caches the incidence decomposition, resistance
    vector, and injection vector. Instances are read-only and safe to
    share across solves.
    """

    def __init__(self, network: Network):
        self.network = network
        self.incidence = build_incidence(network)
        self.resistance = resistance_vector(network)
        self.injections_cfs = network.injections_cfs()
        self.reservoir_head_ft = network.reservoir.head_ft

    @property
    def num_junctions(self) -> int:
        return self.network.num_junctions

    @property
    def num_pipes(self) -> int:
        return self.network.num_pipes

    def conductance(self, q_cfs, floor_cfs: float = DEFAULT_FLOW_FLOOR_CFS) -> np.ndarray:
        return conductance(q_cfs, self.resistance, floor_cfs)

    def laplacian(self, weights) -> np.ndarray:
        return laplacian(weights, self.incidence)

    def laplacian_factor(self, weights):
        """Cholesky factorization of the weighted Laplacian.

        Raises ``SingularNetworkError`` when the factorization fails, which
        on valid inputs means the network is numerically disconnected.
        """
        z = self.laplacian(weights)
        try:
            return cho_factor(z)
        except LinAlgError as exc:
            raise SingularNetworkError(
                "Laplacian factorization failed: network numerically disconnected"
            ) from exc

    def _map_parts(self, q_cfs, floor_cfs):
        """Evaluate the map: returns (T(q), y) with y = Z(q)^-1 s."""
        g = self.conductance(q_cfs, floor_cfs)
        factor = self.laplacian_factor(g)
        y = cho_solve(factor, self.injections_cfs)
        t = g * (self.incidence.reduced.T @ y)
        return t, y

    def apply_map(self, q_cfs, floor_cfs: float = DEFAULT_FLOW_FLOOR_CFS) -> np.ndarray:
        """One application of the fixed-point map T at flows ``q_cfs``."""
        t, _ = self._map_parts(np.asarray(q_cfs, dtype=float), floor_cfs)
        return t

    def recover_heads(self, q_cfs, floor_cfs: float = DEFAULT_FLOW_FLOOR_CFS) -> np.ndarray:
        """Junction heads (feet) consistent with flows ``q_cfs``: Z^-1 s + h0."""
        g = self.conductance(q_cfs, floor_cfs)
        factor = self.laplacian_factor(g)
        y = cho_solve(factor, self.injections_cfs)
        return y + self.reservoir_head_ft

    def reservoir_intake_gpm(self, q_cfs) -> float:
        """Net flow out of the reservoir, in GPM."""
        return cfs_to_gpm(float(self.incidence.reservoir_row @ np.asarray(q_cfs, dtype=float)))

    def residuals(self, q_cfs, heads_ft) -> tuple[float, float]:
        """Infinity norms of the continuity (GPM) and energy (ft) residuals."""
        q = np.asarray(q_cfs, dtype=float)
        h = np.asarray(heads_ft, dtype=float)
        continuity = self.incidence.reduced @ q - self.injections_cfs
        energy = head_loss(q, self.resistance) - self.incidence.reduced.T @ (
            h - self.reservoir_head_ft
        )
        cont_gpm = cfs_to_gpm(float(np.abs(continuity).max())) if continuity.size else 0.0
        energy_ft = float(np.abs(energy).max()) if energy.size else 0.0
        return cont_gpm, energy_ft

    def turbulence_warnings(self, q_cfs, fluid: FluidProperties | None = None) -> list[str]:
        """One warning per pipe whose |q| is below the turbulent minimum."""
        fluid = fluid or FluidProperties()
        out = []
        for col, pipe in enumerate(self.network.pipes):
            q_min = min_turbulent_flow(pipe, fluid)
            magnitude = abs(float(np.asarray(q_cfs)[col]))
            if magnitude < q_min:
                out.append(
                    f"pipe {pipe.id}: |q| = {cfs_to_gpm(magnitude):.4g} GPM is below the "
                    f"turbulent minimum {cfs_to_gpm(q_min):.4g} GPM "
                    f"(Re < {fluid.reynolds_threshold:g})"
                )
        return out

    def solve(self, config: SolverConfig | None = None) -> SolveResult:
        """Iterate q <- T(q) until the map gap (GPM) drops to tolerance.

        Non-convergence within ``max_iterations`` is reported in the result
        (``converged=False``) rather than raised, so the trace remains
        available for diagnosis. A network with zero demand everywhere
        short-circuits to the exact solution q = 0, h = h0.
        """
        config = config or SolverConfig()
        floor = config.flow_floor_cfs

        if not np.any(self.injections_cfs):
            heads = np.full(self.num_junctions, self.reservoir_head_ft)
            return SolveResult(
                flows_gpm=np.zeros(self.num_pipes),
                heads_ft=heads,
                reservoir_intake_gpm=0.0,
                iterations=0,
                converged=True,
                trace=[],
                continuity_residual_gpm=0.0,
                energy_residual_ft=0.0,
                final_map_gap_gpm=0.0,
                floor_activations=0,
                warnings=[],
            )

        q = config.initial_flows_cfs(self.num_pipes)
        trace: list[IterationRecord] = []
        floor_hits = 0
        previous_step: float | None = None
        converged = False

        while True:
            floor_hits += int(np.count_nonzero(np.abs(q) < floor))
            t, y = self._map_parts(q, floor)
            gap_gpm = cfs_to_gpm(float(np.abs(q - t).max()))
            if gap_gpm <= config.tolerance_gpm:
                converged = True
                break
            if len(trace) >= config.max_iterations:
                break
            ratio = gap_gpm / previous_step if previous_step else None
            trace.append(
                IterationRecord(iteration=len(trace) + 1, step_inf_gpm=gap_gpm, ratio=ratio)
            )
            previous_step = gap_gpm
            q = t

        heads = y + self.reservoir_head_ft
        cont_gpm, energy_ft = self.residuals(q, heads)
        warnings = self.turbulence_warnings(q, config.fluid)
        if floor_hits:
            warnings.append(
                f"flow floor {config.flow_floor_cfs:g} cfs engaged {floor_hits} time(s) "
                "inside the map weights"
            )
        return SolveResult(
            flows_gpm=cfs_to_gpm(q),
            heads_ft=heads,
            reservoir_intake_gpm=self.reservoir_intake_gpm(q),
            iterations=len(trace),
            converged=converged,
            trace=trace,
            continuity_residual_gpm=cont_gpm,
            energy_residual_ft=energy_ft,
            final_map_gap_gpm=gap_gpm,
            floor_activations=floor_hits,
            warnings=warnings,
        )


def solve(network: Network, config: SolverConfig | None = None) -> SolveResult:
    """Solve a network's steady-state flows and heads by fixed-point iteration."""
    return HydraulicSystem(network).solve(config)
