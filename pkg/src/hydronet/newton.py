"""Damped Newton-Raphson solver on the full flow/head system.

Independent of the fixed-point path: it attacks the stacked residual

    r(q, h) = [ I*q - s ;  headloss(q) - I'*(h - h0) ]

directly, with N continuity rows reported in GPM and L energy rows in
feet. Used to cross-validate fixed-point solutions.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SingularNetworkError
from .hydraulics import FLOW_EXPONENT, HEADLOSS_EXPONENT, head_loss
from .solver import HydraulicSystem, IterationRecord
from .units import GPM_PER_CFS, cfs_to_gpm, gpm_to_cfs

DEFAULT_NEWTON_TOLERANCE = 1e-8
DEFAULT_NEWTON_MAX_ITERATIONS = 60

# |q| used for the headloss derivative when an iterate crosses zero; keeps
# the Newton matrix finite without noticeably perturbing the step
DERIVATIVE_FLOOR_CFS = 1e-10

MAX_HALVINGS = 30


@dataclass(frozen=True)
class FullState:
    """Stacked unknowns: L pipe flows (cfs) and N junction heads (ft)."""

    flows_cfs: np.ndarray
    heads_ft: np.ndarray


@dataclass
class NewtonResult:
    state: FullState
    iterations: int
    converged: bool
    residual_inf: float
    trace: list[IterationRecord]

    @property
    def flows_gpm(self) -> np.ndarray:
        return cfs_to_gpm(self.state.flows_cfs)

    @property
    def heads_ft(self) -> np.ndarray:
        return self.state.heads_ft


def full_residual(state: FullState, system: HydraulicSystem) -> np.ndarray:
    """Length N+L residual, exactly zero at a water-flow solution.

    Mixed units: the first N rows (continuity) are in GPM, the last L rows
    (energy) in feet.
    """
    reduced = system.incidence.reduced
    continuity = reduced @ state.flows_cfs - system.injections_cfs
    energy = head_loss(state.flows_cfs, system.resistance) - reduced.T @ (
        state.heads_ft - system.reservoir_head_ft
    )
    return np.concatenate([cfs_to_gpm(continuity), energy])


def _newton_matrix(state: FullState, system: HydraulicSystem) -> np.ndarray:
    """Analytic Jacobian of the mixed-units residual w.r.t. [q; h].

    Blocks: d(continuity)/dq = I (scaled to GPM rows), d(continuity)/dh = 0,
    d(energy)/dq = diag(1.852 * A * |q|**0.852), d(energy)/dh = -I'.
    """
    n, l = system.num_junctions, system.num_pipes
    reduced = system.incidence.reduced
    magnitude = np.maximum(np.abs(state.flows_cfs), DERIVATIVE_FLOOR_CFS)
    headloss_slope = HEADLOSS_EXPONENT * system.resistance * magnitude**FLOW_EXPONENT
    jac = np.zeros((n + l, n + l))
    jac[:n, :l] = reduced * GPM_PER_CFS
    jac[n:, :l] = np.diag(headloss_slope)
    jac[n:, l:] = -reduced.T
    return jac


def newton_solve(
    system: HydraulicSystem,
    start: FullState | None = None,
    tolerance: float = DEFAULT_NEWTON_TOLERANCE,
    max_iterations: int = DEFAULT_NEWTON_MAX_ITERATIONS,
) -> NewtonResult:
    """Damped Newton iteration until ||r||_inf <= tolerance.

    Each step backtracks by halving (up to 30 times) until the residual
    norm decreases; if no trial improves it, the smallest trial step is
    taken anyway and the iteration continues. Defaults start from 600 GPM
    on every pipe and the reservoir head at every junction.
    """
    if start is None:
        start = FullState(
            flows_cfs=np.full(system.num_pipes, gpm_to_cfs(600.0)),
            heads_ft=np.full(system.num_junctions, system.reservoir_head_ft),
        )
    q = np.asarray(start.flows_cfs, dtype=float).copy()
    h = np.asarray(start.heads_ft, dtype=float).copy()
    l = system.num_pipes

    trace: list[IterationRecord] = []
    previous_step: float | None = None
    residual = full_residual(FullState(q, h), system)
    norm = float(np.abs(residual).max()) if residual.size else 0.0
    converged = norm <= tolerance
    iterations = 0

    while not converged and iterations < max_iterations:
        jac = _newton_matrix(FullState(q, h), system)
        try:
            delta = np.linalg.solve(jac, -residual)
        except np.linalg.LinAlgError as exc:
            raise SingularNetworkError(f"singular Newton system: {exc}") from exc

        scale = 1.0
        best = None
        for _ in range(MAX_HALVINGS + 1):
            trial_q = q + scale * delta[:l]
            trial_h = h + scale * delta[l:]
            trial_residual = full_residual(FullState(trial_q, trial_h), system)
            trial_norm = float(np.abs(trial_residual).max())
            if best is None or trial_norm < best[0]:
                best = (trial_norm, trial_q, trial_h, trial_residual, scale)
            if trial_norm < norm:
                break
            scale *= 0.5

        trial_norm, trial_q, trial_h, trial_residual, scale = best
        step_gpm = cfs_to_gpm(float(np.abs(trial_q - q).max()))
        iterations += 1
        ratio = step_gpm / previous_step if previous_step else None
        trace.append(IterationRecord(iteration=iterations, step_inf_gpm=step_gpm, ratio=ratio))
        previous_step = step_gpm if step_gpm > 0 else previous_step

        q, h, residual, norm = trial_q, trial_h, trial_residual, trial_norm
        converged = norm <= tolerance

    return NewtonResult(
        state=FullState(flows_cfs=q, heads_ft=h),
        iterations=iterations,
        converged=converged,
        residual_inf=norm,
        trace=trace,
    )
