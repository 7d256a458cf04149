"""Contraction diagnostics: the map Jacobian, its spectrum, and rate estimates.

The fixed-point iteration converges locally when the spectral radius of
the map Jacobian at the solution is below one, and that radius also
estimates the geometric rate at which successive steps shrink. The
closed-form Jacobian is

    J(q) = A^-1 [F + E I' Z^-1 I H] diag(I' Z^-1 s)

    E = diag(|q|**-0.852)
    F = -0.852 diag(|q|**-1.852) diag(sign(q))
    H = 0.852 A^-1 diag(|q|**-1.852) diag(sign(q))   (= -A^-1 F)

with Z = I A^-1 E I' the weighted Laplacian. The leading 0.852 in H is
required: it is what the chain rule produces when differentiating the
|q|**-0.852 weights through Z^-1, and without it the Jacobian fails both
the finite-difference check and the tree identity J = 0. On spanning
trees the map is constant, so J vanishes identically.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from .errors import JacobianError
from .hydraulics import FLOW_EXPONENT, HEADLOSS_EXPONENT
from .solver import DEFAULT_FLOW_FLOOR_CFS, HydraulicSystem, IterationRecord


def _sign(q: np.ndarray) -> np.ndarray:
    """sign with sign(0) = +1, so diagonal terms never vanish silently."""
    return np.where(q >= 0.0, 1.0, -1.0)


def jacobian_at(
    system: HydraulicSystem,
    q_cfs,
    floor_cfs: float = DEFAULT_FLOW_FLOOR_CFS,
) -> np.ndarray:
    """Closed-form L x L Jacobian of the fixed-point map at flows ``q_cfs``.

    The derivative involves |q|**-1.852, so the point must be nondegenerate:
    any |q_l| at or below ``floor_cfs`` raises ``JacobianError``.
    """
    q = np.asarray(q_cfs, dtype=float)
    small = np.flatnonzero(np.abs(q) <= floor_cfs)
    if small.size:
        pipe_id = system.network.pipes[small[0]].id
        raise JacobianError(
            f"Jacobian undefined near zero flow on pipe {pipe_id} "
            f"(|q| <= {floor_cfs:g} cfs)"
        )
    resistance = system.resistance
    reduced = system.incidence.reduced

    e = np.abs(q) ** -FLOW_EXPONENT
    f = -FLOW_EXPONENT * np.abs(q) ** -HEADLOSS_EXPONENT * _sign(q)
    h = -f / resistance

    factor = system.laplacian_factor(e / resistance)
    u = reduced.T @ cho_solve(factor, system.injections_cfs)
    z_inv_inc = cho_solve(factor, reduced)

    bracket = np.diag(f) + (e[:, None] * reduced.T) @ (z_inv_inc * h[None, :])
    return bracket / resistance[:, None] * u[None, :]


def finite_difference_jacobian(
    system: HydraulicSystem,
    q_cfs,
    step_scale: float = 1e-6,
    floor_cfs: float = DEFAULT_FLOW_FLOOR_CFS,
) -> np.ndarray:
    """Central-difference Jacobian of the map, column by column.

    Per-coordinate step is ``step_scale * max(1, |q_l|)``. Serves as the
    independent check of the closed form; each |q_l| must exceed 10x its
    step so the differences never straddle the |q| kink.
    """
    q = np.asarray(q_cfs, dtype=float)
    steps = step_scale * np.maximum(1.0, np.abs(q))
    too_close = np.flatnonzero(np.abs(q) <= 10.0 * steps)
    if too_close.size:
        pipe_id = system.network.pipes[too_close[0]].id
        raise ValueError(
            f"finite-difference step {steps[too_close[0]]:g} too large relative to "
            f"flow on pipe {pipe_id}; reduce step_scale"
        )
    l = q.size
    jac = np.zeros((l, l))
    for col in range(l):
        bump = np.zeros(l)
        bump[col] = steps[col]
        plus = system.apply_map(q + bump, floor_cfs)
        minus = system.apply_map(q - bump, floor_cfs)
        jac[:, col] = (plus - minus) / (2.0 * steps[col])
    return jac


def spectral_radius(matrix) -> float:
    """Largest eigenvalue modulus of a (generally nonsymmetric) matrix."""
    m = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    try:
        eigenvalues = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"eigenvalue iteration failed: {exc}") from exc
    return float(np.abs(eigenvalues).max()) if m.size else 0.0


@dataclass(frozen=True)
class ContractionReport:
    """Jacobian spectrum at a fixed point and the local-contraction verdict.

    ``rate_estimate`` is the spectral radius, which approximates the
    geometric factor by which successive iteration steps shrink near the
    solution; ``empirical_ratio`` is the last observed step ratio when a
    solve trace was supplied.
    """

    jacobian: np.ndarray
    eigenvalue_magnitudes: np.ndarray
    spectral_radius: float
    is_local_contraction: bool
    rate_estimate: float
    empirical_ratio: float | None = None


def contraction_report(
    system: HydraulicSystem,
    q_star_cfs,
    trace: list[IterationRecord] | None = None,
    floor_cfs: float = DEFAULT_FLOW_FLOOR_CFS,
) -> ContractionReport:
    """Assemble the contraction diagnostics at converged flows ``q_star_cfs``.

    A spectral radius at or above one yields ``is_local_contraction=False``
    without raising; ``JacobianError`` propagates when the solution has a
    pipe at zero flow.
    """
    jac = jacobian_at(system, q_star_cfs, floor_cfs)
    magnitudes = np.sort(np.abs(np.linalg.eigvals(jac)))[::-1]
    rho = float(magnitudes[0]) if magnitudes.size else 0.0
    empirical = None
    if trace:
        ratios = [record.ratio for record in trace if record.ratio is not None]
        if ratios:
            empirical = float(ratios[-1])
    return ContractionReport(
        jacobian=jac,
        eigenvalue_magnitudes=magnitudes,
        spectral_radius=rho,
        is_local_contraction=bool(rho < 1.0),
        rate_estimate=rho,
        empirical_ratio=empirical,
    )
