"""Hazen-Williams head loss, pipe resistance, and turbulence thresholds.

All formulas assume U.S. customary units: flow rates in cfs, lengths and
diameters in feet, head loss in feet. The Hazen-Williams relation used
throughout is

    headloss = A * |q|**0.852 * q,    A = 4.727 * C**-1.852 * d**-4.871 * l

which is valid for turbulent water flow.
"""

import math
from dataclasses import dataclass

import numpy as np

from .network import Network, Pipe

# Hazen-Williams exponents; 0.852 appears inside the fixed-point map and
# its Jacobian, so both constants are defined exactly once, here.
FLOW_EXPONENT = 0.852
HEADLOSS_EXPONENT = 1.0 + FLOW_EXPONENT

HAZEN_WILLIAMS_COEFFICIENT = 4.727

# kinematic viscosity of water near 60 F, ft^2/s
DEFAULT_VISCOSITY_FT2_S = 1.21e-5

# Reynolds number above which flow is considered turbulent
DEFAULT_REYNOLDS_THRESHOLD = 4000.0


@dataclass(frozen=True)
class FluidProperties:
    """Kinematic viscosity (ft^2/s) and the turbulent Reynolds threshold."""

    kinematic_viscosity_ft2_s: float = DEFAULT_VISCOSITY_FT2_S
    reynolds_threshold: float = DEFAULT_REYNOLDS_THRESHOLD

    def __post_init__(self):
        if not self.kinematic_viscosity_ft2_s > 0:
            raise ValueError("kinematic viscosity must be positive")
        if not self.reynolds_threshold > 0:
            raise ValueError("Reynolds threshold must be positive")


def resistance_coefficient(pipe: Pipe) -> float:
    """Hazen-Williams resistance A for one pipe, in ft/(cfs**1.852).

    Raises ``ValueError`` naming the pipe if any parameter is non-positive.
    """
    if pipe.length_ft <= 0 or pipe.diameter_in <= 0 or pipe.roughness <= 0:
        raise ValueError(
            f"pipe {pipe.id}: length, diameter and roughness must all be positive"
        )
    return (
        HAZEN_WILLIAMS_COEFFICIENT
        * pipe.roughness ** -HEADLOSS_EXPONENT
        * pipe.diameter_ft ** -4.871
        * pipe.length_ft
    )


def resistance_vector(network: Network) -> np.ndarray:
    """Resistance coefficients for every pipe, in pipe order."""
    return np.array([resistance_coefficient(p) for p in network.pipes], dtype=float)


def head_loss(q_cfs, resistance) -> np.ndarray:
    """Hazen-Williams head loss (feet) for flows ``q_cfs``.

    Odd in q: reversing a flow reverses the sign of its head loss.
    """
    q = np.asarray(q_cfs, dtype=float)
    return resistance * np.abs(q) ** FLOW_EXPONENT * q


def cross_section_area_ft2(pipe: Pipe) -> float:
    """Circular cross-section area pi*d^2/4 in ft^2."""
    return math.pi * pipe.diameter_ft**2 / 4.0


def reynolds_number(pipe: Pipe, q_cfs: float, fluid: FluidProperties | None = None) -> float:
    """Reynolds number d*|q| / (v*S) for a flow of ``q_cfs`` through ``pipe``.

    With S = pi*d^2/4 this equals the conventional velocity-based Reynolds
    number (q/S)*d/v.
    """
    fluid = fluid or FluidProperties()
    area = cross_section_area_ft2(pipe)
    return pipe.diameter_ft * abs(q_cfs) / (fluid.kinematic_viscosity_ft2_s * area)


def min_turbulent_flow(pipe: Pipe, fluid: FluidProperties | None = None) -> float:
    """Smallest |q| (cfs) whose Reynolds number reaches the turbulence threshold."""
    fluid = fluid or FluidProperties()
    area = cross_section_area_ft2(pipe)
    return fluid.reynolds_threshold * fluid.kinematic_viscosity_ft2_s * area / pipe.diameter_ft
