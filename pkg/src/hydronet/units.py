"""Unit conversions between file-facing and internal unit systems.

Everything inside the solver is expressed in cubic feet per second (cfs)
and feet; network files use gallons per minute (GPM) for demands/flows and
inches for pipe diameters.
"""

# 1 cfs = 7.48052 gal/ft**3 * 60 s/min
GPM_PER_CFS = 448.8312

INCHES_PER_FOOT = 12.0


def gpm_to_cfs(value):
    """Convert a flow rate (scalar or array) from GPM to cfs."""
    return value / GPM_PER_CFS


def cfs_to_gpm(value):
    """Convert a flow rate (scalar or array) from cfs to GPM."""
    return value * GPM_PER_CFS


def inches_to_feet(value: float) -> float:
    return value / INCHES_PER_FOOT


def feet_to_inches(value: float) -> float:
    return value * INCHES_PER_FOOT


_CONVERSIONS = {
    ("gpm", "cfs"): lambda v: v / GPM_PER_CFS,
    ("cfs", "gpm"): lambda v: v * GPM_PER_CFS,
    ("in", "ft"): lambda v: v / INCHES_PER_FOOT,
    ("ft", "in"): lambda v: v * INCHES_PER_FOOT,
}


def convert_units(value: float, from_unit: str, to_unit: str) -> float:
    """Convert ``value`` between a supported unit pair.

    Supported pairs: GPM<->cfs and inches<->feet. Unknown pairs raise
    ``ValueError``.
    """
    key = (from_unit.lower(), to_unit.lower())
    if key[0] == key[1] and key[0] in {"gpm", "cfs", "in", "ft"}:
        return float(value)
    try:
        fn = _CONVERSIONS[key]
    except KeyError:
        raise ValueError(f"unsupported unit conversion: {from_unit!r} -> {to_unit!r}") from None
    return fn(float(value))
