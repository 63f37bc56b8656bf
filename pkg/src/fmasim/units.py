"""Unit conversion constants and quantity parsing.

All internal computation is SI (m, kg, N, rad, s). Imperial units appear
only at configuration and fixture boundaries.
"""
from __future__ import annotations

import math

LBF_TO_N = 4.4482216
IN_TO_M = 0.0254
LBF_PER_IN_TO_N_PER_M = LBF_TO_N / IN_TO_M
MM_PER_LBF_TO_M_PER_N = 1.0e-3 / LBF_TO_N
RPM_TO_RAD_S = 2.0 * math.pi / 60.0

# Viscous damping stated per RPM becomes damping per rad/s.
NM_PER_RPM_TO_NM_PER_RAD_S = 1.0 / RPM_TO_RAD_S

GRAVITY = 9.81

# Multiplicative factor taking a value in the named unit to SI.
_UNIT_FACTORS = {
    "m": 1.0,
    "mm": 1.0e-3,
    "in": IN_TO_M,
    "kg": 1.0,
    "N": 1.0,
    "lbf": LBF_TO_N,
    "N/m": 1.0,
    "lbf/in": LBF_PER_IN_TO_N_PER_M,
    "N*m": 1.0,
    "N*m*s": 1.0,  # torque per unit angular velocity
    "N*m/rpm": NM_PER_RPM_TO_NM_PER_RAD_S,
    "rad": 1.0,
    "deg": math.pi / 180.0,
    "rad/s": 1.0,
    "rpm": RPM_TO_RAD_S,
    "s": 1.0,
    "ms": 1.0e-3,
    "Hz": 1.0,
    "V": 1.0,
    "m/N": 1.0,
    "mm/lbf": MM_PER_LBF_TO_M_PER_N,
    "m/s": 1.0,
    "mm/s": 1.0e-3,
    "N/s": 1.0,
    "kg*m^2": 1.0,
    "N*m/A": 1.0,
    "V*s/rad": 1.0,
    "ohm": 1.0,
}


class UnitError(ValueError):
    """Raised for unknown units or malformed quantity strings."""


def parse_quantity(text: str) -> float:
    """Parse a config quantity like ``"25 lbf/in"`` or ``"164.5"`` to SI.

    A bare number is dimensionless. ``inf`` is accepted as a magnitude so
    rigid stiffnesses can be written directly.
    """
    parts = text.strip().split()
    if not parts or len(parts) > 2:
        raise UnitError(f"malformed quantity: {text!r}")
    try:
        value = float(parts[0])
    except ValueError as exc:
        raise UnitError(f"malformed quantity: {text!r}") from exc
    if len(parts) == 1:
        return value
    unit = parts[1]
    if unit not in _UNIT_FACTORS:
        raise UnitError(f"unknown unit {unit!r} in {text!r}")
    if math.isinf(value):
        return value
    return value * _UNIT_FACTORS[unit]


def known_units() -> tuple[str, ...]:
    return tuple(sorted(_UNIT_FACTORS))
