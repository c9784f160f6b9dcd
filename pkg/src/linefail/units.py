"""Constant-factor conversions between the imperial handbook units and SI."""

from __future__ import annotations

FT = 0.3048  # m
INCH = 0.0254  # m
MILE = 1609.344  # m
HOUR = 3600.0  # s
LBF = 4.4482216152605  # N
ATM = 101325.0  # Pa

FACTORS = {
    ("ft/s", "m/s"): FT,
    ("mph", "m/s"): MILE / HOUR,
    ("ft/s", "mph"): FT * HOUR / MILE,
    ("in", "m"): INCH,
    ("ft", "m"): FT,
    ("lb/ft", "N/m"): LBF / FT,
    ("lb/ft2", "Pa"): LBF / FT**2,
    ("W/in2", "W/m2"): 1.0 / INCH**2,
    ("atm", "Pa"): ATM,
}


def convert_units(value, from_unit: str, to_unit: str):
    """Convert ``value`` between two supported units (works on arrays too)."""
    if from_unit == to_unit:
        return value
    if (from_unit, to_unit) in FACTORS:
        return value * FACTORS[from_unit, to_unit]
    if (to_unit, from_unit) in FACTORS:
        return value / FACTORS[to_unit, from_unit]
    raise ValueError(f"unsupported unit conversion {from_unit!r} -> {to_unit!r}")
