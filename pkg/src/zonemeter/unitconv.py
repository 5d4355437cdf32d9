"""Unit conversions applied at ingestion boundaries.

Internally everything is SI-ish: degC, m3/s, kW. Conversion constants are
fixed here so that repeated runs are bit-reproducible.
"""

from .errors import InputError

M3S_PER_CFM = 4.719474e-4
KW_PER_HP = 0.7457


def fahrenheit_to_celsius(value):
    return (value - 32.0) * 5.0 / 9.0


def cfm_to_m3s(value):
    return value * M3S_PER_CFM


def hp_to_kw(value):
    return value * KW_PER_HP


_TEMP_C = {"c", "degc", "deg_c", "celsius"}
_TEMP_F = {"f", "degf", "deg_f", "fahrenheit"}
_FLOW_M3S = {"m3/s", "m3s", "m^3/s"}
_FLOW_CFM = {"cfm"}
_POWER_KW = {"kw"}
_POWER_HP = {"hp"}


def _norm(unit: str) -> str:
    return unit.strip().lower().replace("°", "")


def temperature_to_celsius(value, unit: str):
    u = _norm(unit)
    if u in _TEMP_C:
        return value
    if u in _TEMP_F:
        return fahrenheit_to_celsius(value)
    raise InputError(f"unsupported temperature unit: {unit!r}")


def flow_to_m3s(value, unit: str):
    u = _norm(unit)
    if u in _FLOW_M3S:
        return value
    if u in _FLOW_CFM:
        return cfm_to_m3s(value)
    raise InputError(f"unsupported flow unit: {unit!r}")


def power_to_kw(value, unit: str):
    u = _norm(unit)
    if u in _POWER_KW:
        return value
    if u in _POWER_HP:
        return hp_to_kw(value)
    raise InputError(f"unsupported power unit: {unit!r}")


def flow_from_m3s(value, unit: str):
    """Inverse of flow_to_m3s, used when evaluating fan curves stored in CFM."""
    u = _norm(unit)
    if u in _FLOW_M3S:
        return value
    if u in _FLOW_CFM:
        return value / M3S_PER_CFM
    raise InputError(f"unsupported flow unit: {unit!r}")
