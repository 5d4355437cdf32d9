"""Air-side heat balance identities.

All loads are sensible cooling in kW, flows in m3/s, temperatures in
degC. The product of specific heat and density converts volumetric flow
times a temperature difference into thermal power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .channels import DAT, IAT, MAT, RAT, V_Z, ChannelFrame
from .errors import UndefinedReturnTempError
from .topology import AhuNode, AirProperties


def coil_load(air: AirProperties, v_c, mat, dat):
    """Cooling delivered by an AHU coil from flow and air temperatures."""
    return air.cp_rho * v_c * (mat - dat)


def zone_space_load(air: AirProperties, v_z, iat, dat):
    """Sensible cooling delivered to one zone by its supply air."""
    return air.cp_rho * v_z * (iat - dat)


def return_air_temperature(flows, temps):
    """Flow-weighted mix of zone return streams.

    Raises when total flow is zero; a stopped AHU has no return stream
    to measure.
    """
    flows = np.asarray(flows, dtype=float)
    temps = np.asarray(temps, dtype=float)
    total = flows.sum()
    if total <= 0:
        raise UndefinedReturnTempError("return temperature undefined at zero supply flow")
    return float((flows * temps).sum() / total)


def mixed_air_temperature(k, oat, rat):
    """Mixing identity for a fresh-air fraction k."""
    return k * oat + (1.0 - k) * rat


def fresh_air_load(air: AirProperties, v_c, k, oat, rat):
    """Outdoor-air portion of the coil load."""
    return air.cp_rho * v_c * k * (oat - rat)


@dataclass
class AhuSeries:
    """Per-AHU derived series on the shared timestamp index."""

    v_c: pd.Series  # total supply flow, m3/s
    rat: pd.Series  # flow-weighted return temperature, degC
    q_c: pd.Series  # coil load from measured mixed/discharge temps, kW
    q_z_sum: pd.Series  # sum of zone loads, kW
    q_zones: pd.DataFrame  # per-zone loads, columns = zone ids
    fresh_air: pd.Series  # q_c - q_z_sum, kW


def ahu_load_series(frame: ChannelFrame, building_id: str, ahu: AhuNode, air: AirProperties) -> AhuSeries:
    """Derives coil-level series for one AHU from aligned channels.

    Total flow is the sum of zone flows and is NaN whenever any zone
    flow is missing, so downstream fits never see a partial sum. The
    computed return temperature is NaN where total flow is zero.
    """
    zone_ids = [z.id for z in ahu.zones]
    flows = frame.matrix(V_Z, building_id, ahu.id, zone_ids)
    iats = frame.matrix(IAT, building_id, ahu.id, zone_ids)
    dat = frame.channel(DAT, building_id, ahu.id)
    mat = frame.channel(MAT, building_id, ahu.id)

    v_c = flows.sum(axis=1, skipna=False)
    weighted = (flows * iats).sum(axis=1, skipna=False)
    with np.errstate(invalid="ignore", divide="ignore"):
        rat = weighted / v_c
    rat[v_c == 0] = np.nan

    q_zones = flows.multiply(air.cp_rho).mul(iats.sub(dat, axis=0))
    q_z_sum = air.cp_rho * v_c * (rat - dat)
    q_c = coil_load(air, v_c, mat, dat)
    return AhuSeries(
        v_c=v_c,
        rat=rat,
        q_c=q_c,
        q_z_sum=q_z_sum,
        q_zones=q_zones,
        fresh_air=q_c - q_z_sum,
    )


def measured_rat_series(frame: ChannelFrame, building_id: str, ahu_id: str) -> pd.Series:
    """Measured return temperature if trended, else empty series."""
    if frame.has(RAT, building_id, ahu_id):
        return frame.channel(RAT, building_id, ahu_id)
    return pd.Series(np.nan, index=frame.timestamps)


def pick_rat(frame: ChannelFrame, building_id: str, ahu: AhuNode, derived: pd.Series) -> pd.Series:
    """Prefers the trended return temperature, falls back to the derived mix."""
    measured = measured_rat_series(frame, building_id, ahu.id)
    return measured.where(measured.notna(), derived)


def mat_series(frame: ChannelFrame, building_id: str, ahu_id: str) -> pd.Series:
    return frame.channel(MAT, building_id, ahu_id)
