"""Cascade from measured channels to per-zone electrical load.

Each zone's thermal load is lifted to an equivalent building-level
cooling load through the fitted fresh-air and closure models, converted
to chiller-side electricity through the district system efficiency, and
topped up with the zone's share of supply fan power.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from . import unitconv
from .channels import DAT, IAT, OAT, P_D, Q_B, Q_D, V_Z, ChannelFrame
from .errors import ModelMismatchError
from .regression import FanModel, FittedModels, FreshAirModel
from .thermo import ahu_load_series, pick_rat
from .topology import SEP, Topology

# efficiency outside this band is suspicious but still used
COP_BAND = (1.0, 15.0)

# p_d below this fraction of its median positive value counts as idle
COP_FLOOR_FRACTION = 0.01

FLAG_MISSING = "missing_inputs"
FLAG_IDLE = "district_idle"
FLAG_COP_LOW = "cop_low"
FLAG_COP_HIGH = "cop_high"
FLAG_FAN_RANGE = "fan_extrapolation"
FLAG_COIL_SHARE = "coil_share_undefined"
FLAG_AHU_IDLE = "ahu_idle"


def zone_equivalent_coil(air, q_z, v_z, k, alpha, oat, rat):
    """Zone load plus its flow-proportional share of the fresh-air load."""
    return q_z + air.cp_rho * v_z * (k * (oat - rat) + alpha)


def zone_equivalent_building(l, beta, q_ec, flow_share, coil_share):
    """Lifts an equivalent coil load to the building meter boundary.

    The intercept is split by the zone's share of AHU flow times the
    AHU's share of the summed coil load.
    """
    return l * q_ec + flow_share * coil_share * beta


def zone_fan_power(v_z, v_c, p_fan):
    """Flow-proportional share of the AHU supply fan power."""
    return (v_z / v_c) * p_fan


def zone_total_electrical(q_eb, cop, p_fan_z):
    """Chiller-side electricity for the zone's load plus its fan share."""
    return q_eb / cop + p_fan_z


def district_cop(q_d: pd.Series, p_d: pd.Series, floor_fraction: float = COP_FLOOR_FRACTION):
    """Instantaneous district cooling efficiency with idle detection.

    Returns (cop, idle_mask). Efficiency is NaN where the electrical
    input sits below the idle floor; dividing by a near-zero meter
    reading would turn noise into infinite efficiency.
    """
    positive = p_d[p_d > 0]
    floor = floor_fraction * float(positive.median()) if len(positive) else 0.0
    idle = ~(p_d > floor)
    with np.errstate(invalid="ignore", divide="ignore"):
        cop = q_d / p_d
    cop = cop.where(~idle)
    return cop, idle


def fan_power_kw(model: FanModel, v_c: pd.Series):
    """Evaluates a fan model on total flow in m3/s, returning kW.

    Output is clamped at zero; a cubic with a negative leading
    coefficient can dip below zero past its calibrated range. Returns
    (power, extrapolation mask).
    """
    flow_native = pd.Series(
        unitconv.flow_from_m3s(v_c.to_numpy(), model.flow_unit), index=v_c.index
    )
    power_native = model.power_at(flow_native)
    power_kw = pd.Series(
        unitconv.power_to_kw(power_native.to_numpy(), model.power_unit), index=v_c.index
    )
    power_kw = power_kw.clip(lower=0.0)
    lo, hi = model.flow_range
    out = (flow_native < lo) | (flow_native > hi)
    out &= flow_native.notna()
    return power_kw, out


@dataclass
class ZoneLoads:
    """Per-zone load series at the analysis interval."""

    building: str
    ahu: str
    zone: str
    table: pd.DataFrame  # columns q_z_kw, q_ec_kw, q_eb_kw, p_fan_kw, p_total_kw
    coverage: float  # fraction of timestamps with a complete p_total

    @property
    def path(self) -> str:
        return f"{self.building}{SEP}{self.ahu}{SEP}{self.zone}"


@dataclass
class CascadeResult:
    """Everything produced by one disaggregation pass."""

    zones: dict  # zone path -> ZoneLoads
    diagnostics: dict  # building id -> DataFrame(residual_kw, cop, coverage_flags)
    cop: pd.Series
    interval: pd.Timedelta
    flags: dict = field(default_factory=dict)  # flag name -> count

    def zone(self, building_id, ahu_id, zone_id) -> ZoneLoads:
        path = f"{building_id}{SEP}{ahu_id}{SEP}{zone_id}"
        try:
            return self.zones[path]
        except KeyError:
            raise ModelMismatchError(f"no cascade output for {path}") from None

    def zone_table(self) -> pd.DataFrame:
        """Long table of all zone series, one row per timestamp and zone."""
        parts = []
        for path in sorted(self.zones):
            z = self.zones[path]
            t = z.table.copy()
            t.insert(0, "zone_id", path)
            parts.append(t)
        if not parts:
            return pd.DataFrame(
                columns=["zone_id", "q_z_kw", "q_ec_kw", "q_eb_kw", "p_fan_kw", "p_total_kw"]
            )
        out = pd.concat(parts)
        out.index.name = "timestamp"
        return out


def _join_flags(*masks_and_names):
    """Combines boolean masks into per-row semicolon flag strings."""
    n = len(masks_and_names[0][0])
    parts = [[] for _ in range(n)]
    for mask, name in masks_and_names:
        arr = np.asarray(mask, dtype=bool)
        for i in np.flatnonzero(arr):
            parts[i].append(name)
    return [";".join(p) for p in parts]


def run_cascade(frame: ChannelFrame, topology: Topology, models: FittedModels) -> CascadeResult:
    """Applies the fitted models to aligned channels.

    Zone outputs stay NaN wherever an input is missing; nothing is
    interpolated. Diagnostics per building carry the closure residual,
    the district efficiency, and the flags raised on each row.
    """
    models.check_topology(topology)
    air = models.air
    index = frame.timestamps
    oat = frame.channel(OAT)
    q_d = frame.channel(Q_D)
    p_d = frame.channel(P_D)
    cop, idle = district_cop(q_d, p_d)
    cop_low = cop.notna() & (cop < COP_BAND[0])
    cop_high = cop.notna() & (cop > COP_BAND[1])

    zones = {}
    diagnostics = {}
    flag_counts = {}

    def count(name, mask):
        n = int(np.asarray(mask, dtype=bool).sum())
        if n:
            flag_counts[name] = flag_counts.get(name, 0) + n

    count(FLAG_IDLE, idle)
    count(FLAG_COP_LOW, cop_low)
    count(FLAG_COP_HIGH, cop_high)

    for building in topology.buildings:
        bmodel = models.building_for(building.id)
        per_ahu = {}
        fan_kw = {}
        fan_out_of_range = pd.Series(False, index=index)
        ahu_idle = pd.Series(False, index=index)
        for ahu in building.ahus:
            series = ahu_load_series(frame, building.id, ahu, air)
            rat = pick_rat(frame, building.id, ahu, series.rat)
            fmodel = models.fan_for(building.id, ahu.id)
            p_fan, out = fan_power_kw(fmodel, series.v_c)
            per_ahu[ahu.id] = (ahu, series, rat, models.fresh_air_for(building.id, ahu.id))
            fan_kw[ahu.id] = p_fan
            fan_out_of_range |= out.fillna(False)
            ahu_idle |= series.v_c.fillna(0) <= 0

        coil_sum = sum(s.q_c for _, s, _, _ in per_ahu.values())
        coil_share_bad = coil_sum.isna() | (coil_sum == 0)
        count(FLAG_COIL_SHARE, coil_share_bad & coil_sum.notna())
        count(FLAG_FAN_RANGE, fan_out_of_range)
        count(FLAG_AHU_IDLE, ahu_idle)

        missing_any = pd.Series(False, index=index)
        for ahu_id, (ahu, series, rat, famodel) in per_ahu.items():
            with np.errstate(invalid="ignore", divide="ignore"):
                coil_share = series.q_c / coil_sum
            coil_share = coil_share.where(~coil_share_bad)
            p_fan = fan_kw[ahu_id]
            dat = frame.channel(DAT, building.id, ahu_id)
            for zone in ahu.zones:
                iat = frame.channel(IAT, building.id, ahu_id, zone.id)
                v_z = frame.channel(V_Z, building.id, ahu_id, zone.id)
                q_z = air.cp_rho * v_z * (iat - dat)
                q_ec = zone_equivalent_coil(air, q_z, v_z, famodel.k, famodel.alpha, oat, rat)
                with np.errstate(invalid="ignore", divide="ignore"):
                    flow_share = v_z / series.v_c
                flow_share = flow_share.where(series.v_c > 0)
                q_eb = zone_equivalent_building(bmodel.l, bmodel.beta, q_ec, flow_share, coil_share)
                p_fan_z = flow_share * p_fan
                p_fan_z = p_fan_z.where(series.v_c > 0, 0.0)
                p_total = zone_total_electrical(q_eb, cop, p_fan_z)
                table = pd.DataFrame(
                    {
                        "q_z_kw": q_z,
                        "q_ec_kw": q_ec,
                        "q_eb_kw": q_eb,
                        "p_fan_kw": p_fan_z,
                        "p_total_kw": p_total,
                    },
                    index=index,
                )
                complete = table["p_total_kw"].notna()
                missing_any |= ~complete
                coverage = float(complete.mean()) if len(table) else 0.0
                z = ZoneLoads(building.id, ahu_id, zone.id, table, coverage)
                zones[z.path] = z

        q_b = frame.channel(Q_B, building.id)
        residual = q_b - (bmodel.l * coil_sum + bmodel.beta)
        flags = _join_flags(
            (missing_any.to_numpy(), FLAG_MISSING),
            (idle.to_numpy(), FLAG_IDLE),
            (cop_low.to_numpy(), FLAG_COP_LOW),
            (cop_high.to_numpy(), FLAG_COP_HIGH),
            (fan_out_of_range.to_numpy(), FLAG_FAN_RANGE),
            (coil_share_bad.to_numpy(), FLAG_COIL_SHARE),
            (ahu_idle.to_numpy(), FLAG_AHU_IDLE),
        )
        diagnostics[building.id] = pd.DataFrame(
            {"residual_kw": residual, "cop": cop, "coverage_flags": flags}, index=index
        )
        count(FLAG_MISSING, missing_any)

    return CascadeResult(
        zones=zones,
        diagnostics=diagnostics,
        cop=cop,
        interval=frame.interval,
        flags=flag_counts,
    )
