"""Synthetic multi-zone building generator with known parameters.

Every channel the meter ingests can be produced here from a first-order
thermal model per zone, a proportional VAV controller, and exact
bookkeeping identities, so fitted coefficients can be checked against
the numbers that generated the data. Sampling records the instantaneous
state at each interval mark; bucket-averaging would smear the algebra
the estimators rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .channels import (
    COLUMN_LEVELS,
    DAT,
    IAT,
    MAT,
    OAT,
    P_D,
    Q_B,
    Q_D,
    RAT,
    SP,
    V_Z,
    ChannelFrame,
    PointCatalog,
    PointDef,
    frame_from_wide,
)
from .errors import ConfigError, SimulationDivergedError
from .topology import SEP, AirProperties, Topology

# integration aborts when a zone leaves this band
IAT_LIMITS = (-30.0, 80.0)

SUBSTEP = pd.Timedelta(minutes=1)

# dimensionless cubic shape, scaled per fan by rated flow and power
FAN_SHAPE = (0.3294, 0.5658, 0.9478, -0.8795)

MIN_DAYS = 4


@dataclass(frozen=True)
class ZoneTruth:
    """Thermal and control parameters of one simulated zone."""

    ua: float  # conductance to outdoors, kW/K
    c: float  # thermal capacitance, kJ/K
    v_min: float  # VAV minimum flow, m3/s
    v_max: float  # VAV maximum flow, m3/s
    kp: float  # controller gain, (m3/s)/K
    gain_peak: float  # occupied internal gain, kW

    def __post_init__(self):
        if self.ua <= 0 or self.c <= 0:
            raise ConfigError("zone conductance and capacitance must be positive")
        if not 0 < self.v_min <= self.v_max:
            raise ConfigError("zone flow bounds must satisfy 0 < v_min <= v_max")


@dataclass(frozen=True)
class AhuTruth:
    """Fresh-air mixing, discharge reset, and fan curve for one AHU."""

    k: float
    alpha: float
    fan_coefficients: tuple  # cubic in m3/s yielding kW
    dat_min: float = 12.0
    dat_max: float = 16.0

    def __post_init__(self):
        if not 0.0 <= self.k <= 1.0:
            raise ConfigError("fresh-air fraction must lie in [0, 1]")
        if not self.dat_min <= self.dat_max:
            raise ConfigError("discharge reset range inverted")

    def fan_power(self, v_c):
        a0, a1, a2, a3 = self.fan_coefficients
        return a0 + a1 * v_c + a2 * v_c**2 + a3 * v_c**3


@dataclass(frozen=True)
class BuildingTruth:
    l: float
    beta: float


@dataclass(frozen=True)
class WeatherModel:
    """Sinusoidal outdoor temperature with a seeded offset per day."""

    mean: float = 24.0
    amplitude: float = 6.0
    peak_hour: float = 15.0
    daily_sigma: float = 1.5


@dataclass(frozen=True)
class CopProfile:
    """District plant efficiency over the day."""

    mean: float = 4.5
    amplitude: float = 0.5
    peak_hour: float = 4.0

    def value(self, hour):
        return self.mean + self.amplitude * np.cos(
            2.0 * np.pi * (np.asarray(hour, dtype=float) - self.peak_hour) / 24.0
        )


@dataclass(frozen=True)
class SetpointSchedule:
    """Alternating cooling set-point command, switching in the morning."""

    lsp: float = 23.3
    hsp: float = 24.4
    block_days: int = 2
    switch_hour: int = 6

    def __post_init__(self):
        if not self.lsp < self.hsp:
            raise ConfigError("low set-point must be below high set-point")
        if self.block_days < 1:
            raise ConfigError("block length must be at least one day")


@dataclass
class GroundTruth:
    """Complete parameterization of one synthetic campus."""

    air: AirProperties
    zones: dict  # zone path -> ZoneTruth
    ahus: dict  # ahu path -> AhuTruth
    buildings: dict  # building id -> BuildingTruth
    weather: WeatherModel = field(default_factory=WeatherModel)
    cop: CopProfile = field(default_factory=CopProfile)
    schedule: SetpointSchedule = field(default_factory=SetpointSchedule)
    district_base: float = 300.0  # other loads on the loop, kW
    occupied_hours: tuple = (8, 18)
    gain_base_fraction: float = 0.1
    noise: dict = field(default_factory=dict)  # channel variable -> sigma

    def to_dict(self) -> dict:
        return {
            "air": {"c_kj_per_kg_k": self.air.c, "rho_kg_per_m3": self.air.rho},
            "zones": {
                p: {
                    "ua_kw_per_k": z.ua,
                    "c_kj_per_k": z.c,
                    "v_min_m3s": z.v_min,
                    "v_max_m3s": z.v_max,
                    "kp_m3s_per_k": z.kp,
                    "gain_peak_kw": z.gain_peak,
                }
                for p, z in sorted(self.zones.items())
            },
            "ahus": {
                p: {
                    "k": a.k,
                    "alpha": a.alpha,
                    "fan_coefficients": list(a.fan_coefficients),
                    "dat_min_c": a.dat_min,
                    "dat_max_c": a.dat_max,
                }
                for p, a in sorted(self.ahus.items())
            },
            "buildings": {
                b: {"l": t.l, "beta": t.beta} for b, t in sorted(self.buildings.items())
            },
            "weather": {
                "mean_c": self.weather.mean,
                "amplitude_c": self.weather.amplitude,
                "peak_hour": self.weather.peak_hour,
                "daily_sigma_c": self.weather.daily_sigma,
            },
            "cop": {
                "mean": self.cop.mean,
                "amplitude": self.cop.amplitude,
                "peak_hour": self.cop.peak_hour,
            },
            "schedule": {
                "lsp_c": self.schedule.lsp,
                "hsp_c": self.schedule.hsp,
                "block_days": self.schedule.block_days,
                "switch_hour": self.schedule.switch_hour,
            },
            "district_base_kw": self.district_base,
            "occupied_hours": list(self.occupied_hours),
            "gain_base_fraction": self.gain_base_fraction,
            "noise": {k: v for k, v in sorted(self.noise.items())},
        }


def truth_fan_coefficients(rated_flow: float, rated_power: float) -> tuple:
    """Scales the reference cubic shape to a fan's rated point."""
    s0, s1, s2, s3 = FAN_SHAPE
    return (
        s0 * rated_power,
        s1 * rated_power / rated_flow,
        s2 * rated_power / rated_flow**2,
        s3 * rated_power / rated_flow**3,
    )


def default_truth(topology: Topology, seed: int, noise: dict | None = None) -> GroundTruth:
    """Draws heterogeneous but physically tame parameters from a seed."""
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    zones = {}
    ahus = {}
    buildings = {}
    for building in topology.buildings:
        buildings[building.id] = BuildingTruth(
            l=float(rng.uniform(1.05, 1.35)), beta=float(rng.uniform(10.0, 40.0))
        )
        for ahu in building.ahus:
            path = f"{building.id}{SEP}{ahu.id}"
            ahus[path] = AhuTruth(
                k=float(rng.uniform(0.1, 0.45)),
                alpha=float(rng.uniform(-1.0, -0.2)),
                fan_coefficients=truth_fan_coefficients(
                    ahu.fan_rated_flow, ahu.fan_rated_power
                ),
            )
            for zone in ahu.zones:
                ua = float(rng.uniform(0.2, 0.6))
                tau_hours = float(rng.uniform(1.0, 4.0))
                v_min = float(rng.uniform(0.03, 0.08))
                v_max = float(rng.uniform(0.35, 0.7))
                zones[f"{path}{SEP}{zone.id}"] = ZoneTruth(
                    ua=ua,
                    c=ua * tau_hours * 3600.0,
                    v_min=v_min,
                    v_max=v_max,
                    kp=float(rng.uniform(0.15, 0.4)),
                    gain_peak=float(rng.uniform(0.3, 1.2)),
                )
    return GroundTruth(
        air=AirProperties(),
        zones=zones,
        ahus=ahus,
        buildings=buildings,
        noise=dict(noise or {}),
    )


def synthetic_topology(
    n_buildings: int = 1,
    ahus_per_building: int = 2,
    zones_per_ahu: int = 8,
) -> Topology:
    """Regularly shaped campus with rated fans sized to the zone count."""
    from .topology import AhuNode, BuildingNode, ZoneNode

    buildings = []
    for b in range(n_buildings):
        ahus = []
        for a in range(ahus_per_building):
            zones = tuple(
                ZoneNode(id=f"Z{z + 1:02d}") for z in range(zones_per_ahu)
            )
            rated_flow = 1.15 * 0.7 * zones_per_ahu
            ahus.append(
                AhuNode(
                    id=f"AHU{a + 1}",
                    fan_rated_flow=rated_flow,
                    fan_rated_power=1.7 * rated_flow,
                    zones=zones,
                )
            )
        buildings.append(BuildingNode(id=f"B{b + 1}", ahus=tuple(ahus)))
    return Topology(buildings=tuple(buildings))


@dataclass
class SimulationResult:
    """Channels plus the bookkeeping needed to audit any estimate."""

    frame: ChannelFrame
    truth: GroundTruth
    truth_loads: dict  # zone path -> DataFrame of exact load series
    commissioning: pd.DataFrame  # fan test points: building, ahu, flow, power
    catalog: PointCatalog
    start: pd.Timestamp
    days: int
    interval: pd.Timedelta
    seed: int


def _setpoint_series(times: pd.DatetimeIndex, start_day: pd.Timestamp, schedule: SetpointSchedule):
    """Active global command at each instant, switching mid-morning."""
    shifted = times - pd.Timedelta(hours=schedule.switch_hour)
    day_number = (shifted.normalize() - start_day.normalize()).days
    day_number = np.maximum(np.asarray(day_number), 0)
    block = day_number // schedule.block_days
    return np.where(block % 2 == 0, schedule.lsp, schedule.hsp)


def _substep_for(interval: pd.Timedelta) -> pd.Timedelta:
    n = max(1, round(interval / SUBSTEP))
    return interval / n


def simulate(
    topology: Topology,
    truth: GroundTruth | None,
    days: int,
    interval,
    seed: int,
    start="2021-06-22",
) -> SimulationResult:
    """Integrates the campus forward and emits every measured channel.

    The same seed always produces the same bytes. Ground-truth zone
    loads are evaluated with the truth parameters and zero noise, so a
    perfect estimator must reproduce them exactly.
    """
    if days < MIN_DAYS:
        raise ConfigError(f"need at least {MIN_DAYS} days for one full regime cycle, got {days}")
    interval = pd.Timedelta(interval)
    if interval <= pd.Timedelta(0) or pd.Timedelta(days=1) % interval != pd.Timedelta(0):
        raise ConfigError("interval must be positive and divide one day")
    topology.validate()
    if truth is None:
        truth = default_truth(topology, seed)

    start = pd.Timestamp(start)
    seq = np.random.SeedSequence(seed)
    _, weather_seed, noise_seed = seq.spawn(3)

    per_day = int(pd.Timedelta(days=1) / interval)
    n_rec = days * per_day
    substep = _substep_for(interval)
    sub_per_rec = int(round(interval / substep))
    n_sub = n_rec * sub_per_rec
    dt_s = substep / pd.Timedelta(seconds=1)

    # flatten the hierarchy into contiguous arrays, zones grouped by AHU
    zone_paths = []
    ahu_paths = []
    building_ids = [b.id for b in topology.buildings]
    ahu_starts = []
    ahu_of_zone = []
    building_of_ahu = []
    ahu_slices_per_building = {b.id: [] for b in topology.buildings}
    for bi, building in enumerate(topology.buildings):
        for ahu in building.ahus:
            path = f"{building.id}{SEP}{ahu.id}"
            ahu_starts.append(len(zone_paths))
            building_of_ahu.append(bi)
            ahu_slices_per_building[building.id].append(len(ahu_paths))
            ahu_paths.append(path)
            for zone in ahu.zones:
                ahu_of_zone.append(len(ahu_paths) - 1)
                zone_paths.append(f"{path}{SEP}{zone.id}")
    n_zones = len(zone_paths)
    n_ahus = len(ahu_paths)
    ahu_starts = np.asarray(ahu_starts)
    ahu_of_zone = np.asarray(ahu_of_zone)
    ahu_counts = np.diff(np.append(ahu_starts, n_zones)).astype(float)

    for path in zone_paths:
        if path not in truth.zones:
            raise ConfigError(f"truth parameters missing for zone {path}")
    for path in ahu_paths:
        if path not in truth.ahus:
            raise ConfigError(f"truth parameters missing for AHU {path}")
    for b in building_ids:
        if b not in truth.buildings:
            raise ConfigError(f"truth parameters missing for building {b}")

    ua = np.array([truth.zones[p].ua for p in zone_paths])
    cap = np.array([truth.zones[p].c for p in zone_paths])
    v_min = np.array([truth.zones[p].v_min for p in zone_paths])
    v_max = np.array([truth.zones[p].v_max for p in zone_paths])
    kp = np.array([truth.zones[p].kp for p in zone_paths])
    gain_peak = np.array([truth.zones[p].gain_peak for p in zone_paths])
    excluded = np.array(
        [zone.excluded for _, _, zone in topology.iter_zones()], dtype=bool
    )
    k_ahu = np.array([truth.ahus[p].k for p in ahu_paths])
    alpha_ahu = np.array([truth.ahus[p].alpha for p in ahu_paths])
    dat_min = np.array([truth.ahus[p].dat_min for p in ahu_paths])
    dat_max = np.array([truth.ahus[p].dat_max for p in ahu_paths])

    # precomputed drivers on the substep grid
    t_sub = pd.to_datetime(start.value + np.arange(n_sub, dtype=np.int64) * substep.value)
    hour_sub = (
        t_sub.hour.to_numpy() + t_sub.minute.to_numpy() / 60.0 + t_sub.second.to_numpy() / 3600.0
    )
    day_idx = (t_sub.normalize() - start.normalize()).days.to_numpy()
    weather_rng = np.random.default_rng(weather_seed)
    daily_offset = weather_rng.normal(0.0, truth.weather.daily_sigma, days)
    oat_sub = (
        truth.weather.mean
        + truth.weather.amplitude
        * np.cos(2.0 * np.pi * (hour_sub - truth.weather.peak_hour) / 24.0)
        + daily_offset[day_idx]
    )
    sp_sub = _setpoint_series(t_sub, start, truth.schedule)
    occ_lo, occ_hi = truth.occupied_hours
    weekday_sub = t_sub.dayofweek.to_numpy() < 5
    occ_sub = weekday_sub & (hour_sub >= occ_lo) & (hour_sub < occ_hi)
    gain_frac_sub = np.where(
        occ_sub, 1.0, truth.gain_base_fraction
    )

    cp_rho = truth.air.cp_rho
    iat = np.full(n_zones, truth.schedule.lsp, dtype=float)
    span = v_max - v_min

    rec_iat = np.empty((n_rec, n_zones))
    rec_v = np.empty((n_rec, n_zones))
    rec_dat = np.empty((n_rec, n_ahus))

    lo, hi = IAT_LIMITS
    for i in range(n_sub):
        sp_t = sp_sub[i]
        sp_zone = np.where(excluded, truth.schedule.lsp, sp_t)
        v = np.clip(v_min + kp * np.maximum(iat - sp_zone, 0.0), v_min, v_max)
        demand = (v - v_min) / span
        demand_ahu = np.add.reduceat(demand, ahu_starts) / ahu_counts
        dat_ahu = dat_max - (dat_max - dat_min) * demand_ahu
        if i % sub_per_rec == 0:
            r = i // sub_per_rec
            rec_iat[r] = iat
            rec_v[r] = v
            rec_dat[r] = dat_ahu
        oat_t = oat_sub[i]
        gains = gain_peak * gain_frac_sub[i]
        dat_zone = dat_ahu[ahu_of_zone]
        diat = (ua * (oat_t - iat) + gains - cp_rho * v * (iat - dat_zone)) / cap
        iat = iat + dt_s * diat
        if iat.min() < lo or iat.max() > hi:
            j = int(np.argmax((iat < lo) | (iat > hi)))
            raise SimulationDivergedError(zone_paths[j], float(iat[j]))

    # derived channels from the recorded instants
    rec_idx = slice(0, n_sub, sub_per_rec)
    times = t_sub[rec_idx]
    oat_rec = oat_sub[rec_idx]
    sp_rec = sp_sub[rec_idx]
    hour_rec = hour_sub[rec_idx]

    v_c = np.add.reduceat(rec_v, ahu_starts, axis=1)
    rat = np.add.reduceat(rec_v * rec_iat, ahu_starts, axis=1) / v_c
    mat = k_ahu * oat_rec[:, None] + (1.0 - k_ahu) * rat + alpha_ahu
    q_c = cp_rho * v_c * (mat - rec_dat)

    q_b = np.empty((n_rec, len(building_ids)))
    for bi, b in enumerate(building_ids):
        cols = ahu_slices_per_building[b]
        q_b[:, bi] = truth.buildings[b].l * q_c[:, cols].sum(axis=1) + truth.buildings[b].beta
    q_d = truth.district_base + q_b.sum(axis=1)
    cop_rec = truth.cop.value(hour_rec)
    p_d = q_d / cop_rec

    # exact per-zone loads from truth parameters
    dat_zone = rec_dat[:, ahu_of_zone]
    rat_zone = rat[:, ahu_of_zone]
    k_zone = k_ahu[ahu_of_zone]
    alpha_zone = alpha_ahu[ahu_of_zone]
    q_z = cp_rho * rec_v * (rec_iat - dat_zone)
    q_ec = q_z + cp_rho * rec_v * (k_zone * (oat_rec[:, None] - rat_zone) + alpha_zone)
    flow_share = rec_v / v_c[:, ahu_of_zone]
    coil_sum_b = np.empty((n_rec, len(building_ids)))
    for bi, b in enumerate(building_ids):
        coil_sum_b[:, bi] = q_c[:, ahu_slices_per_building[b]].sum(axis=1)
    bi_of_zone = np.array([building_of_ahu[a] for a in ahu_of_zone])
    l_zone = np.array([truth.buildings[building_ids[bi]].l for bi in bi_of_zone])
    beta_zone = np.array([truth.buildings[building_ids[bi]].beta for bi in bi_of_zone])
    coil_share = q_c[:, ahu_of_zone] / coil_sum_b[:, bi_of_zone]
    q_eb = l_zone * q_ec + flow_share * coil_share * beta_zone
    p_fan_ahu = np.column_stack(
        [truth.ahus[p].fan_power(v_c[:, a]) for a, p in enumerate(ahu_paths)]
    )
    p_fan_z = flow_share * p_fan_ahu[:, ahu_of_zone]
    p_total = q_eb / cop_rec[:, None] + p_fan_z

    # assemble the channel table
    columns = {}
    columns[(OAT, "", "", "")] = oat_rec
    columns[(SP, "", "", "")] = sp_rec
    columns[(Q_D, "", "", "")] = q_d
    columns[(P_D, "", "", "")] = p_d
    for bi, b in enumerate(building_ids):
        columns[(Q_B, b, "", "")] = q_b[:, bi]
    for a, path in enumerate(ahu_paths):
        b, ahu_id = path.split(SEP)
        columns[(RAT, b, ahu_id, "")] = rat[:, a]
        columns[(MAT, b, ahu_id, "")] = mat[:, a]
        columns[(DAT, b, ahu_id, "")] = rec_dat[:, a]
    for z, path in enumerate(zone_paths):
        b, ahu_id, zone_id = path.split(SEP)
        columns[(IAT, b, ahu_id, zone_id)] = rec_iat[:, z]
        columns[(V_Z, b, ahu_id, zone_id)] = rec_v[:, z]
    wide = pd.DataFrame(columns, index=times)
    wide.columns = pd.MultiIndex.from_tuples(wide.columns, names=COLUMN_LEVELS)
    frame = frame_from_wide(wide, interval)
    if any(sigma > 0 for sigma in truth.noise.values()):
        frame = perturb(frame, truth.noise, noise_seed)

    truth_loads = {}
    for z, path in enumerate(zone_paths):
        truth_loads[path] = pd.DataFrame(
            {
                "q_z_kw": q_z[:, z],
                "q_ec_kw": q_ec[:, z],
                "q_eb_kw": q_eb[:, z],
                "p_fan_kw": p_fan_z[:, z],
                "p_total_kw": p_total[:, z],
            },
            index=times,
        )

    commissioning = commissioning_points(topology, truth)
    catalog = build_catalog(topology)
    return SimulationResult(
        frame=frame,
        truth=truth,
        truth_loads=truth_loads,
        commissioning=commissioning,
        catalog=catalog,
        start=start,
        days=days,
        interval=interval,
        seed=seed,
    )


def commissioning_points(topology: Topology, truth: GroundTruth, n_points: int = 20) -> pd.DataFrame:
    """Exact fan test points over 15..100% of rated flow per AHU."""
    rows = []
    for building, ahu in topology.iter_ahus():
        path = f"{building.id}{SEP}{ahu.id}"
        at = truth.ahus[path]
        flows = np.linspace(0.15 * ahu.fan_rated_flow, ahu.fan_rated_flow, n_points)
        for f in flows:
            rows.append(
                {
                    "building": building.id,
                    "ahu": ahu.id,
                    "flow": float(f),
                    "power": float(at.fan_power(f)),
                    "flow_unit": "m3/s",
                    "power_unit": "kw",
                }
            )
    return pd.DataFrame(rows, columns=["building", "ahu", "flow", "power", "flow_unit", "power_unit"])


def build_catalog(topology: Topology) -> PointCatalog:
    """One historian point per simulated channel, ids mirroring paths."""
    points = [
        PointDef("oat", OAT, "", "", "", "c"),
        PointDef("sp", SP, "", "", "", "c"),
        PointDef("q_d", Q_D, "", "", "", "kw"),
        PointDef("p_d", P_D, "", "", "", "kw"),
    ]
    for building in topology.buildings:
        points.append(PointDef(f"{building.id}{SEP}q_b", Q_B, building.id, "", "", "kw"))
        for ahu in building.ahus:
            base = f"{building.id}{SEP}{ahu.id}"
            points.append(PointDef(f"{base}{SEP}rat", RAT, building.id, ahu.id, "", "c"))
            points.append(PointDef(f"{base}{SEP}mat", MAT, building.id, ahu.id, "", "c"))
            points.append(PointDef(f"{base}{SEP}dat", DAT, building.id, ahu.id, "", "c"))
            for zone in ahu.zones:
                zp = f"{base}{SEP}{zone.id}"
                points.append(PointDef(f"{zp}{SEP}iat", IAT, building.id, ahu.id, zone.id, "c"))
                points.append(
                    PointDef(f"{zp}{SEP}v_z", V_Z, building.id, ahu.id, zone.id, "m3/s")
                )
    return PointCatalog(points)


def perturb(frame: ChannelFrame, noise_spec: dict, seed) -> ChannelFrame:
    """Adds independent Gaussian noise per channel variable.

    Channels whose variable is absent from the mapping, or mapped to
    zero, come through untouched. Iteration order is fixed so a seed
    fully determines the output.
    """
    for variable, sigma in noise_spec.items():
        if sigma < 0:
            raise ConfigError(f"noise sigma for {variable} must be nonnegative")
    rng = np.random.default_rng(seed)
    data = frame.data.copy()
    for key in sorted(data.columns):
        sigma = noise_spec.get(key[0], 0.0)
        if sigma > 0:
            data[key] = data[key] + rng.normal(0.0, sigma, len(data))
    return ChannelFrame(data, frame.interval, frame.flagged)
