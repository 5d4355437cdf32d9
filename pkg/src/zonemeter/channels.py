"""Aligned measurement channels.

A ChannelFrame holds every measured variable on one shared, strictly
increasing timestamp index at a fixed interval. Columns are keyed by
(variable, building, ahu, zone), with empty strings for levels that do
not apply (e.g. outdoor air temperature has no building).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import pandas as pd

from . import unitconv
from .errors import InputError, MissingChannelError, UnknownPointError

# channel variables, lowercase everywhere
Q_B = "q_b"  # building cooling load, kW
SP = "sp"  # global cooling set-point command, degC
RAT = "rat"  # AHU return air temperature, degC
MAT = "mat"  # AHU mixed air temperature, degC
DAT = "dat"  # AHU discharge air temperature, degC
IAT = "iat"  # zone indoor air temperature, degC
V_Z = "v_z"  # zone supply air flow, m3/s
OAT = "oat"  # outdoor air temperature, degC
Q_D = "q_d"  # district supplied cooling, kW
P_D = "p_d"  # district electrical input for cooling, kW

TEMPERATURE_VARS = frozenset({SP, RAT, MAT, DAT, IAT, OAT})
FLOW_VARS = frozenset({V_Z})
LOAD_VARS = frozenset({Q_B, Q_D, P_D})
ALL_VARS = TEMPERATURE_VARS | FLOW_VARS | LOAD_VARS

TEMP_SANITY = (-40.0, 60.0)

COLUMN_LEVELS = ("variable", "building", "ahu", "zone")

Key = tuple[str, str, str, str]


def channel_key(variable, building="", ahu="", zone="") -> Key:
    return (variable, building, ahu, zone)


@dataclass(frozen=True)
class PointDef:
    point_id: str
    variable: str
    building: str
    ahu: str
    zone: str
    unit: str

    @property
    def key(self) -> Key:
        return (self.variable, self.building, self.ahu, self.zone)

    def convert(self, value):
        if self.variable in TEMPERATURE_VARS:
            return unitconv.temperature_to_celsius(value, self.unit)
        if self.variable in FLOW_VARS:
            return unitconv.flow_to_m3s(value, self.unit)
        return unitconv.power_to_kw(value, self.unit)


class PointCatalog:
    """Maps historian point ids to channel keys and units."""

    def __init__(self, points: list[PointDef]):
        self._points = {}
        for p in points:
            if p.variable not in ALL_VARS:
                raise InputError(f"point {p.point_id}: unknown variable {p.variable!r}")
            if p.point_id in self._points:
                raise InputError(f"duplicate point id: {p.point_id}")
            self._points[p.point_id] = p

    def __len__(self):
        return len(self._points)

    def __contains__(self, point_id):
        return point_id in self._points

    def get(self, point_id) -> PointDef:
        try:
            return self._points[point_id]
        except KeyError:
            raise UnknownPointError([point_id]) from None

    def points(self):
        return list(self._points.values())

    @classmethod
    def from_csv(cls, path) -> "PointCatalog":
        points = []
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"point_id", "building", "ahu", "zone", "variable", "unit"}
            if reader.fieldnames is None or not required.issubset(reader.fieldnames):
                raise InputError(
                    f"point catalog must have columns {sorted(required)}"
                )
            for row in reader:
                points.append(
                    PointDef(
                        point_id=row["point_id"].strip(),
                        variable=row["variable"].strip().lower(),
                        building=row["building"].strip(),
                        ahu=row["ahu"].strip(),
                        zone=row["zone"].strip(),
                        unit=row["unit"].strip(),
                    )
                )
        return cls(points)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["point_id", "building", "ahu", "zone", "variable", "unit"])
            for p in self.points():
                writer.writerow([p.point_id, p.building, p.ahu, p.zone, p.variable, p.unit])


class ChannelFrame:
    """Immutable container of aligned channel series.

    Treat as read-only after construction; every accessor hands out data
    backed by the internal DataFrame without copying.
    """

    def __init__(self, data: pd.DataFrame, interval: pd.Timedelta, flagged=None):
        if not isinstance(data.columns, pd.MultiIndex) or data.columns.nlevels != 4:
            raise InputError("channel data must have (variable, building, ahu, zone) columns")
        if interval <= pd.Timedelta(0):
            raise InputError("interval must be positive")
        if len(data.index) and not data.index.is_monotonic_increasing:
            raise InputError("timestamps must be increasing")
        data = data.copy()
        data.columns = data.columns.set_names(COLUMN_LEVELS)
        self._data = data
        self._interval = pd.Timedelta(interval)
        self.flagged = dict(flagged or {})

    @property
    def data(self) -> pd.DataFrame:
        return self._data

    @property
    def interval(self) -> pd.Timedelta:
        return self._interval

    @property
    def timestamps(self) -> pd.DatetimeIndex:
        return self._data.index

    def __len__(self):
        return len(self._data.index)

    def keys(self) -> list[Key]:
        return [tuple(k) for k in self._data.columns]

    def has(self, variable, building="", ahu="", zone="") -> bool:
        return (variable, building, ahu, zone) in self._data.columns

    def channel(self, variable, building="", ahu="", zone="") -> pd.Series:
        key = (variable, building, ahu, zone)
        try:
            return self._data[key]
        except KeyError:
            raise MissingChannelError(key) from None

    def matrix(self, variable, building, ahu, zone_ids) -> pd.DataFrame:
        """Zone-level channels for one AHU as columns named by zone id."""
        cols = {}
        for zid in zone_ids:
            cols[zid] = self.channel(variable, building, ahu, zid)
        return pd.DataFrame(cols, index=self._data.index)

    def iter_readings(self):
        """Yields (timestamp, key, value) for every non-missing cell."""
        values = self._data.to_numpy()
        index = self._data.index
        columns = [tuple(c) for c in self._data.columns]
        for i, ts in enumerate(index):
            row = values[i]
            for j, key in enumerate(columns):
                v = row[j]
                if not np.isnan(v):
                    yield ts, key, float(v)


def _sanitize(wide: pd.DataFrame):
    """Applies physical sanity bounds; returns (clean frame, flag counts)."""
    flagged = {}
    for col in wide.columns:
        variable = col[0]
        series = wide[col]
        if variable in TEMPERATURE_VARS:
            bad = series.notna() & ((series < TEMP_SANITY[0]) | (series > TEMP_SANITY[1]))
            if bad.any():
                flagged[tuple(col)] = int(bad.sum())
                wide.loc[bad, col] = np.nan
        elif variable in FLOW_VARS:
            bad = series.notna() & (series < 0)
            if bad.any():
                flagged[tuple(col)] = int(bad.sum())
                wide.loc[bad, col] = np.nan
        else:
            # negative measured loads are kept but counted
            bad = series.notna() & (series < 0)
            if bad.any():
                flagged[tuple(col)] = int(bad.sum())
    return wide, flagged


def _empty_frame(interval) -> ChannelFrame:
    cols = pd.MultiIndex.from_tuples([], names=COLUMN_LEVELS)
    return ChannelFrame(pd.DataFrame(index=pd.DatetimeIndex([]), columns=cols), interval)


def normalize_timestamps(values) -> pd.DatetimeIndex:
    """Parses timestamps; any UTC offset is applied, then dropped.

    The remaining naive clock is treated as building-local time for
    weekday and time-of-day logic.
    """
    idx = pd.to_datetime(pd.Series(values), utc=True, format="ISO8601")
    return pd.DatetimeIndex(idx.dt.tz_localize(None))


def align_channels(readings, catalog: PointCatalog, interval) -> ChannelFrame:
    """Buckets raw point readings into a ChannelFrame.

    Parameters
    ----------
    readings:
        Iterable of (timestamp, point_id, value) or a DataFrame with
        columns timestamp/point_id/value.
    catalog:
        Resolves point ids to channel keys and units.
    interval:
        Bucket width; buckets are left-labeled and hold the mean of the
        readings that fall inside them.
    """
    interval = pd.Timedelta(interval)
    if interval <= pd.Timedelta(0):
        raise InputError("interval must be positive")

    if isinstance(readings, pd.DataFrame):
        raw = readings[["timestamp", "point_id", "value"]].copy()
    else:
        raw = pd.DataFrame(list(readings), columns=["timestamp", "point_id", "value"])
    if raw.empty:
        return _empty_frame(interval)

    unknown = set(raw["point_id"].unique()) - {p.point_id for p in catalog.points()}
    if unknown:
        raise UnknownPointError(unknown)

    raw["timestamp"] = normalize_timestamps(raw["timestamp"])
    raw["value"] = pd.to_numeric(raw["value"], errors="coerce")
    raw = raw.dropna(subset=["value"])
    if raw.empty:
        return _empty_frame(interval)

    # convert to canonical units before averaging (all conversions are affine)
    converted = np.empty(len(raw), dtype=float)
    for point_id, idx in raw.groupby("point_id").indices.items():
        point = catalog.get(point_id)
        converted[idx] = point.convert(raw["value"].to_numpy()[idx])
    raw["value"] = converted
    raw["key"] = [catalog.get(pid).key for pid in raw["point_id"]]
    raw["bucket"] = raw["timestamp"].dt.floor(interval)

    wide = raw.pivot_table(index="bucket", columns="key", values="value", aggfunc="mean")
    full_index = pd.date_range(wide.index.min(), wide.index.max(), freq=interval)
    wide = wide.reindex(full_index)
    wide.columns = pd.MultiIndex.from_tuples(wide.columns, names=COLUMN_LEVELS)
    wide = wide.sort_index(axis=1)
    wide, flagged = _sanitize(wide)
    return ChannelFrame(wide, interval, flagged)


def frame_from_wide(wide: pd.DataFrame, interval) -> ChannelFrame:
    """Wraps an already-aligned wide table (e.g. simulator output)."""
    wide = wide.sort_index(axis=1)
    wide, flagged = _sanitize(wide.copy())
    return ChannelFrame(wide, interval, flagged)
