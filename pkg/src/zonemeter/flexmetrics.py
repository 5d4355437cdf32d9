"""Flexibility, heterogeneity, and thermal-impact metrics.

Daily energies are integrated from the disaggregated zone power
series, averaged within each set-point regime, and compared. Inequality
across zones is summarized with Lorenz curves and Gini coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .channels import IAT, ChannelFrame
from .errors import (
    MetricError,
    NoPositiveSavingsError,
    UndefinedFlexibilityError,
    UndefinedGiniError,
)
from .regimes import HSP, LSP, OperatingHours, regime_timestamp_mask
from .topology import SEP, Topology

DEFAULT_COVERAGE = 0.8
DEFAULT_TOP_FRACTION = 0.3

WINDOW_OPERATING = "operating"
WINDOW_FULL_DAY = "full_day"


def energy_flexibility(e_lsp: float, e_hsp: float) -> float:
    """Relative drop in average daily energy when the set-point is raised."""
    if not e_lsp > 0:
        raise UndefinedFlexibilityError(
            f"flexibility undefined for nonpositive baseline energy {e_lsp}"
        )
    return (e_lsp - e_hsp) / e_lsp


def flexibility_shares(savings) -> np.ndarray:
    """Normalizes per-zone savings into shares; losses count as zero."""
    savings = np.asarray(savings, dtype=float)
    clipped = np.clip(savings, 0.0, None)
    total = clipped.sum()
    if not total > 0:
        raise NoPositiveSavingsError("no zone saved energy; shares undefined")
    return clipped / total


def _check_shares(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or len(values) == 0:
        raise UndefinedGiniError("need a non-empty 1-d value vector")
    if np.any(values < 0):
        raise MetricError("negative values are not valid shares")
    if not values.sum() > 0:
        raise UndefinedGiniError("all-zero values")
    return values


def gini(values) -> float:
    """Inequality index over nonnegative values, 0 equal to (n-1)/n."""
    y = np.sort(_check_shares(values), kind="stable")
    n = len(y)
    i = np.arange(1, n + 1)
    weights = 2 * n - 2 * i + 1
    return float(1.0 - (weights * y).sum() / (n * n * y.mean()))


def lorenz(values) -> np.ndarray:
    """Cumulative-share curve: n+1 points from (0, 0) to (1, 1)."""
    y = np.sort(_check_shares(values), kind="stable")
    n = len(y)
    cum = np.concatenate([[0.0], np.cumsum(y)]) / y.sum()
    x = np.arange(n + 1) / n
    return np.column_stack([x, cum])


def daily_energy(
    power: pd.Series,
    interval: pd.Timedelta,
    window: pd.Series,
    coverage_threshold: float = DEFAULT_COVERAGE,
) -> pd.Series:
    """Integrates power to daily kWh over the given window.

    Days with too little window data are NaN; days the window never
    touches (weekends, say) are absent. Partial gaps scale up from the
    in-window mean so a lone missing sample does not read as free
    energy.
    """
    hours = interval / pd.Timedelta(hours=1)
    win = power[window.reindex(power.index, fill_value=False)]
    if win.empty:
        return pd.Series(dtype=float)
    days = win.index.normalize()
    expected = pd.Series(1, index=days).groupby(level=0).count()
    present = win.notna().groupby(days).sum()
    mean_present = win.groupby(days).mean()
    energy = mean_present * expected * hours
    coverage = present / expected
    return energy.where(coverage >= coverage_threshold)


@dataclass
class EntityFlex:
    """Flexibility summary for one zone, AHU, or building."""

    id: str
    e_lsp_kwh: float
    e_hsp_kwh: float
    ef: float
    savings_kwh: float
    efs: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "ef": self.ef,
            "efs": self.efs,
            "e_lsp_kwh": self.e_lsp_kwh,
            "e_hsp_kwh": self.e_hsp_kwh,
        }


def entity_flexibility(
    entity_id: str,
    power: pd.Series,
    interval: pd.Timedelta,
    day_labels: pd.Series,
    window: pd.Series,
    coverage_threshold: float = DEFAULT_COVERAGE,
) -> EntityFlex:
    """Average daily energy per regime and the resulting flexibility."""
    daily = daily_energy(power, interval, window, coverage_threshold)
    labels = day_labels.reindex(daily.index)
    lsp_days = daily[(labels == LSP) & daily.notna()]
    hsp_days = daily[(labels == HSP) & daily.notna()]
    if lsp_days.empty or hsp_days.empty:
        raise UndefinedFlexibilityError(
            f"{entity_id}: need usable days in both regimes "
            f"(low {len(lsp_days)}, high {len(hsp_days)})"
        )
    e_lsp = float(lsp_days.mean())
    e_hsp = float(hsp_days.mean())
    return EntityFlex(
        id=entity_id,
        e_lsp_kwh=e_lsp,
        e_hsp_kwh=e_hsp,
        ef=energy_flexibility(e_lsp, e_hsp),
        savings_kwh=e_lsp - e_hsp,
    )


def assign_shares(entities: list) -> None:
    """Fills efs in place across one normalization group."""
    shares = flexibility_shares([e.savings_kwh for e in entities])
    for e, s in zip(entities, shares):
        e.efs = float(s)


def concentration(
    energy_use: dict,
    savings: dict,
    order_by: str = "energy_use",
    top_fraction: float = DEFAULT_TOP_FRACTION,
) -> dict:
    """Share of use and of positive savings held by the top zones.

    Zones are ranked descending by the chosen key, ties broken by id so
    repeated runs pick the same winners.
    """
    if order_by not in ("energy_use", "flexibility"):
        raise MetricError(f"unknown concentration ordering {order_by!r}")
    if not 0 <= top_fraction <= 1:
        raise MetricError("top_fraction must lie in [0, 1]")
    ids = sorted(energy_use)
    key = energy_use if order_by == "energy_use" else savings
    ranked = sorted(ids, key=lambda z: (-key[z], z))
    n_top = math.ceil(top_fraction * len(ids))
    top = set(ranked[:n_top])

    total_use = sum(max(energy_use[z], 0.0) for z in ids)
    total_flex = sum(max(savings[z], 0.0) for z in ids)
    top_use = sum(max(energy_use[z], 0.0) for z in top)
    top_flex = sum(max(savings[z], 0.0) for z in top)
    return {
        "fraction": float(top_fraction),
        "share_of_use": top_use / total_use if total_use > 0 else 0.0,
        "share_of_flex": top_flex / total_flex if total_flex > 0 else 0.0,
    }


def thermal_impact(
    iat: pd.Series,
    day_labels: pd.Series,
    lsp: float,
    window: pd.Series,
) -> dict:
    """Indoor-temperature response of one zone to the regime change."""
    win = window.reindex(iat.index, fill_value=False)
    on_lsp = win & regime_timestamp_mask(iat.index, day_labels, LSP)
    on_hsp = win & regime_timestamp_mask(iat.index, day_labels, HSP)
    lsp_samples = iat[on_lsp].dropna()
    hsp_samples = iat[on_hsp].dropna()
    if lsp_samples.empty or hsp_samples.empty:
        raise MetricError(
            "thermal impact needs indoor-temperature samples in both regimes"
        )
    mean_lsp = float(lsp_samples.mean())
    mean_hsp = float(hsp_samples.mean())
    overcooling = float((lsp - lsp_samples).clip(lower=0.0).mean())
    return {
        "mean_iat_lsp_c": mean_lsp,
        "mean_iat_hsp_c": mean_hsp,
        "delta_t_c": mean_hsp - mean_lsp,
        "overcooling_c": overcooling,
    }


def _window_mask(kind: str, index: pd.DatetimeIndex, hours: OperatingHours) -> pd.Series:
    if kind == WINDOW_OPERATING:
        return hours.mask(index)
    if kind == WINDOW_FULL_DAY:
        return pd.Series(True, index=index)
    raise MetricError(f"unknown energy window {kind!r}")


def _member_power(tables: list) -> pd.Series:
    total = tables[0]["p_total_kw"].copy()
    for t in tables[1:]:
        total = total + t["p_total_kw"]
    return total


def flexibility_report(
    zone_tables: dict,
    interval: pd.Timedelta,
    topology: Topology,
    day_labels: pd.Series,
    hours: OperatingHours,
    coverage_threshold: float = DEFAULT_COVERAGE,
    top_fraction: float = DEFAULT_TOP_FRACTION,
    zone_window: str = WINDOW_OPERATING,
    building_window: str = WINDOW_FULL_DAY,
) -> dict:
    """Assembles the full flexibility report structure.

    zone_tables maps zone paths to disaggregated load tables. Zones
    flagged excluded carry loads through the cascade but sit out the
    experiment, so they are left out of every metric here. Share
    normalization runs within each building for zones and AHUs and
    across buildings for the building level.
    """
    if not zone_tables:
        raise MetricError("no zone load series to summarize")
    index = next(iter(zone_tables.values())).index
    zone_win = _window_mask(zone_window, index, hours)
    bldg_win = _window_mask(building_window, index, hours)

    zone_rows = []
    ahu_rows = []
    building_rows = []
    building_entities = []
    per_building_extra = {}

    for building in topology.buildings:
        zone_entities = []
        ahu_entities = []
        building_tables = []
        zone_use = {}
        zone_savings = {}
        for ahu in building.ahus:
            ahu_tables = []
            for zone in ahu.zones:
                if zone.excluded:
                    continue
                path = f"{building.id}{SEP}{ahu.id}{SEP}{zone.id}"
                table = zone_tables.get(path)
                if table is None:
                    raise MetricError(f"no load series for zone {path}")
                ahu_tables.append(table)
                building_tables.append(table)
                flex = entity_flexibility(
                    path,
                    table["p_total_kw"],
                    interval,
                    day_labels,
                    zone_win,
                    coverage_threshold,
                )
                zone_entities.append(flex)
                daily = daily_energy(
                    table["p_total_kw"], interval, zone_win, coverage_threshold
                )
                labeled = daily[day_labels.reindex(daily.index).isin([LSP, HSP])]
                zone_use[path] = max(float(labeled.mean()), 0.0)
                zone_savings[path] = flex.savings_kwh
            if ahu_tables:
                ahu_entities.append(
                    entity_flexibility(
                        f"{building.id}{SEP}{ahu.id}",
                        _member_power(ahu_tables),
                        interval,
                        day_labels,
                        zone_win,
                        coverage_threshold,
                    )
                )
        if not building_tables:
            continue
        assign_shares(zone_entities)
        assign_shares(ahu_entities)
        bflex = entity_flexibility(
            building.id,
            _member_power(building_tables),
            interval,
            day_labels,
            bldg_win,
            coverage_threshold,
        )
        building_entities.append(bflex)
        use_values = [zone_use[z] for z in sorted(zone_use)]
        flex_values = [max(zone_savings[z], 0.0) for z in sorted(zone_savings)]
        per_building_extra[building.id] = {
            "gini_eu": gini(use_values),
            "gini_ef": gini(flex_values),
            "lorenz_eu": [[float(x), float(y)] for x, y in lorenz(use_values)],
            "lorenz_ef": [[float(x), float(y)] for x, y in lorenz(flex_values)],
            "concentration": concentration(zone_use, zone_savings, "energy_use", top_fraction),
        }
        zone_rows.extend(zone_entities)
        ahu_rows.extend(ahu_entities)

    assign_shares(building_entities)
    building_rows = []
    for b in sorted(building_entities, key=lambda e: e.id):
        row = b.to_dict()
        row.update(per_building_extra[b.id])
        building_rows.append(row)

    return {
        "buildings": building_rows,
        "ahus": [e.to_dict() for e in sorted(ahu_rows, key=lambda e: e.id)],
        "zones": [e.to_dict() for e in sorted(zone_rows, key=lambda e: e.id)],
    }


def thermal_impact_table(
    frame: ChannelFrame,
    topology: Topology,
    day_labels: pd.Series,
    lsp: float,
    hours: OperatingHours,
) -> pd.DataFrame:
    """Per-zone thermal impact rows for every non-excluded zone."""
    window = hours.mask(frame.timestamps)
    rows = []
    for building, ahu, zone in topology.iter_zones():
        if zone.excluded:
            continue
        iat = frame.channel(IAT, building.id, ahu.id, zone.id)
        stats = thermal_impact(iat, day_labels, lsp, window)
        path = f"{building.id}{SEP}{ahu.id}{SEP}{zone.id}"
        rows.append({"zone_id": path, **stats})
    rows.sort(key=lambda r: r["zone_id"])
    return pd.DataFrame(
        rows,
        columns=["zone_id", "mean_iat_lsp_c", "mean_iat_hsp_c", "delta_t_c", "overcooling_c"],
    )
