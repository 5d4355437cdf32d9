"""Set-point regime labeling and operating-hours masks.

The flexibility experiment alternates the global cooling set-point
between a low and a high value on a day-by-day schedule. Metrics need
to know which regime each day belonged to, and which timestamps count
as occupied operating hours.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import ConfigError

LSP = "lsp"
HSP = "hsp"
UNLABELED = "unlabeled"

# midday window used to read the commanded set-point off the trend
_LABEL_WINDOW = (12, 16)


@dataclass(frozen=True)
class OperatingHours:
    """Weekday occupied window, [start, end) in local hours."""

    start_hour: int = 6
    end_hour: int = 20
    weekdays_only: bool = True

    def __post_init__(self):
        if not 0 <= self.start_hour < self.end_hour <= 24:
            raise ConfigError("operating hours must satisfy 0 <= start < end <= 24")

    def mask(self, index: pd.DatetimeIndex) -> pd.Series:
        m = (index.hour >= self.start_hour) & (index.hour < self.end_hour)
        if self.weekdays_only:
            m &= index.dayofweek < 5
        return pd.Series(m, index=index)


@dataclass(frozen=True)
class RegimeCalendar:
    """Day labels plus the set-points that define the regimes."""

    labels: pd.Series  # index: normalized days, values lsp/hsp/unlabeled
    lsp: float
    hsp: float

    def days(self, regime: str) -> pd.DatetimeIndex:
        return pd.DatetimeIndex(self.labels.index[self.labels == regime])


def label_days(sp: pd.Series, lsp: float, hsp: float) -> pd.Series:
    """Labels each calendar day lsp/hsp from the set-point trend.

    The median commanded set-point over the midday window decides the
    label; days with no readings there come back unlabeled. Ties go to
    the low set-point since that is the demand-increasing regime.
    """
    if not lsp < hsp:
        raise ConfigError(f"low set-point must be below high ({lsp} vs {hsp})")
    if sp.empty:
        return pd.Series(dtype=object)
    midday = sp[(sp.index.hour >= _LABEL_WINDOW[0]) & (sp.index.hour < _LABEL_WINDOW[1])]
    per_day = midday.groupby(midday.index.normalize()).median()

    days = pd.DatetimeIndex(sp.index.normalize().unique())
    labels = pd.Series(UNLABELED, index=days, dtype=object)
    known = per_day.dropna()
    dist_l = (known - lsp).abs()
    dist_h = (known - hsp).abs()
    labels.loc[known.index[dist_l <= dist_h]] = LSP
    labels.loc[known.index[dist_l > dist_h]] = HSP
    return labels


def regime_timestamp_mask(index: pd.DatetimeIndex, day_labels: pd.Series, regime: str) -> pd.Series:
    """True at timestamps whose calendar day carries the given label."""
    day_of = pd.Series(index.normalize(), index=index)
    lookup = day_labels.reindex(day_of.to_numpy())
    return pd.Series(lookup.to_numpy() == regime, index=index)


def operating_mask(
    index: pd.DatetimeIndex,
    hours: OperatingHours,
    supply_flow: pd.Series | None = None,
    min_flow: float = 0.0,
) -> pd.Series:
    """Occupied-hours mask, optionally gated on the AHU actually moving air.

    NaN flow never qualifies as operating.
    """
    m = hours.mask(index)
    if supply_flow is not None:
        flow_ok = supply_flow.reindex(index).to_numpy() >= min_flow
        flow_ok = np.where(np.isnan(supply_flow.reindex(index).to_numpy()), False, flow_ok)
        m &= flow_ok
    return m


def day_coverage(series: pd.Series, expected_per_day: int) -> pd.Series:
    """Fraction of expected samples present per calendar day."""
    counts = series.notna().groupby(series.index.normalize()).sum()
    return counts / float(expected_per_day)
