"""Shared fixtures: one small synthetic campus reused across modules.

The simulation is the expensive part, so it runs once per session; the
fits and the cascade derive from it. Tests that need different shapes
or noise build their own local datasets.
"""

import pandas as pd
import pytest

from zonemeter.disaggregate import run_cascade
from zonemeter.regimes import label_days
from zonemeter.regression import FittedModels, fit_building, fit_fan, fit_fresh_air
from zonemeter.simulate import commissioning_points, simulate, synthetic_topology
from zonemeter.channels import SP
from zonemeter.thermo import ahu_load_series, pick_rat
from zonemeter.topology import SEP, AirProperties

CAMPUS_SEED = 9
# long enough that regime day-weather imbalance averages out and every
# aggregation level shows positive savings
CAMPUS_DAYS = 28


def fit_campus(frame, topology, truth, air=None):
    """Fits all three model families directly from simulator output."""
    air = air or AirProperties()
    comm = commissioning_points(topology, truth)
    fresh_air, buildings, fans = {}, {}, {}
    for building in topology.buildings:
        coil_sum = None
        for ahu in building.ahus:
            series = ahu_load_series(frame, building.id, ahu, air)
            rat = pick_rat(frame, building.id, ahu, series.rat)
            path = f"{building.id}{SEP}{ahu.id}"
            fresh_air[path] = fit_fresh_air(frame, building.id, ahu.id, series, rat, air)
            sub = comm[(comm.building == building.id) & (comm.ahu == ahu.id)]
            fans[path] = fit_fan(
                building.id, ahu.id, sub["flow"], sub["power"], "m3/s", "kW"
            )
            coil_sum = series.q_c if coil_sum is None else coil_sum + series.q_c
        buildings[building.id] = fit_building(frame, building.id, coil_sum)
    return FittedModels(air=air, fresh_air=fresh_air, buildings=buildings, fans=fans)


@pytest.fixture(scope="session")
def campus():
    topology = synthetic_topology(n_buildings=2, ahus_per_building=2, zones_per_ahu=3)
    result = simulate(topology, None, days=CAMPUS_DAYS, interval="15min", seed=CAMPUS_SEED)
    return topology, result


@pytest.fixture(scope="session")
def campus_models(campus):
    topology, result = campus
    return fit_campus(result.frame, topology, result.truth)


@pytest.fixture(scope="session")
def campus_cascade(campus, campus_models):
    topology, result = campus
    return run_cascade(result.frame, topology, campus_models)


@pytest.fixture(scope="session")
def campus_labels(campus):
    _, result = campus
    sp = result.frame.channel(SP)
    return label_days(sp, result.truth.schedule.lsp, result.truth.schedule.hsp)


@pytest.fixture
def zone_tables(campus_cascade):
    return {path: z.table for path, z in campus_cascade.zones.items()}


@pytest.fixture
def quarter_hour():
    return pd.Timedelta(minutes=15)
