import numpy as np
import pandas as pd
import pytest

from zonemeter.channels import DAT, IAT, MAT, OAT, P_D, Q_B, Q_D, SP, V_Z, ChannelFrame
from zonemeter.disaggregate import (
    FLAG_COP_LOW,
    district_cop,
    run_cascade,
    zone_equivalent_building,
    zone_equivalent_coil,
    zone_fan_power,
    zone_total_electrical,
)
from zonemeter.errors import ModelMismatchError
from zonemeter.regression import FittedModels
from zonemeter.thermo import ahu_load_series
from zonemeter.topology import (
    SEP,
    AhuNode,
    AirProperties,
    BuildingNode,
    Topology,
    ZoneNode,
)

AIR = AirProperties()


# --- scalar steps -----------------------------------------------------------


def test_equivalent_coil_fixture():
    q_z = 6.05612
    out = zone_equivalent_coil(AIR, q_z, 0.5, 0.3, -0.5, 30.0, 23.0)
    assert out == pytest.approx(7.0250992, rel=1e-12)


def test_equivalent_coil_no_adjustment():
    assert zone_equivalent_coil(AIR, 4.2, 0.5, 0.0, 0.0, 30.0, 23.0) == 4.2


def test_equivalent_coil_zero_flow():
    assert zone_equivalent_coil(AIR, 0.0, 0.0, 0.3, -0.5, 30.0, 23.0) == 0.0


def test_equivalent_building_identity_plant():
    assert zone_equivalent_building(1.0, 0.0, 5.5, 0.25, 0.5) == 5.5


def test_equivalent_building_full_allocation():
    # one zone behind one AHU receives the whole intercept
    assert zone_equivalent_building(1.2, 30.0, 10.0, 1.0, 1.0) == pytest.approx(42.0, rel=1e-12)


def test_fan_power_share_symmetry():
    shares = [zone_fan_power(1.0, 4.0, 20.0) for _ in range(4)]
    assert all(s == 5.0 for s in shares)
    assert sum(shares) == 20.0


def test_fan_power_single_zone():
    assert zone_fan_power(2.5, 2.5, 18.0) == 18.0


def test_fan_power_monotone_in_zone_flow():
    p = 20.0
    v_c = 10.0
    prev = -1.0
    for v_z in np.linspace(0, 10, 11):
        share = zone_fan_power(v_z, v_c, p)
        assert share >= prev
        prev = share


def test_total_electrical_arithmetic():
    assert zone_total_electrical(10.0, 5.0, 2.0) == 4.0


def test_total_electrical_high_cop_limit():
    assert zone_total_electrical(10.0, 1e9, 2.0) == pytest.approx(2.0, abs=1e-6)


def test_district_cop_division():
    idx = pd.date_range("2021-06-22", periods=3, freq="15min")
    q_d = pd.Series([3000.0, 0.0, 2500.0], index=idx)
    p_d = pd.Series([600.0, 500.0, 0.0], index=idx)
    cop, idle = district_cop(q_d, p_d)
    assert cop.iloc[0] == 5.0
    assert cop.iloc[1] == 0.0  # zero cooling on live power is a valid ratio
    assert np.isnan(cop.iloc[2]) and idle.iloc[2]


def test_district_cop_floor_masks_trickle():
    idx = pd.date_range("2021-06-22", periods=4, freq="15min")
    q_d = pd.Series([3000.0, 3000.0, 10.0, 3000.0], index=idx)
    p_d = pd.Series([600.0, 620.0, 1.0, 610.0], index=idx)
    cop, idle = district_cop(q_d, p_d, floor_fraction=0.01)
    # 1 kW is below 1% of the median positive draw (~6.1 kW)
    assert idle.iloc[2]
    assert np.isnan(cop.iloc[2])
    assert not idle.iloc[0]


# --- cascade ----------------------------------------------------------------


def test_cascade_matches_simulator_truth(campus, campus_cascade):
    _, result = campus
    for path, truth_table in result.truth_loads.items():
        est = campus_cascade.zones[path].table
        for col in ["q_z_kw", "q_ec_kw", "q_eb_kw", "p_fan_kw", "p_total_kw"]:
            t = truth_table[col].to_numpy()
            e = est[col].to_numpy()
            assert np.allclose(e, t, rtol=1e-6, atol=1e-9), (path, col)


def test_cascade_full_coverage_on_clean_data(campus_cascade):
    for z in campus_cascade.zones.values():
        assert z.coverage == 1.0


def test_cascade_beta_allocation_conserved(campus, campus_models, campus_cascade):
    """Zone equivalent-building loads sum to the predicted building load."""
    topology, result = campus
    for building in topology.buildings:
        bmodel = campus_models.buildings[building.id]
        coil_sum = None
        for ahu in building.ahus:
            s = ahu_load_series(result.frame, building.id, ahu, AIR)
            coil_sum = s.q_c if coil_sum is None else coil_sum + s.q_c
        zone_sum = None
        q_ec_sum = None
        for ahu in building.ahus:
            for zone in ahu.zones:
                t = campus_cascade.zone(building.id, ahu.id, zone.id).table
                zone_sum = t["q_eb_kw"] if zone_sum is None else zone_sum + t["q_eb_kw"]
                q_ec_sum = t["q_ec_kw"] if q_ec_sum is None else q_ec_sum + t["q_ec_kw"]
        predicted = bmodel.l * q_ec_sum + bmodel.beta
        ok = zone_sum.notna()
        assert ok.all()
        assert np.allclose(zone_sum[ok], predicted[ok], rtol=1e-9)


def test_cascade_fan_allocation_conserved(campus, campus_models, campus_cascade):
    topology, result = campus
    from zonemeter.disaggregate import fan_power_kw

    for building in topology.buildings:
        for ahu in building.ahus:
            s = ahu_load_series(result.frame, building.id, ahu, AIR)
            p_fan, _ = fan_power_kw(campus_models.fan_for(building.id, ahu.id), s.v_c)
            share_sum = None
            for zone in ahu.zones:
                t = campus_cascade.zone(building.id, ahu.id, zone.id).table
                share_sum = (
                    t["p_fan_kw"] if share_sum is None else share_sum + t["p_fan_kw"]
                )
            live = s.v_c > 0
            assert np.allclose(share_sum[live], p_fan[live], rtol=1e-9)


def test_cascade_residual_unallocated(campus, campus_models, campus_cascade):
    """The diagnostic residual is the gap to the measured meter, near zero here."""
    topology, result = campus
    for building in topology.buildings:
        diag = campus_cascade.diagnostics[building.id]
        assert np.nanmax(np.abs(diag["residual_kw"].to_numpy())) < 1e-6


def test_cascade_missing_model_raises(campus, campus_models):
    topology, result = campus
    pruned = FittedModels(
        air=campus_models.air,
        fresh_air=campus_models.fresh_air,
        buildings={},
        fans=campus_models.fans,
    )
    with pytest.raises(ModelMismatchError):
        run_cascade(result.frame, topology, pruned)


def twin_zone_setup():
    """One AHU with two zones trending identical measurements."""
    topo = Topology(
        buildings=(
            BuildingNode(
                id="B1",
                ahus=(
                    AhuNode(
                        id="A1",
                        fan_rated_flow=4.0,
                        fan_rated_power=10.0,
                        zones=(ZoneNode(id="Z1"), ZoneNode(id="Z2")),
                    ),
                ),
            ),
        )
    )
    n = 96
    idx = pd.date_range("2021-06-22", periods=n, freq="15min")
    rng = np.random.default_rng(3)
    iat = 23.0 + 0.5 * np.sin(np.linspace(0, 6, n))
    flow = 1.0 + 0.4 * rng.random(n)
    dat = np.full(n, 13.0)
    oat = 30.0 + 2 * np.sin(np.linspace(0, 3, n))
    rat = iat  # both zones identical so the mix equals the zone temperature
    k, alpha = 0.3, -0.4
    mat = k * oat + (1 - k) * rat + alpha
    v_c = 2 * flow
    q_c = AIR.cp_rho * v_c * (mat - dat)
    l, beta = 1.2, 25.0
    cols = {
        (OAT, "", "", ""): oat,
        (SP, "", "", ""): np.full(n, 23.3),
        (Q_D, "", "", ""): np.full(n, 3000.0),
        (P_D, "", "", ""): np.full(n, 600.0),
        (Q_B, "B1", "", ""): l * q_c + beta,
        (MAT, "B1", "A1", ""): mat,
        (DAT, "B1", "A1", ""): dat,
        (IAT, "B1", "A1", "Z1"): iat,
        (IAT, "B1", "A1", "Z2"): iat,
        (V_Z, "B1", "A1", "Z1"): flow,
        (V_Z, "B1", "A1", "Z2"): flow,
    }
    wide = pd.DataFrame(cols, index=idx)
    wide.columns = pd.MultiIndex.from_tuples(wide.columns)
    frame = ChannelFrame(wide, pd.Timedelta("15min"))
    return topo, frame


def test_cascade_identical_zones_identical_outputs(campus_models):
    topo, frame = twin_zone_setup()
    from zonemeter.regression import fit_building, fit_fan, fit_fresh_air
    from zonemeter.thermo import pick_rat

    ahu = topo.buildings[0].ahus[0]
    series = ahu_load_series(frame, "B1", ahu, AIR)
    rat = pick_rat(frame, "B1", ahu, series.rat)
    fa = fit_fresh_air(frame, "B1", "A1", series, rat, AIR)
    bm = fit_building(frame, "B1", series.q_c)
    flows = np.linspace(0.5, 4.5, 8)
    fan = fit_fan("B1", "A1", flows, 2.0 + 0.5 * flows, "m3/s", "kW")
    models = FittedModels(
        air=AIR,
        fresh_air={f"B1{SEP}A1": fa},
        buildings={"B1": bm},
        fans={f"B1{SEP}A1": fan},
    )
    cascade = run_cascade(frame, topo, models)
    t1 = cascade.zone("B1", "A1", "Z1").table
    t2 = cascade.zone("B1", "A1", "Z2").table
    pd.testing.assert_frame_equal(t1, t2)


def test_cascade_flags_low_cop(campus, campus_models):
    topology, result = campus
    data = result.frame.data.copy()
    # squash the plant efficiency below the sanity band at one timestamp
    data.loc[data.index[10], (Q_D, "", "", "")] = 100.0
    data.loc[data.index[10], (P_D, "", "", "")] = 600.0
    frame = ChannelFrame(data, result.frame.interval)
    cascade = run_cascade(frame, topology, campus_models)
    assert cascade.flags.get(FLAG_COP_LOW, 0) >= 1
    diag = cascade.diagnostics[topology.buildings[0].id]
    assert FLAG_COP_LOW in diag["coverage_flags"].iloc[10]


def test_cascade_missing_inputs_lower_coverage(campus, campus_models):
    topology, result = campus
    b = topology.buildings[0]
    ahu = b.ahus[0]
    zone = ahu.zones[0]
    data = result.frame.data.copy()
    data.loc[data.index[:10], (IAT, b.id, ahu.id, zone.id)] = np.nan
    frame = ChannelFrame(data, result.frame.interval)
    cascade = run_cascade(frame, topology, campus_models)
    z = cascade.zone(b.id, ahu.id, zone.id)
    assert z.coverage < 1.0
    assert np.isnan(z.table["p_total_kw"].iloc[0])
    # sibling zone unaffected except through the AHU aggregates
    assert cascade.flags.get("missing_inputs", 0) >= 10


def test_cascade_zone_table_long_format(campus_cascade):
    table = campus_cascade.zone_table()
    n_zones = len(campus_cascade.zones)
    n_ts = len(next(iter(campus_cascade.zones.values())).table)
    assert len(table) == n_zones * n_ts
    assert list(table.columns) == [
        "zone_id",
        "q_z_kw",
        "q_ec_kw",
        "q_eb_kw",
        "p_fan_kw",
        "p_total_kw",
    ]
    assert table["zone_id"].is_monotonic_increasing
