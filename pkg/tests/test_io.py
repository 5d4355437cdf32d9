import json
import math
import os

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zonemeter.channels import align_channels
from zonemeter.errors import InputError
from zonemeter.io import (
    format_float,
    format_timestamp,
    json_ready,
    read_commissioning_csv,
    read_json,
    read_models_json,
    read_readings_csv,
    read_zone_loads_csv,
    sha256_of,
    write_atomic,
    write_commissioning_csv,
    write_diagnostics_csv,
    write_json,
    write_models_json,
    write_readings_csv,
    write_thermal_csv,
    write_zone_loads_csv,
)
from zonemeter.simulate import simulate, synthetic_topology


@pytest.fixture(scope="module")
def mini_sim():
    topo = synthetic_topology(n_buildings=1, ahus_per_building=2, zones_per_ahu=2)
    return topo, simulate(topo, None, days=4, interval="15min", seed=6)


# --- primitive formatting ---------------------------------------------------


def test_format_float_is_exact():
    assert format_float(1.0) == "1.0"
    assert format_float(float("nan")) == ""
    assert float(format_float(0.1 + 0.2)) == 0.1 + 0.2


@given(st.floats(allow_nan=False, allow_infinity=False))
@settings(max_examples=300, deadline=None)
def test_format_float_round_trips(x):
    assert float(format_float(x)) == x


def test_format_timestamp_declares_utc():
    out = format_timestamp(pd.Timestamp("2021-06-22 00:15:00"))
    assert out == "2021-06-22T00:15:00+00:00"
    assert pd.Timestamp(out).tz is not None


def test_write_atomic_leaves_no_droppings(tmp_path):
    target = tmp_path / "sub" / "file.txt"
    write_atomic(target, "hello\n")
    assert target.read_text(encoding="utf-8") == "hello\n"
    write_atomic(target, "replaced\n")
    assert target.read_text(encoding="utf-8") == "replaced\n"
    assert os.listdir(target.parent) == ["file.txt"]


def test_json_io_round_trip(tmp_path):
    path = tmp_path / "x.json"
    write_json(path, {"a": 1, "b": [1.5, None]})
    assert read_json(path) == {"a": 1, "b": [1.5, None]}
    assert path.read_text(encoding="utf-8").endswith("\n")


def test_json_refuses_nan(tmp_path):
    with pytest.raises(ValueError):
        write_json(tmp_path / "bad.json", {"a": float("nan")})


def test_read_json_errors(tmp_path):
    with pytest.raises(InputError):
        read_json(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{", encoding="utf-8")
    with pytest.raises(InputError):
        read_json(bad)


def test_json_ready_strips_numpy():
    tree = {
        "f": np.float64(1.5),
        "i": np.int32(2),
        "b": np.bool_(True),
        "arr": np.arange(3.0),
        "nested": [np.float64(0.25)],
    }
    out = json_ready(tree)
    json.dumps(out)
    assert out == {"f": 1.5, "i": 2, "b": True, "arr": [0.0, 1.0, 2.0], "nested": [0.25]}


# --- readings round trip ----------------------------------------------------


def test_readings_round_trip_bit_exact(tmp_path, mini_sim):
    topo, result = mini_sim
    path = tmp_path / "data.csv"
    write_readings_csv(path, result.frame, result.catalog)
    long = read_readings_csv(path)
    assert list(long.columns) == ["timestamp", "point_id", "value"]
    back = align_channels(long, result.catalog, result.interval)
    pd.testing.assert_frame_equal(
        back.data.sort_index(axis=1),
        result.frame.data.sort_index(axis=1),
        check_exact=True,
        check_freq=False,
    )


def test_readings_reader_validates_columns(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("time,point,value\n", encoding="utf-8")
    with pytest.raises(InputError, match="lacks columns"):
        read_readings_csv(bad)


def test_readings_writer_requires_catalog_entry(tmp_path, mini_sim):
    from zonemeter.channels import PointCatalog

    topo, result = mini_sim
    with pytest.raises(InputError, match="no point for channel"):
        write_readings_csv(tmp_path / "x.csv", result.frame, PointCatalog([]))


# --- zone loads, commissioning, models --------------------------------------


def test_zone_loads_round_trip(tmp_path, mini_sim):
    _, result = mini_sim
    path = tmp_path / "loads.csv"
    write_zone_loads_csv(path, result.truth_loads)
    back = read_zone_loads_csv(path)
    assert sorted(back) == sorted(result.truth_loads)
    for zone_id, t in result.truth_loads.items():
        pd.testing.assert_frame_equal(back[zone_id], t, check_exact=True, check_freq=False)


def test_zone_loads_preserve_nan(tmp_path, mini_sim):
    _, result = mini_sim
    path = next(iter(result.truth_loads))
    table = result.truth_loads[path].copy()
    table.iloc[0, 0] = float("nan")
    out = tmp_path / "loads.csv"
    write_zone_loads_csv(out, {path: table})
    first_row = out.read_text(encoding="utf-8").splitlines()[1]
    assert first_row.split(",")[2] == ""
    back = read_zone_loads_csv(out)
    assert math.isnan(back[path].iloc[0, 0])


def test_commissioning_round_trip(tmp_path, mini_sim):
    _, result = mini_sim
    path = tmp_path / "comm.csv"
    write_commissioning_csv(path, result.commissioning)
    back = read_commissioning_csv(path)
    pd.testing.assert_frame_equal(back, result.commissioning, check_exact=True)


def test_models_round_trip(tmp_path, campus_models):
    path = tmp_path / "models.json"
    write_models_json(path, campus_models)
    back = read_models_json(path)
    for key, fit in campus_models.fresh_air.items():
        assert back.fresh_air[key].k == fit.k
        assert back.fresh_air[key].alpha == fit.alpha
        assert back.fresh_air[key].r2 == fit.r2
    for key, fit in campus_models.buildings.items():
        assert back.buildings[key].l == fit.l
        assert back.buildings[key].beta == fit.beta
    for key, fan in campus_models.fans.items():
        assert back.fans[key].coefficients == fan.coefficients


def test_models_reader_rejects_garbage(tmp_path):
    path = tmp_path / "models.json"
    write_json(path, {"air": {}})
    with pytest.raises(InputError, match="malformed"):
        read_models_json(path)


# --- diagnostics and thermal writers ----------------------------------------


def test_diagnostics_csv_shape(tmp_path):
    idx = pd.date_range("2021-06-22", periods=3, freq="15min")
    table = pd.DataFrame(
        {
            "residual_kw": [0.5, float("nan"), -0.25],
            "cop": [4.5, 4.4, float("nan")],
            "coverage_flags": ["", "missing_inputs", "cop_low"],
        },
        index=idx,
    )
    path = tmp_path / "diag.csv"
    write_diagnostics_csv(path, {"B1": table})
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "timestamp,building_id,residual_kw,cop,coverage_flags"
    assert len(lines) == 4
    assert lines[2].split(",")[2] == ""
    assert lines[3].endswith("cop_low")


def test_thermal_csv_shape(tmp_path):
    table = pd.DataFrame(
        [
            {
                "zone_id": "B1/AHU1/Z01",
                "mean_iat_lsp_c": 22.5,
                "mean_iat_hsp_c": 23.25,
                "delta_t_c": 0.75,
                "overcooling_c": 0.5,
            }
        ]
    )
    path = tmp_path / "thermal.csv"
    write_thermal_csv(path, table)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("zone_id,mean_iat_lsp_c")
    assert lines[1] == "B1/AHU1/Z01,22.5,23.25,0.75,0.5"


# --- hashing ----------------------------------------------------------------


def test_sha256_tracks_content(tmp_path):
    a = tmp_path / "a.txt"
    a.write_text("one", encoding="utf-8")
    first = sha256_of(a)
    assert first == sha256_of(a)
    a.write_text("two", encoding="utf-8")
    assert sha256_of(a) != first
