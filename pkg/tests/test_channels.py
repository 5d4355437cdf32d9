import numpy as np
import pandas as pd
import pytest

from zonemeter.channels import (
    IAT,
    OAT,
    Q_B,
    V_Z,
    ChannelFrame,
    PointCatalog,
    PointDef,
    align_channels,
    frame_from_wide,
    normalize_timestamps,
)
from zonemeter.errors import InputError, MissingChannelError, UnknownPointError


def make_catalog():
    return PointCatalog(
        [
            PointDef("oat.1", OAT, "", "", "", "degC"),
            PointDef("b1.load", Q_B, "B1", "", "", "kW"),
            PointDef("z1.temp", IAT, "B1", "AHU1", "Z1", "degF"),
            PointDef("z1.flow", V_Z, "B1", "AHU1", "Z1", "cfm"),
        ]
    )


def test_catalog_rejects_unknown_variable():
    with pytest.raises(InputError):
        PointCatalog([PointDef("x", "pressure", "", "", "", "kPa")])


def test_catalog_rejects_duplicate_ids():
    p = PointDef("x", OAT, "", "", "", "degC")
    with pytest.raises(InputError):
        PointCatalog([p, p])


def test_catalog_lookup_unknown_point():
    cat = make_catalog()
    with pytest.raises(UnknownPointError):
        cat.get("nope")


def test_catalog_csv_round_trip(tmp_path):
    cat = make_catalog()
    p = tmp_path / "catalog.csv"
    cat.to_csv(p)
    back = PointCatalog.from_csv(p)
    assert {q.point_id for q in back.points()} == {q.point_id for q in cat.points()}
    assert back.get("z1.temp").unit == "degF"


def test_align_buckets_by_floor():
    cat = make_catalog()
    readings = [
        ("2021-06-22T00:03:00+00:00", "oat.1", 30.0),
        ("2021-06-22T00:07:00+00:00", "oat.1", 32.0),
        ("2021-06-22T00:16:00+00:00", "oat.1", 28.0),
    ]
    frame = align_channels(readings, cat, "15min")
    oat = frame.channel(OAT)
    assert oat.iloc[0] == 31.0  # mean of the two readings in the first bucket
    assert oat.iloc[1] == 28.0
    assert len(frame) == 2


def test_align_converts_units_before_averaging():
    cat = make_catalog()
    # 32 degF and 212 degF average to 50 degC, not to f->c of 122 degF
    readings = [
        ("2021-06-22T00:01:00+00:00", "z1.temp", 32.0),
        ("2021-06-22T00:02:00+00:00", "z1.temp", 212.0),
    ]
    frame = align_channels(readings, cat, "15min")
    assert frame.channel(IAT, "B1", "AHU1", "Z1").iloc[0] == 50.0


def test_align_converts_flow_units():
    cat = make_catalog()
    readings = [("2021-06-22T00:00:00+00:00", "z1.flow", 1000.0)]
    frame = align_channels(readings, cat, "15min")
    assert frame.channel(V_Z, "B1", "AHU1", "Z1").iloc[0] == 1000.0 * 4.719474e-4


def test_align_fills_gaps_with_nan():
    cat = make_catalog()
    readings = [
        ("2021-06-22T00:00:00+00:00", "oat.1", 30.0),
        ("2021-06-22T00:45:00+00:00", "oat.1", 31.0),
    ]
    frame = align_channels(readings, cat, "15min")
    assert len(frame) == 4
    oat = frame.channel(OAT)
    assert np.isnan(oat.iloc[1]) and np.isnan(oat.iloc[2])


def test_align_rejects_unknown_points():
    cat = make_catalog()
    with pytest.raises(UnknownPointError):
        align_channels([("2021-06-22T00:00:00+00:00", "mystery", 1.0)], cat, "15min")


def test_align_applies_temperature_sanity_bounds():
    cat = make_catalog()
    readings = [
        ("2021-06-22T00:00:00+00:00", "oat.1", 30.0),
        ("2021-06-22T00:15:00+00:00", "oat.1", 99.0),
    ]
    frame = align_channels(readings, cat, "15min")
    oat = frame.channel(OAT)
    assert oat.iloc[0] == 30.0
    assert np.isnan(oat.iloc[1])
    assert frame.flagged[(OAT, "", "", "")] == 1


def test_align_flags_negative_flow():
    cat = make_catalog()
    readings = [("2021-06-22T00:00:00+00:00", "z1.flow", -5.0)]
    frame = align_channels(readings, cat, "15min")
    assert np.isnan(frame.channel(V_Z, "B1", "AHU1", "Z1").iloc[0])


def test_align_keeps_negative_load_but_counts_it():
    cat = make_catalog()
    readings = [("2021-06-22T00:00:00+00:00", "b1.load", -2.0)]
    frame = align_channels(readings, cat, "15min")
    assert frame.channel(Q_B, "B1").iloc[0] == -2.0
    assert frame.flagged[(Q_B, "B1", "", "")] == 1


def test_align_empty_input():
    frame = align_channels([], make_catalog(), "15min")
    assert len(frame) == 0


def test_missing_channel_error_names_key():
    frame = align_channels(
        [("2021-06-22T00:00:00+00:00", "oat.1", 30.0)], make_catalog(), "15min"
    )
    with pytest.raises(MissingChannelError) as e:
        frame.channel(Q_B, "B9")
    assert "B9" in str(e.value)


def test_normalize_timestamps_applies_offset():
    idx = normalize_timestamps(["2021-06-22T05:00:00+05:00", "2021-06-22T00:15:00+00:00"])
    assert idx[0] == pd.Timestamp("2021-06-22T00:00:00")
    assert idx.tz is None


def test_frame_requires_increasing_index():
    cols = pd.MultiIndex.from_tuples([(OAT, "", "", "")])
    idx = pd.DatetimeIndex(["2021-06-22T01:00:00", "2021-06-22T00:00:00"])
    with pytest.raises(InputError):
        ChannelFrame(pd.DataFrame([[1.0], [2.0]], index=idx, columns=cols), pd.Timedelta("15min"))


def test_frame_requires_positive_interval():
    cols = pd.MultiIndex.from_tuples([(OAT, "", "", "")])
    with pytest.raises(InputError):
        ChannelFrame(
            pd.DataFrame(columns=cols, index=pd.DatetimeIndex([])), pd.Timedelta(0)
        )


def test_frame_from_wide_sanitizes():
    idx = pd.date_range("2021-06-22", periods=2, freq="15min")
    cols = pd.MultiIndex.from_tuples([(OAT, "", "", "")])
    wide = pd.DataFrame([[30.0], [500.0]], index=idx, columns=cols)
    frame = frame_from_wide(wide, pd.Timedelta("15min"))
    assert np.isnan(frame.channel(OAT).iloc[1])


def test_iter_readings_skips_missing():
    cat = make_catalog()
    readings = [
        ("2021-06-22T00:00:00+00:00", "oat.1", 30.0),
        ("2021-06-22T00:30:00+00:00", "oat.1", 31.0),
    ]
    frame = align_channels(readings, cat, "15min")
    out = list(frame.iter_readings())
    assert len(out) == 2
    assert out[0][1] == (OAT, "", "", "")
    assert out[0][2] == 30.0
