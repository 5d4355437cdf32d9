"""File formats and atomic writers for every pipeline artifact.

Floats are written with repr, the shortest decimal form that parses
back to the identical value, so emitted files both round-trip exactly
and stay byte-stable across runs.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd

from .channels import ChannelFrame, PointCatalog, normalize_timestamps
from .errors import InputError
from .regression import FittedModels

CSV_EOL = "\n"


def format_float(v) -> str:
    """Shortest exact decimal form; empty string for missing values."""
    v = float(v)
    if math.isnan(v):
        return ""
    return repr(v)


def format_timestamp(ts) -> str:
    """Naive internal timestamps are declared UTC on the way out."""
    return pd.Timestamp(ts).isoformat() + "+00:00"


def write_atomic(path, content: str) -> None:
    """Writes via a temp file and rename so readers never see a torn file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_json(path, obj) -> None:
    write_atomic(path, json.dumps(obj, indent=2, allow_nan=False) + "\n")


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}") from e


def _csv_lines(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return CSV_EOL.join(lines) + CSV_EOL


def read_readings_csv(path) -> pd.DataFrame:
    """Long-format readings: timestamp, point_id, value."""
    try:
        df = pd.read_csv(
            path,
            dtype={"point_id": str},
            keep_default_na=False,
            float_precision="round_trip",
        )
    except (pd.errors.EmptyDataError, pd.errors.ParserError, OSError) as e:
        raise InputError(f"cannot parse readings CSV {path}: {e}") from e
    missing = {"timestamp", "point_id", "value"} - set(df.columns)
    if missing:
        raise InputError(f"readings CSV {path} lacks columns {sorted(missing)}")
    return df


def write_readings_csv(path, frame: ChannelFrame, catalog: PointCatalog) -> None:
    """Emits a frame back to long format using the catalog's point ids.

    Values leave in each point's catalog unit; the frame stores
    canonical units, so only identity-unit catalogs (the simulator's)
    survive a bit-exact round-trip.
    """
    by_key = {}
    for p in catalog.points():
        by_key[p.key] = p
    rows = []
    for ts, key, value in frame.iter_readings():
        point = by_key.get(key)
        if point is None:
            raise InputError(f"catalog has no point for channel {key}")
        rows.append((format_timestamp(ts), point.point_id, format_float(value)))
    write_atomic(path, _csv_lines(["timestamp", "point_id", "value"], rows))


ZONE_LOAD_COLUMNS = ["q_z_kw", "q_ec_kw", "q_eb_kw", "p_fan_kw", "p_total_kw"]


def write_zone_loads_csv(path, tables: dict) -> None:
    """Per-zone load series; tables maps zone path -> DataFrame."""
    rows = []
    for zone_id in sorted(tables):
        t = tables[zone_id]
        for ts, row in zip(t.index, t.to_numpy()):
            rows.append(
                (format_timestamp(ts), zone_id) + tuple(format_float(v) for v in row)
            )
    write_atomic(path, _csv_lines(["timestamp", "zone_id"] + ZONE_LOAD_COLUMNS, rows))


def read_zone_loads_csv(path) -> dict:
    """Reads the zone-load table back into per-zone DataFrames."""
    try:
        df = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.EmptyDataError, pd.errors.ParserError, OSError) as e:
        raise InputError(f"cannot parse zone loads CSV {path}: {e}") from e
    missing = {"timestamp", "zone_id", *ZONE_LOAD_COLUMNS} - set(df.columns)
    if missing:
        raise InputError(f"zone loads CSV {path} lacks columns {sorted(missing)}")
    df["timestamp"] = normalize_timestamps(df["timestamp"])
    out = {}
    for zone_id, group in df.groupby("zone_id", sort=True):
        t = group.set_index("timestamp")[ZONE_LOAD_COLUMNS]
        t.index.name = None
        out[str(zone_id)] = t
    return out


def write_diagnostics_csv(path, diagnostics: dict) -> None:
    """Per-building residual/COP/flag rows, buildings interleaved by id."""
    rows = []
    for building_id in sorted(diagnostics):
        t = diagnostics[building_id]
        for ts, residual, cop, flags in zip(
            t.index, t["residual_kw"], t["cop"], t["coverage_flags"]
        ):
            rows.append(
                (
                    format_timestamp(ts),
                    building_id,
                    format_float(residual),
                    format_float(cop),
                    flags,
                )
            )
    write_atomic(
        path,
        _csv_lines(["timestamp", "building_id", "residual_kw", "cop", "coverage_flags"], rows),
    )


def write_thermal_csv(path, table: pd.DataFrame) -> None:
    rows = []
    for _, r in table.iterrows():
        rows.append(
            (
                str(r["zone_id"]),
                format_float(r["mean_iat_lsp_c"]),
                format_float(r["mean_iat_hsp_c"]),
                format_float(r["delta_t_c"]),
                format_float(r["overcooling_c"]),
            )
        )
    write_atomic(
        path,
        _csv_lines(
            ["zone_id", "mean_iat_lsp_c", "mean_iat_hsp_c", "delta_t_c", "overcooling_c"], rows
        ),
    )


def write_models_json(path, models: FittedModels) -> None:
    write_json(path, models.to_dict())


def read_models_json(path) -> FittedModels:
    raw = read_json(path)
    try:
        return FittedModels.from_dict(raw)
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"models file {path} is malformed: {e}") from e


def write_commissioning_csv(path, table: pd.DataFrame) -> None:
    rows = []
    for _, r in table.iterrows():
        rows.append(
            (
                str(r["building"]),
                str(r["ahu"]),
                format_float(r["flow"]),
                format_float(r["power"]),
                str(r["flow_unit"]),
                str(r["power_unit"]),
            )
        )
    write_atomic(
        path,
        _csv_lines(["building", "ahu", "flow", "power", "flow_unit", "power_unit"], rows),
    )


def read_commissioning_csv(path) -> pd.DataFrame:
    try:
        df = pd.read_csv(
            path, dtype={"building": str, "ahu": str}, float_precision="round_trip"
        )
    except (pd.errors.EmptyDataError, pd.errors.ParserError, OSError) as e:
        raise InputError(f"cannot parse commissioning CSV {path}: {e}") from e
    required = {"building", "ahu", "flow", "power", "flow_unit", "power_unit"}
    missing = required - set(df.columns)
    if missing:
        raise InputError(f"commissioning CSV {path} lacks columns {sorted(missing)}")
    return df


def sha256_of(path) -> str:
    import hashlib

    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def json_ready(obj):
    """Recursively converts numpy scalars so json.dumps accepts the tree."""
    if isinstance(obj, dict):
        return {k: json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [json_ready(v) for v in obj.tolist()]
    return obj
