"""Pipeline stages shared by the command line and the HTTP service.

Each stage is a pure function of (config, files on disk) that writes
its artifacts atomically and returns a small summary dict. Keeping the
stages here means every front end produces identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

from . import charts, io
from .channels import IAT, SP, ChannelFrame, PointCatalog, align_channels
from .config import RunConfig
from .disaggregate import CascadeResult, run_cascade
from .errors import InsufficientDataError, InputError
from .flexmetrics import flexibility_report, thermal_impact_table
from .regimes import OperatingHours, label_days, operating_mask
from .regression import (
    FittedModels,
    fit_building,
    fit_fan,
    fit_fresh_air,
    scale_fan_model,
)
from .simulate import default_truth, simulate, synthetic_topology
from .thermo import ahu_load_series, pick_rat
from .topology import SEP, Topology, load_topology, topology_to_dict


def _out(config: RunConfig, name: str) -> Path:
    return Path(config.paths.out_dir) / name


def _hours(config: RunConfig) -> OperatingHours:
    w = config.window
    return OperatingHours(w.start_hour, w.end_hour, w.weekdays_only)


def load_inputs(config: RunConfig):
    """Reads and aligns the measured channels named in the config."""
    paths = config.require_paths("data", "catalog", "topology")
    catalog = PointCatalog.from_csv(paths["catalog"])
    topology = load_topology(paths["topology"])
    readings = io.read_readings_csv(paths["data"])
    frame = align_channels(readings, catalog, config.interval)
    if len(frame) == 0:
        raise InputError(f"{paths['data']} contains no usable readings")
    return frame, topology, catalog


def run_simulate(config: RunConfig) -> dict:
    """Generates a synthetic campus dataset under the configured seed."""
    sim = config.simulate
    topology = synthetic_topology(
        sim.buildings, sim.ahus_per_building, sim.zones_per_ahu
    )
    truth = default_truth(topology, sim.seed, noise=sim.noise)
    truth.district_base = sim.district_base_kw
    truth.schedule = type(truth.schedule)(
        lsp=config.experiment.lsp_c, hsp=config.experiment.hsp_c
    )
    result = simulate(
        topology, truth, sim.days, config.interval, sim.seed, start=sim.start
    )

    data_path = _out(config, "data.csv")
    catalog_path = _out(config, "catalog.csv")
    topology_path = _out(config, "topology.json")
    io.write_readings_csv(data_path, result.frame, result.catalog)
    io.write_atomic(catalog_path, _catalog_csv(result.catalog))
    io.write_json(topology_path, topology_to_dict(topology))
    io.write_json(_out(config, "truth.json"), result.truth.to_dict())
    io.write_zone_loads_csv(_out(config, "truth_loads.csv"), result.truth_loads)
    io.write_commissioning_csv(_out(config, "commissioning.csv"), result.commissioning)
    return {
        "data": str(data_path),
        "catalog": str(catalog_path),
        "topology": str(topology_path),
        "truth": str(_out(config, "truth.json")),
        "truth_loads": str(_out(config, "truth_loads.csv")),
        "commissioning": str(_out(config, "commissioning.csv")),
        "days": sim.days,
        "zones": topology.n_zones,
        "timestamps": len(result.frame),
        "seed": sim.seed,
    }


def _catalog_csv(catalog: PointCatalog) -> str:
    lines = ["point_id,building,ahu,zone,variable,unit"]
    for p in catalog.points():
        lines.append(f"{p.point_id},{p.building},{p.ahu},{p.zone},{p.variable},{p.unit}")
    return "\n".join(lines) + "\n"


def _fit_fans(config: RunConfig, topology: Topology) -> dict:
    """Commissioned fits first, then donor scaling for the rest."""
    fans = {}
    if config.paths.commissioning is not None:
        table = io.read_commissioning_csv(config.require_paths("commissioning")["commissioning"])
        for (b, a), group in table.groupby(["building", "ahu"], sort=True):
            units = group[["flow_unit", "power_unit"]].drop_duplicates()
            if len(units) != 1:
                raise InputError(f"mixed units in commissioning points for {b}{SEP}{a}")
            fans[f"{b}{SEP}{a}"] = fit_fan(
                b,
                a,
                group["flow"].to_numpy(),
                group["power"].to_numpy(),
                str(group["flow_unit"].iloc[0]),
                str(group["power_unit"].iloc[0]),
            )

    rated = {
        f"{b.id}{SEP}{ahu.id}": ahu.fan_rated_power for b, ahu in topology.iter_ahus()
    }
    commissioned = dict(fans)
    for building, ahu in topology.iter_ahus():
        path = f"{building.id}{SEP}{ahu.id}"
        if path in fans:
            continue
        donor_path = config.fit.donors.get(path)
        if donor_path is None:
            if not commissioned:
                raise InsufficientDataError(
                    f"{path}: no commissioning points and no donor fan available"
                )
            donor_path = min(
                sorted(commissioned),
                key=lambda p: abs(rated[p] - rated[path]),
            )
        donor = commissioned.get(donor_path)
        if donor is None:
            raise InputError(f"{path}: configured donor {donor_path} has no fitted curve")
        fans[path] = scale_fan_model(
            donor, building.id, ahu.id, rated[donor_path], rated[path]
        )
    return fans


def run_fit(config: RunConfig) -> dict:
    """Identifies fresh-air, building, and fan models from the data."""
    frame, topology, _ = load_inputs(config)
    air = config.air.properties()
    hours = _hours(config)

    fresh_air = {}
    buildings = {}
    for building in topology.buildings:
        coil_sum = None
        for ahu in building.ahus:
            series = ahu_load_series(frame, building.id, ahu, air)
            rat = pick_rat(frame, building.id, ahu, series.rat)
            mask = operating_mask(
                frame.timestamps, hours, series.v_c, config.fit.flow_threshold_m3s
            )
            model = fit_fresh_air(
                frame,
                building.id,
                ahu.id,
                series,
                rat,
                air,
                mask=mask,
                min_obs=config.fit.min_obs,
            )
            fresh_air[model.path] = model
            coil_sum = series.q_c if coil_sum is None else coil_sum + series.q_c
        bmask = None
        if not config.fit.building_all_hours:
            bmask = _hours(config).mask(frame.timestamps)
        buildings[building.id] = fit_building(
            frame, building.id, coil_sum, mask=bmask, min_obs=config.fit.min_obs
        )

    fans = _fit_fans(config, topology)
    models = FittedModels(air=air, fresh_air=fresh_air, buildings=buildings, fans=fans)
    models.check_topology(topology)

    models_path = _out(config, "models.json")
    io.write_models_json(models_path, models)
    report = fit_report_text(models)
    io.write_atomic(_out(config, "fit_report.txt"), report)
    return {
        "models": str(models_path),
        "fit_report": str(_out(config, "fit_report.txt")),
        "n_fresh_air": len(fresh_air),
        "n_buildings": len(buildings),
        "n_fans": len(fans),
        "report_text": report,
    }


def fit_report_text(models: FittedModels) -> str:
    """Regression tables in the familiar value / std err / p-value layout."""
    lines = []

    def table(title, rows, stats):
        lines.append(title)
        lines.append(f"  {stats}")
        lines.append(f"  {'':<14}{'Value':>14}{'Std. Err':>14}{'P-Value':>12}")
        for name, value, se, p in rows:
            lines.append(f"  {name:<14}{value:>14.6g}{se:>14.3g}{p:>12.3g}")
        lines.append("")

    for path in sorted(models.fresh_air):
        m = models.fresh_air[path]
        note = "" if m.k_plausible else "  [warning: k outside [0, 1]]"
        table(
            f"fresh-air model {path}{note}",
            [
                ("Intercept", m.alpha, m.std_err["alpha"], m.p_values["alpha"]),
                ("Slope (k)", m.k, m.std_err["k"], m.p_values["k"]),
            ],
            f"n_obs {m.n_obs}   r2 {m.r2:.4f}   F p-value {m.f_statistic_p:.3g}",
        )
    for b in sorted(models.buildings):
        m = models.buildings[b]
        table(
            f"building model {b}",
            [
                ("Intercept", m.beta, m.std_err["beta"], m.p_values["beta"]),
                ("Slope (l)", m.l, m.std_err["l"], m.p_values["l"]),
            ],
            f"n_obs {m.n_obs}   r2 {m.r2:.4f}   F p-value {m.f_statistic_p:.3g}",
        )
    for path in sorted(models.fans):
        m = models.fans[path]
        src = f"  [scaled from {m.donor_id}]" if m.donor_id else ""
        lines.append(f"fan model {path}{src}")
        lines.append(
            f"  a0 {m.a0:.6g}  a1 {m.a1:.6g}  a2 {m.a2:.6g}  a3 {m.a3:.6g}"
        )
        lines.append(
            f"  flow in {m.flow_unit}, power in {m.power_unit}, "
            f"fitted over [{m.flow_range[0]:.6g}, {m.flow_range[1]:.6g}], r2 {m.r2:.4f}"
        )
        lines.append("")
    return "\n".join(lines)


def run_disaggregate(config: RunConfig) -> dict:
    """Applies fitted models and writes the per-zone load series."""
    frame, topology, _ = load_inputs(config)
    models_path = (
        Path(config.paths.models)
        if config.paths.models is not None
        else _out(config, "models.json")
    )
    if not models_path.exists():
        raise InputError(f"fitted models not found at {models_path}; run fit first")
    models = io.read_models_json(models_path)
    cascade = run_cascade(frame, topology, models)

    loads_path = _out(config, "zone_loads.csv")
    diag_path = _out(config, "diagnostics.csv")
    io.write_zone_loads_csv(loads_path, {p: z.table for p, z in cascade.zones.items()})
    io.write_diagnostics_csv(diag_path, cascade.diagnostics)

    coverages = {p: z.coverage for p, z in cascade.zones.items()}
    return {
        "zone_loads": str(loads_path),
        "diagnostics": str(diag_path),
        "n_zones": len(cascade.zones),
        "timestamps": len(frame),
        "mean_coverage": float(np.mean(list(coverages.values()))),
        "min_coverage": float(np.min(list(coverages.values()))),
        "flags": dict(sorted(cascade.flags.items())),
    }


def run_report(config: RunConfig) -> dict:
    """Builds the flexibility report, thermal table, and charts."""
    frame, topology, _ = load_inputs(config)
    loads_path = _out(config, "zone_loads.csv")
    if not loads_path.exists():
        raise InputError(f"zone loads not found at {loads_path}; run disaggregate first")
    zone_tables = io.read_zone_loads_csv(loads_path)

    sp = frame.channel(SP)
    labels = label_days(sp, config.experiment.lsp_c, config.experiment.hsp_c)
    hours = _hours(config)
    m = config.metrics
    report = flexibility_report(
        zone_tables,
        config.interval,
        topology,
        labels,
        hours,
        coverage_threshold=m.coverage_threshold,
        top_fraction=m.top_fraction,
        zone_window=m.zone_window,
        building_window=m.building_window,
    )
    thermal = thermal_impact_table(frame, topology, labels, config.experiment.lsp_c, hours)

    report_path = _out(config, "report.json")
    thermal_path = _out(config, "thermal.csv")
    io.write_json(report_path, io.json_ready(report))
    io.write_thermal_csv(thermal_path, thermal)

    svg_paths = _write_charts(config, report, thermal)
    return {
        "report": str(report_path),
        "thermal": str(thermal_path),
        "charts": svg_paths,
        "n_buildings": len(report["buildings"]),
        "n_ahus": len(report["ahus"]),
        "n_zones": len(report["zones"]),
    }


def _write_charts(config: RunConfig, report: dict, thermal: pd.DataFrame) -> list:
    paths = []

    def emit(name, svg):
        p = _out(config, name)
        io.write_atomic(p, svg)
        paths.append(str(p))

    zone_rows = report["zones"]
    for b in report["buildings"]:
        slug = b["id"].replace(SEP, "_")
        emit(
            f"lorenz_{slug}.svg",
            charts.lorenz_chart(
                {"energy use": b["lorenz_eu"], "flexibility": b["lorenz_ef"]},
                f"Cumulative zone shares, {b['id']}",
            ),
        )
        members = [z for z in zone_rows if z["id"].startswith(b["id"] + SEP)]
        total_use = sum(max(z["e_lsp_kwh"], 0.0) for z in members) or 1.0
        emit(
            f"shares_{slug}.svg",
            charts.share_heatmap(
                [z["id"] for z in members],
                [max(z["e_lsp_kwh"], 0.0) / total_use for z in members],
                [z["efs"] for z in members],
                f"Zone shares of use and flexibility, {b['id']}",
            ),
        )
    emit(
        "ef_zones.svg",
        charts.bar_chart(
            [z["id"] for z in zone_rows],
            [z["ef"] for z in zone_rows],
            "Zone energy flexibility",
            "EF",
        ),
    )
    emit(
        "delta_t.svg",
        charts.histogram_chart(
            list(thermal["delta_t_c"]),
            "Indoor temperature increase on high set-point days",
            "delta T (degC)",
        ),
    )
    return paths


def run_pipeline(config: RunConfig) -> dict:
    """simulate, fit, disaggregate, and report in one pass.

    The simulated artifacts are re-read from disk by the later stages,
    exercising the same file interfaces as separate invocations.
    """
    sim_summary = run_simulate(config)
    chained = config.model_copy(deep=True)
    chained.paths.data = sim_summary["data"]
    chained.paths.catalog = sim_summary["catalog"]
    chained.paths.topology = sim_summary["topology"]
    chained.paths.commissioning = sim_summary["commissioning"]
    chained.paths.models = None
    fit_summary = run_fit(chained)
    fit_summary = {k: v for k, v in fit_summary.items() if k != "report_text"}
    disagg_summary = run_disaggregate(chained)
    report_summary = run_report(chained)
    return {
        "simulate": sim_summary,
        "fit": fit_summary,
        "disaggregate": disagg_summary,
        "report": report_summary,
    }
