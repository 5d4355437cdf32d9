"""Least-squares identification of the three calibration models.

Three regressions turn trend data into a usable meter:

* a fresh-air model per AHU relating the unexplained coil load to the
  outdoor/return temperature difference,
* a building closure model relating the metered building load to the
  summed coil loads,
* a cubic fan curve per AHU from commissioning points, with scaling
  from a donor AHU when a unit has no commissioning data of its own.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import stats
from scipy.linalg import solve_triangular

from .channels import OAT, Q_B, ChannelFrame
from .errors import (
    ConfigError,
    InsufficientDataError,
    ModelMismatchError,
    SingularFitError,
)
from .thermo import AhuSeries
from .topology import SEP, AirProperties, Topology

# slope outside this band flags the fresh-air fit as physically suspect
K_PLAUSIBLE = (0.0, 1.0)

MIN_FAN_POINTS = 5


@dataclass
class OlsFit:
    """Ordinary least squares result with the usual inference stats."""

    coef: np.ndarray
    std_err: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    r2: float
    f_statistic: float
    f_p_value: float
    n_obs: int
    residuals: np.ndarray = field(repr=False)


def ols(design: np.ndarray, y: np.ndarray) -> OlsFit:
    """Fits y = design @ coef + eps.

    Columns are equilibrated before the QR factorization so wildly
    scaled regressors (a cubic in large flow units, say) do not sink the
    solve. A rank-deficient design raises instead of returning noise.
    """
    design = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = design.shape
    if n < p + 1:
        raise InsufficientDataError(f"need at least {p + 1} observations, got {n}")

    scale = np.max(np.abs(design), axis=0)
    if np.any(scale == 0):
        raise SingularFitError("design has an all-zero column")
    scaled = design / scale
    q, r = np.linalg.qr(scaled)
    diag = np.abs(np.diag(r))
    if diag.min() <= max(n, p) * np.finfo(float).eps * diag.max():
        raise SingularFitError("design is rank deficient")

    coef_scaled = solve_triangular(r, q.T @ y)
    coef = coef_scaled / scale

    residuals = y - design @ coef
    dof = n - p
    sse = float(residuals @ residuals)
    sst = float(np.sum((y - y.mean()) ** 2))
    sigma2 = sse / dof

    r_inv = solve_triangular(r, np.eye(p))
    cov = sigma2 * (r_inv @ r_inv.T) / np.outer(scale, scale)
    std_err = np.sqrt(np.diag(cov))

    with np.errstate(divide="ignore", invalid="ignore"):
        t_values = coef / std_err
    p_values = 2.0 * stats.t.sf(np.abs(t_values), dof)

    if sst > 0:
        r2 = 1.0 - sse / sst
    else:
        r2 = 0.0
    if sse > 0:
        f_statistic = ((sst - sse) / (p - 1)) / sigma2 if p > 1 else np.nan
        f_p_value = float(stats.f.sf(f_statistic, p - 1, dof)) if p > 1 else np.nan
    else:
        f_statistic = np.inf
        f_p_value = 0.0

    return OlsFit(
        coef=coef,
        std_err=std_err,
        t_values=t_values,
        p_values=np.asarray(p_values, dtype=float),
        r2=float(r2),
        f_statistic=float(f_statistic),
        f_p_value=float(f_p_value),
        n_obs=n,
        residuals=residuals,
    )


def _line_fit(x: np.ndarray, y: np.ndarray) -> OlsFit:
    design = np.column_stack([np.ones_like(x), x])
    return ols(design, y)


@dataclass
class FreshAirModel:
    """Per-AHU fresh-air fraction k and bias alpha.

    Identified from the normalized unexplained coil load regressed on
    the outdoor-minus-return temperature difference.
    """

    building: str
    ahu: str
    k: float
    alpha: float
    r2: float
    std_err: dict
    p_values: dict
    n_obs: int
    f_statistic_p: float
    k_plausible: bool

    @property
    def path(self) -> str:
        return f"{self.building}{SEP}{self.ahu}"

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "alpha": self.alpha,
            "r2": self.r2,
            "std_err": dict(self.std_err),
            "p_values": dict(self.p_values),
            "n_obs": self.n_obs,
            "f_statistic_p": self.f_statistic_p,
            "k_plausible": self.k_plausible,
        }

    @classmethod
    def from_dict(cls, building: str, ahu: str, d: dict) -> "FreshAirModel":
        return cls(
            building=building,
            ahu=ahu,
            k=float(d["k"]),
            alpha=float(d["alpha"]),
            r2=float(d["r2"]),
            std_err={k: float(v) for k, v in d["std_err"].items()},
            p_values={k: float(v) for k, v in d["p_values"].items()},
            n_obs=int(d["n_obs"]),
            f_statistic_p=float(d["f_statistic_p"]),
            k_plausible=bool(d["k_plausible"]),
        )


def fit_fresh_air(
    frame: ChannelFrame,
    building_id: str,
    ahu_id: str,
    series: AhuSeries,
    rat: pd.Series,
    air: AirProperties,
    mask: pd.Series | None = None,
    min_obs: int = 3,
) -> FreshAirModel:
    """Identifies the fresh-air model for one AHU.

    Only rows with positive total flow enter the fit; the normalized
    load is undefined when the fan is off.
    """
    oat = frame.channel(OAT)
    with np.errstate(invalid="ignore", divide="ignore"):
        y = (series.q_c - series.q_z_sum) / (air.cp_rho * series.v_c)
    x = oat - rat

    valid = y.notna() & x.notna() & (series.v_c > 0)
    if mask is not None:
        valid &= mask.reindex(valid.index, fill_value=False)
    xv = x[valid].to_numpy()
    yv = y[valid].to_numpy()
    if len(xv) < min_obs:
        raise InsufficientDataError(
            f"{building_id}{SEP}{ahu_id}: {len(xv)} usable rows for fresh-air fit, need {min_obs}"
        )

    try:
        fit = _line_fit(xv, yv)
    except SingularFitError as e:
        raise SingularFitError(f"{building_id}{SEP}{ahu_id}: {e}") from None
    alpha, k = fit.coef
    return FreshAirModel(
        building=building_id,
        ahu=ahu_id,
        k=float(k),
        alpha=float(alpha),
        r2=fit.r2,
        std_err={"alpha": float(fit.std_err[0]), "k": float(fit.std_err[1])},
        p_values={"alpha": float(fit.p_values[0]), "k": float(fit.p_values[1])},
        n_obs=fit.n_obs,
        f_statistic_p=fit.f_p_value,
        k_plausible=bool(K_PLAUSIBLE[0] <= k <= K_PLAUSIBLE[1]),
    )


@dataclass
class BuildingModel:
    """Closure from summed coil loads to the metered building load."""

    building: str
    l: float
    beta: float
    r2: float
    std_err: dict
    p_values: dict
    n_obs: int
    f_statistic_p: float

    def to_dict(self) -> dict:
        return {
            "l": self.l,
            "beta": self.beta,
            "r2": self.r2,
            "std_err": dict(self.std_err),
            "p_values": dict(self.p_values),
            "n_obs": self.n_obs,
            "f_statistic_p": self.f_statistic_p,
        }

    @classmethod
    def from_dict(cls, building: str, d: dict) -> "BuildingModel":
        return cls(
            building=building,
            l=float(d["l"]),
            beta=float(d["beta"]),
            r2=float(d["r2"]),
            std_err={k: float(v) for k, v in d["std_err"].items()},
            p_values={k: float(v) for k, v in d["p_values"].items()},
            n_obs=int(d["n_obs"]),
            f_statistic_p=float(d["f_statistic_p"]),
        )


def fit_building(
    frame: ChannelFrame,
    building_id: str,
    coil_sum: pd.Series,
    mask: pd.Series | None = None,
    min_obs: int = 3,
) -> BuildingModel:
    """Regresses the metered building load on the summed coil loads.

    Runs over all hours by default; the meter reads around the clock
    even when the fans idle.
    """
    q_b = frame.channel(Q_B, building_id)
    valid = q_b.notna() & coil_sum.notna()
    if mask is not None:
        valid &= mask.reindex(valid.index, fill_value=False)
    xv = coil_sum[valid].to_numpy()
    yv = q_b[valid].to_numpy()
    if len(xv) < min_obs:
        raise InsufficientDataError(
            f"{building_id}: {len(xv)} usable rows for building fit, need {min_obs}"
        )
    try:
        fit = _line_fit(xv, yv)
    except SingularFitError as e:
        raise SingularFitError(f"{building_id}: {e}") from None
    beta, l = fit.coef
    return BuildingModel(
        building=building_id,
        l=float(l),
        beta=float(beta),
        r2=fit.r2,
        std_err={"beta": float(fit.std_err[0]), "l": float(fit.std_err[1])},
        p_values={"beta": float(fit.p_values[0]), "l": float(fit.p_values[1])},
        n_obs=fit.n_obs,
        f_statistic_p=fit.f_p_value,
    )


@dataclass
class FanModel:
    """Cubic fan power curve in its native commissioning units."""

    building: str
    ahu: str
    a0: float
    a1: float
    a2: float
    a3: float
    flow_unit: str
    power_unit: str
    flow_range: tuple
    r2: float
    n_obs: int
    donor_id: str | None = None

    @property
    def path(self) -> str:
        return f"{self.building}{SEP}{self.ahu}"

    @property
    def coefficients(self) -> tuple:
        return (self.a0, self.a1, self.a2, self.a3)

    def power_at(self, flow):
        """Evaluates the curve; flow must be in the model's flow unit."""
        return self.a0 + self.a1 * flow + self.a2 * flow**2 + self.a3 * flow**3

    def to_dict(self) -> dict:
        d = {
            "a0": self.a0,
            "a1": self.a1,
            "a2": self.a2,
            "a3": self.a3,
            "flow_unit": self.flow_unit,
            "power_unit": self.power_unit,
            "flow_range": [self.flow_range[0], self.flow_range[1]],
            "r2": self.r2,
            "n_obs": self.n_obs,
        }
        if self.donor_id is not None:
            d["donor_id"] = self.donor_id
        return d

    @classmethod
    def from_dict(cls, building: str, ahu: str, d: dict) -> "FanModel":
        return cls(
            building=building,
            ahu=ahu,
            a0=float(d["a0"]),
            a1=float(d["a1"]),
            a2=float(d["a2"]),
            a3=float(d["a3"]),
            flow_unit=d["flow_unit"],
            power_unit=d["power_unit"],
            flow_range=(float(d["flow_range"][0]), float(d["flow_range"][1])),
            r2=float(d["r2"]),
            n_obs=int(d["n_obs"]),
            donor_id=d.get("donor_id"),
        )


def fit_fan(
    building_id: str,
    ahu_id: str,
    flows,
    powers,
    flow_unit: str,
    power_unit: str,
) -> FanModel:
    """Fits the cubic power curve to commissioning measurements."""
    flows = np.asarray(flows, dtype=float)
    powers = np.asarray(powers, dtype=float)
    if flows.shape != powers.shape:
        raise ModelMismatchError("fan flow and power arrays differ in length")
    if len(flows) < MIN_FAN_POINTS:
        raise InsufficientDataError(
            f"{building_id}{SEP}{ahu_id}: {len(flows)} commissioning points, need {MIN_FAN_POINTS}"
        )
    design = np.column_stack([np.ones_like(flows), flows, flows**2, flows**3])
    fit = ols(design, powers)
    return FanModel(
        building=building_id,
        ahu=ahu_id,
        a0=float(fit.coef[0]),
        a1=float(fit.coef[1]),
        a2=float(fit.coef[2]),
        a3=float(fit.coef[3]),
        flow_unit=flow_unit,
        power_unit=power_unit,
        flow_range=(float(flows.min()), float(flows.max())),
        r2=fit.r2,
        n_obs=fit.n_obs,
    )


def scale_fan_model(
    donor: FanModel,
    building_id: str,
    ahu_id: str,
    donor_rated_power: float,
    target_rated_power: float,
) -> FanModel:
    """Transfers a donor curve to a similar fan by rated-power ratio.

    All four coefficients scale together, so the curve shape carries
    over and only its magnitude changes.
    """
    if donor_rated_power <= 0 or target_rated_power <= 0:
        raise ConfigError("rated powers must be positive for fan scaling")
    s = target_rated_power / donor_rated_power
    return FanModel(
        building=building_id,
        ahu=ahu_id,
        a0=donor.a0 * s,
        a1=donor.a1 * s,
        a2=donor.a2 * s,
        a3=donor.a3 * s,
        flow_unit=donor.flow_unit,
        power_unit=donor.power_unit,
        flow_range=donor.flow_range,
        r2=donor.r2,
        n_obs=donor.n_obs,
        donor_id=donor.path,
    )


@dataclass
class FittedModels:
    """Everything the disaggregation cascade needs, keyed by path."""

    air: AirProperties
    fresh_air: dict  # path -> FreshAirModel
    buildings: dict  # building id -> BuildingModel
    fans: dict  # path -> FanModel

    def fresh_air_for(self, building_id: str, ahu_id: str) -> FreshAirModel:
        path = f"{building_id}{SEP}{ahu_id}"
        try:
            return self.fresh_air[path]
        except KeyError:
            raise ModelMismatchError(f"no fresh-air model for {path}") from None

    def building_for(self, building_id: str) -> BuildingModel:
        try:
            return self.buildings[building_id]
        except KeyError:
            raise ModelMismatchError(f"no building model for {building_id}") from None

    def fan_for(self, building_id: str, ahu_id: str) -> FanModel:
        path = f"{building_id}{SEP}{ahu_id}"
        try:
            return self.fans[path]
        except KeyError:
            raise ModelMismatchError(f"no fan model for {path}") from None

    def check_topology(self, topology: Topology) -> None:
        for building, ahu in topology.iter_ahus():
            self.fresh_air_for(building.id, ahu.id)
            self.fan_for(building.id, ahu.id)
        for building in topology.buildings:
            self.building_for(building.id)

    def to_dict(self) -> dict:
        return {
            "air": {"c_kj_per_kg_k": self.air.c, "rho_kg_per_m3": self.air.rho},
            "fresh_air": {p: m.to_dict() for p, m in sorted(self.fresh_air.items())},
            "buildings": {b: m.to_dict() for b, m in sorted(self.buildings.items())},
            "fans": {p: m.to_dict() for p, m in sorted(self.fans.items())},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FittedModels":
        air = AirProperties(c=float(d["air"]["c_kj_per_kg_k"]), rho=float(d["air"]["rho_kg_per_m3"]))
        fresh_air = {}
        for path, md in d["fresh_air"].items():
            b, a = path.split(SEP, 1)
            fresh_air[path] = FreshAirModel.from_dict(b, a, md)
        buildings = {b: BuildingModel.from_dict(b, md) for b, md in d["buildings"].items()}
        fans = {}
        for path, md in d["fans"].items():
            b, a = path.split(SEP, 1)
            fans[path] = FanModel.from_dict(b, a, md)
        return cls(air=air, fresh_air=fresh_air, buildings=buildings, fans=fans)
