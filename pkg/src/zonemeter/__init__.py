"""Zone-level electrical load metering from building trend data.

Turns a metered building cooling load plus routine AHU and zone sensor
streams into a per-zone equivalent electrical load series, with the
regression calibration, flexibility metrics, and synthetic validation
building that make the estimate auditable.
"""

__version__ = "0.1.0"

from .channels import ChannelFrame, PointCatalog, align_channels
from .config import RunConfig
from .disaggregate import CascadeResult, run_cascade
from .errors import (
    ConfigError,
    FitError,
    InputError,
    InsufficientDataError,
    MetricError,
    MissingChannelError,
    ModelMismatchError,
    NoPositiveSavingsError,
    SimulationDivergedError,
    SimulationError,
    SingularFitError,
    UndefinedFlexibilityError,
    UndefinedGiniError,
    UndefinedReturnTempError,
    UnknownPointError,
    ZoneMeterError,
)
from .flexmetrics import (
    concentration,
    energy_flexibility,
    flexibility_report,
    flexibility_shares,
    gini,
    lorenz,
    thermal_impact,
)
from .regimes import OperatingHours, RegimeCalendar, label_days, operating_mask
from .regression import (
    BuildingModel,
    FanModel,
    FittedModels,
    FreshAirModel,
    fit_building,
    fit_fan,
    fit_fresh_air,
    ols,
    scale_fan_model,
)
from .simulate import (
    GroundTruth,
    SimulationResult,
    default_truth,
    perturb,
    simulate,
    synthetic_topology,
)
from .thermo import (
    ahu_load_series,
    coil_load,
    fresh_air_load,
    mixed_air_temperature,
    return_air_temperature,
    zone_space_load,
)
from .topology import AhuNode, AirProperties, BuildingNode, Topology, ZoneNode, load_topology

__all__ = [
    "__version__",
    "AhuNode",
    "AirProperties",
    "BuildingModel",
    "BuildingNode",
    "CascadeResult",
    "ChannelFrame",
    "ConfigError",
    "FanModel",
    "FitError",
    "FittedModels",
    "FreshAirModel",
    "GroundTruth",
    "InputError",
    "InsufficientDataError",
    "MetricError",
    "MissingChannelError",
    "ModelMismatchError",
    "NoPositiveSavingsError",
    "OperatingHours",
    "PointCatalog",
    "RegimeCalendar",
    "RunConfig",
    "SimulationDivergedError",
    "SimulationError",
    "SimulationResult",
    "SingularFitError",
    "Topology",
    "UndefinedFlexibilityError",
    "UndefinedGiniError",
    "UndefinedReturnTempError",
    "UnknownPointError",
    "ZoneMeterError",
    "ZoneNode",
    "align_channels",
    "ahu_load_series",
    "coil_load",
    "concentration",
    "default_truth",
    "energy_flexibility",
    "fit_building",
    "fit_fan",
    "fit_fresh_air",
    "flexibility_report",
    "flexibility_shares",
    "fresh_air_load",
    "gini",
    "label_days",
    "load_topology",
    "lorenz",
    "mixed_air_temperature",
    "ols",
    "operating_mask",
    "perturb",
    "return_air_temperature",
    "run_cascade",
    "scale_fan_model",
    "simulate",
    "synthetic_topology",
    "thermal_impact",
    "zone_space_load",
]
