"""Exception hierarchy shared across the package.

Subcommand exit codes and HTTP statuses are derived from these classes,
so new error types should subclass one of the four category roots.
"""


class ZoneMeterError(Exception):
    """Base class for all package errors."""


class InputError(ZoneMeterError):
    """Bad input data, schema, or configuration (exit code 2)."""


class UnknownPointError(InputError):
    def __init__(self, point_ids):
        self.point_ids = sorted(point_ids)
        super().__init__(f"unknown point id(s): {', '.join(self.point_ids)}")


class MissingChannelError(InputError):
    def __init__(self, key):
        self.key = key
        super().__init__(f"channel not present: {key}")


class ConfigError(InputError):
    pass


class FitError(ZoneMeterError):
    """Model estimation failure (exit code 3)."""


class SingularFitError(FitError):
    pass


class InsufficientDataError(FitError):
    pass


class ModelMismatchError(FitError):
    """A fitted model is missing for an entity in the topology."""


class UndefinedReturnTempError(ZoneMeterError):
    """Return air temperature requested with zero total flow."""


class MetricError(ZoneMeterError):
    """Metric precondition not met (exit code 4)."""


class UndefinedFlexibilityError(MetricError):
    pass


class NoPositiveSavingsError(MetricError):
    pass


class UndefinedGiniError(MetricError):
    pass


class SimulationError(ZoneMeterError):
    """Synthetic data generation failure (exit code 5)."""


class SimulationDivergedError(SimulationError):
    def __init__(self, zone_id, value):
        self.zone_id = zone_id
        self.value = value
        super().__init__(
            f"simulation diverged: zone {zone_id} reached {value:.1f} degC"
        )


EXIT_OK = 0
EXIT_INPUT = 2
EXIT_FIT = 3
EXIT_METRIC = 4
EXIT_SIMULATION = 5


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, InputError):
        return EXIT_INPUT
    if isinstance(exc, FitError):
        return EXIT_FIT
    if isinstance(exc, MetricError):
        return EXIT_METRIC
    if isinstance(exc, SimulationError):
        return EXIT_SIMULATION
    return 1
