"""Exception hierarchy shared by all wavelab modules.

Each class carries the CLI exit code it maps to.
"""


class WaveLabError(Exception):
    exit_code = 3


class ParameterError(WaveLabError, ValueError):
    exit_code = 2


class ConfigError(WaveLabError):
    exit_code = 2


class DataCorruptionError(WaveLabError):
    """Non-finite values reached a transform or a solver."""


class FieldFormatError(WaveLabError):
    """A ZFLD file is malformed, truncated or inconsistent with its header."""


class DimensionError(WaveLabError, ValueError):
    exit_code = 2


class CapacityError(WaveLabError):
    exit_code = 4


class SolverError(WaveLabError):
    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class NumericalBlowupError(WaveLabError):
    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class DegenerateCycleError(WaveLabError):
    pass


class ToleranceError(WaveLabError):
    pass
