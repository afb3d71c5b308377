"""Exception hierarchy shared by the library and the command line."""


class TimebinError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 2


class InvalidParameterError(TimebinError, ValueError):
    exit_code = 1


class ConfigError(TimebinError):
    exit_code = 1


class ConfigParseError(ConfigError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownKeyError(ConfigError):
    pass


class MissingKeyError(ConfigError):
    def __init__(self, key):
        self.key = key
        super().__init__(f"missing required key '{key}'")


class UnitError(ConfigError):
    pass


class SolverError(TimebinError):
    exit_code = 2


class WindowOverflowError(SolverError):
    pass


class StepTooCoarseError(SolverError):
    pass


class QuadratureError(SolverError):
    pass


class UnequalVelocitiesError(SolverError):
    pass


class EmptyFieldError(SolverError):
    pass
