class SimulationError(Exception):
    pass


# graph-core / scenario

class MissingRequiredAttr(SimulationError):
    pass


class DanglingEndpoint(SimulationError):
    pass


class UnknownActionKind(SimulationError):
    pass


class SpecScenarioMismatch(SimulationError):
    pass


class ParseError(SimulationError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(SimulationError):
    pass


# llm-backend

class BackendError(SimulationError):
    pass


class BackendTimeout(BackendError):
    pass


class HttpStatus(BackendError):
    def __init__(self, code, message=""):
        super().__init__(f"HTTP {code} {message}".strip())
        self.code = code


class RetriesExhausted(BackendError):
    def __init__(self, attempts, last_error=None):
        super().__init__(f"gave up after {attempts} attempts: {last_error}")
        self.attempts = attempts
        self.last_error = last_error


class EncoderError(SimulationError):
    pass


# metrics / baselines

class MetricError(SimulationError):
    pass


class InsufficientTail(MetricError):
    pass


class DegenerateDegrees(MetricError):
    pass


class NoConnectedPairs(MetricError):
    pass


class DegenerateSeries(MetricError):
    pass


class BaselineZeroClustering(MetricError):
    pass


class InvalidParams(SimulationError):
    pass
