"""
Error types shared by the engines, agents and the command line.
"""


class RemedianError(ValueError):
    """Base class for every error this package raises on purpose."""


class InvalidParameterError(RemedianError):
    """A parameter (k, b, N, Ks, distribution, probability) is out of its domain."""


class CapacityError(RemedianError):
    """Insert attempted on a sketch that already holds b^k values."""


class EmptySketchError(RemedianError):
    """Query on a sketch that has seen no data."""


class NotAtCapacityError(RemedianError):
    """final_estimate requested before the b^k-th insert."""


class InfeasibleMatrixError(RemedianError):
    """Joint probabilities that no bivariate law can produce."""


class ConfigError(RemedianError):
    """Malformed environment configuration."""


class ToleranceViolation(RemedianError):
    """A report statistic fell outside its acceptance tolerance."""


class InputParseError(RemedianError):
    """A stream line could not be read as a finite decimal number."""

    def __init__(self, line: int, text: str, reason: str = "invalid number"):
        self.line = line
        self.text = text
        super().__init__(f"line {line}: {reason}")
