"""Exception types shared across the package."""


class GptError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(GptError, ValueError):
    pass


class ValidationError(GptError, ValueError):
    """A user-supplied model, effect or parameter failed validation."""


class NotAnEffectError(ValidationError):
    """A functional leaves the unit interval on some vertex of the state space."""

    def __init__(self, vertex_index, vertex, value):
        self.vertex_index = vertex_index
        self.vertex = vertex
        self.value = value
        super().__init__(
            f"not an effect: value {value:.6g} at vertex {vertex_index} {list(vertex)}"
        )


class NumericalInstability(GptError, RuntimeError):
    """Simplex pivoting exceeded its iteration cap."""


class CapExceeded(GptError, RuntimeError):
    """A combinatorial enumeration would exceed its configured cap."""
