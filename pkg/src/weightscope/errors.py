"""Exception types raised across weightscope."""


class WeightscopeError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(WeightscopeError, ValueError):
    """A checkpoint container or config could not be parsed."""


class DuplicateTensorError(WeightscopeError, ValueError):
    """Two tensors share a name, or two tensors map to the same slot."""


class ShapeError(WeightscopeError, ValueError):
    """A tensor mapped to a weight-matrix role is not 2-D."""


class SlotNotFoundError(WeightscopeError, KeyError):
    """A requested (layer, role) slot is absent from the checkpoint index."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class NonFiniteError(WeightscopeError, ValueError):
    """NaN or Inf encountered where finite data is required."""


class StateError(WeightscopeError, RuntimeError):
    """An operation was applied to an object in the wrong state."""


class DimError(WeightscopeError, ValueError):
    """Operand dimensions are incompatible."""


class ZeroColumnError(WeightscopeError, ValueError):
    """A column has zero norm, so its cosine similarity is undefined."""

    def __init__(self, column: int, which: str = ""):
        self.column = column
        self.which = which
        where = f" of {which}" if which else ""
        super().__init__(f"column {column}{where} has zero norm")


class UsageError(WeightscopeError, ValueError):
    """An API was called with an argument it does not accept."""


class ArgError(WeightscopeError, ValueError):
    """An argument is outside its permitted range."""


class DomainError(WeightscopeError, ValueError):
    """Input values fall outside the domain of a statistic."""
