"""Exception types shared across the library."""


class LoccForgeError(Exception):
    """Base class for all locc-forge failures."""


class DimensionMismatchError(LoccForgeError, ValueError):
    """Operands act on Hilbert spaces of different dimension."""


class DegenerateBasisError(LoccForgeError, ValueError):
    """An operator set is not usable as a basis (dependent or ill-conditioned)."""


class IncompleteMeasurementError(LoccForgeError, ValueError):
    """No nonnegative weights make the outcome operators sum to the identity."""


class InconsistentNodeError(LoccForgeError, ValueError):
    """A node context violates its own invariants (bad bystander operator or
    parent coefficients outside the feasible cone)."""


class NotProductError(LoccForgeError, ValueError):
    """An operator expected to be a tensor product with a known factor is not."""


class TreeStructureError(LoccForgeError, ValueError):
    """A protocol tree is structurally malformed; the message names the node path."""


class MeasurementFormatError(LoccForgeError, ValueError):
    """A JSON document does not describe a valid measurement or protocol tree."""

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location
