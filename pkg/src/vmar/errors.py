"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes; library code raises them directly.
"""


class VMARError(Exception):
    """Base class for all package-specific errors."""


class ModelStructureError(VMARError, ValueError):
    """Inconsistent dimensions, invalid orders, or out-of-range parameters."""


class DegenerateModelError(VMARError, ValueError):
    """Numerically degenerate object: singular leading coefficient,
    non-positive-definite scale, zero-variance input, and the like."""


class InvalidModelError(VMARError, ValueError):
    """Model fails a usage precondition, e.g. non-stationary model passed
    to the simulator."""


class DataInputError(VMARError, ValueError):
    """Malformed external input: bad CSV cell, unparsable model JSON."""


class InsufficientDataError(VMARError, ValueError):
    """Sample too short (or too narrow) for the requested operation."""


class EstimationError(VMARError, RuntimeError):
    """All optimization starts failed.

    Carries per-start diagnostics in ``diagnostics`` (a list of dicts with
    the start index, the failure reason and the last objective value).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or []
