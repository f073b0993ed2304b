"""Exception hierarchy shared across the library, service and CLI."""


class TorusError(Exception):
    """Base class for domain errors (mapped to exit code 1 / HTTP 400)."""

    kind = "domain"


class SingularMatrixError(TorusError):
    kind = "singular-matrix"


class CapExceededError(TorusError):
    kind = "cap-exceeded"


class DimensionTooLargeError(TorusError):
    kind = "dimension-too-large"


class UnknownLatticeError(TorusError):
    kind = "unknown-lattice"


class NonConvergenceError(TorusError):
    """Quadrature did not converge; carries the best partial result."""

    kind = "non-convergence"

    def __init__(self, message, partial=None, error_estimate=None):
        super().__init__(message)
        self.partial = partial
        self.error_estimate = error_estimate


class TruncationError(TorusError):
    kind = "truncation-bound"


class NotUnitVolumeError(TorusError):
    kind = "not-unit-volume"


class PoleError(TorusError):
    kind = "pole"


class ConfigError(TorusError):
    kind = "config"
