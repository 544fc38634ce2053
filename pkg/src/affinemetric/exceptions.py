"""Exception hierarchy shared by all modules."""


class AffineMetricError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(AffineMetricError, ValueError):
    pass


class ZeroBasePoint(AffineMetricError, ValueError):
    pass


class NonConvergent(AffineMetricError, ArithmeticError):
    pass


class NotConverged(NonConvergent):
    """A sampled Busemann estimate did not stabilise along the ray."""


class DegenerateBody(AffineMetricError, ValueError):
    pass


class InvalidNorm(AffineMetricError, ValueError):
    pass


class UnknownPointId(AffineMetricError, KeyError):
    pass


class InvalidGeodesic(AffineMetricError, ValueError):
    pass


class CoincidentEndpoints(AffineMetricError, ValueError):
    pass


class ParameterOutOfRange(AffineMetricError, ValueError):
    pass


class SamePoint(AffineMetricError, ValueError):
    pass


class SolverFailure(AffineMetricError, RuntimeError):
    pass


class NotSeparated(AffineMetricError):
    def __init__(self, message, pairs=()):
        super().__init__(message)
        self.pairs = list(pairs)


class OutOfDomain(AffineMetricError, ValueError):
    pass


class EpsInconsistent(AffineMetricError):
    """Probe quotients d(x, x+eps*v)/eps disagree across the eps schedule."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class NotSmoothAtBase(AffineMetricError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InsufficientRepresentations(AffineMetricError, ValueError):
    pass


class WellDefinednessViolation(AffineMetricError):
    """Two representations of one vector give different reconstructed lengths."""

    def __init__(self, message, witness=None, report=None):
        super().__init__(message)
        self.witness = witness
        self.report = report


class ParseError(AffineMetricError, ValueError):
    pass
