"""Exception hierarchy shared by all edgeeta modules."""


class EdgeEtaError(Exception):
    """Base class for every error raised by edgeeta."""


class DomainError(EdgeEtaError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Evaluation requested exactly at a pole."""


class ConvergenceError(EdgeEtaError, ArithmeticError):
    """An iterative method exceeded its iteration cap."""


class CapMismatch(EdgeEtaError, ValueError):
    """Two index sets with different truncation caps were combined."""


class InvalidDimensions(EdgeEtaError, ValueError):
    """Edge dimensions violate b + f + 1 = m or f >= 1."""


class NotApplicable(EdgeEtaError, ValueError):
    """Operation requested for an operator class it does not cover."""


class KindDimensionMismatch(EdgeEtaError, ValueError):
    """Operator kind incompatible with the dimension (e.g. signature on odd m)."""


class UnclassifiedParity(EdgeEtaError, ValueError):
    """The operator admits no even/odd classification for this edge."""


class Unscalable(EdgeEtaError, ValueError):
    """No rescaling of the link metric can enforce the Witt condition."""


class RankMismatch(EdgeEtaError, ValueError):
    """Twisting representations of different rank were supplied."""


class IllConditioned(EdgeEtaError, ArithmeticError):
    """Least-squares design matrix too ill-conditioned to trust."""

    def __init__(self, message, condition_estimate=None):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class InsufficientSamples(EdgeEtaError, ValueError):
    """Fewer samples than twice the number of template terms."""


class TailUnbounded(EdgeEtaError, ArithmeticError):
    """Spectral truncation error cannot be bounded at the requested time."""


class QuadratureFailure(EdgeEtaError, ArithmeticError):
    """Adaptive quadrature did not reach its error target."""


class DescriptorError(EdgeEtaError, ValueError):
    """Malformed or inconsistent descriptor file."""
