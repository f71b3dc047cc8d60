"""Exception types shared across the package."""


class PSpecError(Exception):
    """Base class for all package-specific errors."""


class InvalidSpec(PSpecError):
    """A shape specification or grid is malformed (non-simple polygon, bad parameters)."""


class FeatureTooThin(PSpecError):
    """A geometric feature would span fewer than three cells at the requested spacing."""


class DimensionUnsupported(PSpecError):
    """The requested quantity is only defined for a different grid dimension."""


class ZeroTrialFunction(PSpecError):
    """A Rayleigh quotient was requested for an identically vanishing trial function."""


class InvalidExponent(PSpecError):
    """Exponent p outside the admissible range of the operation."""


class NonConvergence(PSpecError):
    """Iteration budget exhausted before the stopping criterion was met.

    The last iterate is attached as the ``result`` attribute when available.
    """

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class EmptySuperlevel(PSpecError):
    """Every sampled level produced an empty superlevel set."""


class EmptySet(PSpecError):
    """A capacity was requested for a set with no cells."""


class ConformalCase(PSpecError):
    """The explicit ball-capacity formula is invalid at p = n."""


class ExponentOutOfRange(PSpecError):
    """The exponent lies outside the range where the formula or search is defined."""


class DomainError(PSpecError):
    """An argument lies outside the mathematical domain of the function."""


class PreconditionViolated(PSpecError):
    """A bound was requested on a domain that fails its hypothesis."""

    def __init__(self, bound_id, reason: str):
        super().__init__(f"{bound_id}: {reason}")
        self.bound_id = bound_id
        self.reason = reason


class MissingParam(PSpecError):
    """A required parameter was absent from the supplied parameter map."""


class NotSymmetric(PSpecError):
    """The shape lacks the reflection symmetry required for the glued construction."""


class NoSignChange(PSpecError):
    """A nodal measurement was requested for a field of one sign."""


class NoInteriorBall(PSpecError):
    """No ball of the requested radius fits inside the domain."""


class InvalidConfig(PSpecError):
    """A run configuration violates its invariants."""


class ConfigParse(PSpecError):
    """A configuration file could not be parsed or references unknown entities."""


class IoError(PSpecError):
    """A report or output file could not be written."""
