"""Exception types shared across the package."""


class FincascadeError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(FincascadeError):
    """Array shapes or index sets do not line up."""


class SingularMatrix(FincascadeError):
    """Linear solve hit a pivot below the singularity floor."""


class NumericalBreakdown(FincascadeError):
    """A numeric routine lost too much precision to continue safely."""


class NonPositiveExternalFraction(FincascadeError):
    """Some company is fully owned by others; the model requires a
    strictly positive externally held fraction."""


class InvalidSpec(FincascadeError):
    """A generator or file specification violates its constraints."""


class NetworkFormatError(FincascadeError):
    """A network file is malformed (duplicate or out-of-range entries,
    missing keys, wrong shapes)."""


class DegenerateScale(FincascadeError):
    """A scale parameter that must be positive is zero."""


class HeterogeneousWeights(FincascadeError):
    """Cross-holding weights are not homogeneous, so the single-weight
    cascade approximation does not apply."""


class InvalidSlack(FincascadeError):
    """A slack vector that must be strictly positive is not."""


class InfeasibleEps(FincascadeError):
    """The requested stability margin is too large for some row of the
    gain synthesis program."""


class LpInfeasible(FincascadeError):
    """A synthesis linear program has no feasible point."""


class LpUnbounded(FincascadeError):
    """A synthesis linear program is unbounded (ill-posed inputs)."""


class ConfigError(FincascadeError):
    """A scenario configuration cannot be interpreted."""
