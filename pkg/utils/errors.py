"""Named error types for the estimation library and the CLI."""


class ArhGlsError(ValueError):
    """Base class for every error raised by this package."""


class DomainError(ArhGlsError):
    """A point or interval lies outside the admissible domain."""


class ResolutionError(ArhGlsError):
    """A grid is too coarse to resolve the requested number of modes."""


class DimensionMismatchError(ArhGlsError):
    """Objects with different K, interval, N or p were combined."""


class OperatorKindError(ArhGlsError):
    """An operator has the wrong kind or breaks its kind's invariants."""


class NearSingularError(ArhGlsError):
    """An autocorrelation eigenvalue is too close to the unit circle."""


class SingularDesignError(ArhGlsError):
    """The normal equations are rank deficient."""

    def __init__(self, message, mode=None):
        super().__init__(message)
        self.mode = mode


class NonPositiveDefiniteError(ArhGlsError):
    """An information block is not positive definite."""


class TruncationError(ArhGlsError):
    """The truncation order reaches eigenvalues below the floor."""


class MissingResidualError(ArhGlsError):
    """A prediction was requested without a previous residual."""


class ModelError(ArhGlsError):
    """Unknown model tag or malformed model definition."""


class ConfigError(ArhGlsError):
    """Unreadable configuration; carries the offending key."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


NUMERICAL_ERRORS = (
    DomainError,
    ResolutionError,
    DimensionMismatchError,
    OperatorKindError,
    NearSingularError,
    SingularDesignError,
    NonPositiveDefiniteError,
    TruncationError,
    MissingResidualError,
)
