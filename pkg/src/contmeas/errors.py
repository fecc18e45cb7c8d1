"""Exception hierarchy shared across the package."""


class ContmeasError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(ContmeasError):
    """Operands live on different spaces or have incompatible shapes."""


class ValidationError(ContmeasError):
    """Structural or physical constraint violated by user-supplied data."""


class ConfigError(ContmeasError):
    """Malformed or inconsistent run configuration."""


class IntegrationError(ContmeasError):
    """Time integration failed (step rejection overflow, drift, ...)."""


class ContractivityError(IntegrationError):
    """|Phi| exceeded its contractive bound; truncation or stepping failure."""


class InversionQualityError(ContmeasError):
    """Characteristic-function inversion produced unreliable probabilities."""


class AliasingError(InversionQualityError):
    """Insufficient decay of the characteristic function at the grid edge."""
