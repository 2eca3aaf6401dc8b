"""Exception hierarchy shared by every module."""


class AlphaDPPError(Exception):
    """Base class for all library errors."""


class ContractViolation(AlphaDPPError, ValueError):
    """An argument violates a documented precondition."""


class InadmissibleAlpha(ContractViolation):
    """alpha is not of the form 2/m or -1/m with m a positive integer."""


class ResourceLimitError(AlphaDPPError, RuntimeError):
    """A size guard (factorial or exponential cost) was exceeded."""


class ConfigurationError(AlphaDPPError, ValueError):
    """A numerical configuration cannot deliver the requested accuracy."""


class SpectralViolation(AlphaDPPError, ValueError):
    """The kernel spectrum leaves the interval admissible for alpha."""

    def __init__(self, message, eigenvalue):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class ArtifactIOError(AlphaDPPError, OSError):
    """A config could not be read or an artifact could not be written."""
