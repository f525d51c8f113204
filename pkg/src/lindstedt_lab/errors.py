"""Exception hierarchy.  The CLI maps each family to its own exit code."""


class LabError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(LabError, ValueError):
    """Out-of-range or inconsistent run parameters."""


class RationalityError(ConfigurationError):
    """A frequency descriptor that would produce a rational number."""


class ComputeError(LabError):
    """A numerical step could not be carried out."""


class SolvabilityError(ComputeError):
    """Cohomology right-hand side with a non-negligible mean."""


class DependencyError(ComputeError):
    """An order was requested before the orders it depends on."""


class AliasingError(ComputeError):
    """Evaluation grid too coarse for the polynomial degree."""


class UndefinedLogError(ComputeError):
    """Logarithm of a zero norm while building a growth sequence."""

    def __init__(self, k, message=None):
        self.k = k
        super().__init__(message or f"norm of u_{k} is zero; log undefined")


class FloorContaminationError(ComputeError):
    """A residual sweep reached the rounding floor inside the fit window."""

    def __init__(self, first_saturated, message=None):
        self.first_saturated = first_saturated
        super().__init__(message or f"residual at N={first_saturated} is below the precision floor")


class ValidationGateError(LabError):
    """A validation check ran but its result is outside the accepted band."""


class ArchiveError(LabError, OSError):
    """Archive could not be read or written."""


class ArchiveVersionError(ArchiveError):
    pass


class PrecisionDowngradeError(ArchiveError):
    pass


class CorruptRecordError(ArchiveError):
    def __init__(self, k, message):
        self.k = k
        super().__init__(f"order {k}: {message}")
