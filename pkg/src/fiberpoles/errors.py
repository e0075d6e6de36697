"""Exception hierarchy shared by all modules."""


class FiberPolesError(Exception):
    """Base class for every error raised by the package."""


class UnsupportedFamily(FiberPolesError):
    """The operation is not implemented for this phase family."""


class DomainError(FiberPolesError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class AccuracyError(FiberPolesError):
    """A numerical procedure did not reach its accuracy target."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class NeedsExpansion(FiberPolesError):
    """Meromorphic continuation was requested without an expansion at 0."""


class LatticeMismatch(FiberPolesError):
    """An exponent was found that does not belong to the declared lattice."""


class IllConditioned(FiberPolesError):
    """A least-squares design matrix is too ill-conditioned to trust."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class EmptyRegion(FiberPolesError):
    """A region combination has no nonzero coefficient."""


class BoundaryNotAtOrigin(FiberPolesError):
    """The boundary of a region combination is not concentrated at the origin."""


class ParseError(FiberPolesError, ValueError):
    """An expression or region string could not be parsed."""

    def __init__(self, message, text="", position=None):
        if position is not None:
            message = f"{message} at position {position}: {text!r}"
        super().__init__(message)
        self.text = text
        self.position = position
