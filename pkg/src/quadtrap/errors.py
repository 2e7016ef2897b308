"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class QuadTrapError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(QuadTrapError, ValueError):
    pass


class DomainError(QuadTrapError, ValueError):
    pass


class SingularityError(QuadTrapError):
    """Field requested on (or within the guard distance of) a filament."""

    def __init__(self, message, element=None, index=None):
        super().__init__(message)
        self.element = element
        self.index = index


class DegenerateConfigurationError(QuadTrapError):
    pass


class NoConvergenceError(QuadTrapError):
    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class AsymmetryError(QuadTrapError):
    pass


class InfeasibleError(QuadTrapError):
    pass


class InsufficientDataError(QuadTrapError, ValueError):
    pass


class InvalidDataError(QuadTrapError, ValueError):
    pass


class FitFailureError(QuadTrapError):
    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual
