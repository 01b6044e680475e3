"""Exception hierarchy shared by the solver modules."""


class MinTimeError(Exception):
    """Base class for all solver errors."""


class OutOfDomain(MinTimeError, ValueError):
    pass


class NonFinite(MinTimeError, ValueError):
    pass


class DegenerateEqualVelocities(MinTimeError, ValueError):
    """Endpoint velocities coincide, so the problem has no normalized frame."""


class ClassificationMismatch(MinTimeError, ValueError):
    pass


class InvalidMu(MinTimeError, ValueError):
    pass


class BracketFailure(MinTimeError, RuntimeError):
    """The monotone residual did not change sign across its bracket.

    This is always an implementation bug, never a property of the data.
    """


class NoSolutionFound(MinTimeError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class OracleInconclusive(MinTimeError, RuntimeError):
    pass
