"""Exception hierarchy.  Everything derives from :class:`FreeBoundError`."""


class FreeBoundError(Exception):
    pass


class InvalidInputError(FreeBoundError, ValueError):
    """Non-finite, unsorted or otherwise malformed numeric input."""


class UnsupportedOperationError(FreeBoundError, ValueError):
    pass


class InvalidProfileError(FreeBoundError, ValueError):
    """Initial profile is not strictly positive, so the stretch map is not monotone."""


class ConstraintViolationError(FreeBoundError, ValueError):
    pass


class DegenerateGeometryError(FreeBoundError, ArithmeticError):
    """A constant of the a-priori analysis is non-finite (e.g. ``C2 == 3*C1``)."""


class HorizonExceededError(FreeBoundError, ArithmeticError):
    """``1 - int chi1`` reached zero: the time horizon is too long."""


class NoConvergenceError(FreeBoundError, RuntimeError):
    """A fixed-point iteration ran out of iterations.

    ``history`` holds the recorded update norms (inner) or residuals (outer),
    ``ratios`` the successive contraction ratios where meaningful.
    """

    def __init__(self, message, history=(), ratios=(), state=None):
        super().__init__(message)
        self.history = list(history)
        self.ratios = list(ratios)
        self.state = state


class OutOfDomainError(FreeBoundError, ValueError):
    pass


class InversionSingularityError(FreeBoundError, ArithmeticError):
    pass


class InsufficientDataError(FreeBoundError, ValueError):
    pass


class BlowUpError(FreeBoundError, RuntimeError):
    """The front-fixing oracle produced a non-finite state or ``s <= 0``."""

    def __init__(self, message, last_time):
        super().__init__(message)
        self.last_time = last_time


class PartialResultError(FreeBoundError, RuntimeError):
    """A chained run failed part way; ``segments`` holds the completed ones."""

    def __init__(self, message, segments, cause=None):
        super().__init__(message)
        self.segments = list(segments)
        self.cause = cause


class ConfigError(FreeBoundError, ValueError):
    """Malformed or invalid run configuration; ``lineno`` is 1-based when known."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno
