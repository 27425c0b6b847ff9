"""Exception types raised by potloc."""


class PotlocError(Exception):
    """Base class for all potloc errors."""


class ValidationError(PotlocError, ValueError):
    """Invalid input: bad shapes, out-of-range parameters, non-finite data."""


class DomainError(PotlocError, ValueError):
    """A point lies where the requested formula does not apply."""


class SingularityError(PotlocError, ValueError):
    """The logarithmic kernel was evaluated at (numerically) coincident points."""


class NonConvergenceError(PotlocError, RuntimeError):
    """An iterative solver hit its iteration cap.

    The best iterate reached so far is attached as ``x`` together with
    its KKT violation, so callers can still inspect or report it.
    """

    def __init__(self, message, x=None, kkt_violation=None, iterations=None):
        super().__init__(message)
        self.x = x
        self.kkt_violation = kkt_violation
        self.iterations = iterations
