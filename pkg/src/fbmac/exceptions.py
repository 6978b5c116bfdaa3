"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a formula (log of a
    nonpositive number, nonpositive power, beta <= 1, ...)."""


class ParameterError(ValueError):
    """Inconsistent or infeasible code/simulation parameters."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap.

    The last iterate and residual are kept on the exception so callers can
    report them.
    """

    def __init__(self, message, last=None, residual=None, iterations=None):
        super().__init__(message)
        self.last = last
        self.residual = residual
        self.iterations = iterations
