"""Shared exception types.

The CLI maps these onto exit codes: configuration problems exit with 2,
numerical non-convergence with 3.
"""


class ConvergenceError(RuntimeError):
    """An iterative or quadrature procedure failed to stabilize.

    Attributes carry the evidence: ``last`` holds the final iterate (Newton
    inversion) and ``estimates`` the last two quadrature estimates.
    """

    def __init__(self, message, last=None, estimates=None):
        super().__init__(message)
        self.last = last
        self.estimates = estimates


class NotCoveredError(ValueError):
    """Requested a prediction outside the range of the implemented error models."""
