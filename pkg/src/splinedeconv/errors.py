"""Exception hierarchy.

Every exception carries an ``exit_code`` used by the command line front end:
2 for violated hypotheses or invalid input, 3 for numerical failures and
4 for I/O problems.
"""


class SplineDeconvError(Exception):
    exit_code = 3


class HypothesisFailed(SplineDeconvError, ValueError):
    """A precondition of a bound or construction does not hold."""

    exit_code = 2


class NotInvertible(HypothesisFailed):
    """The certified lower bound of the symbol modulus is zero."""


class NotRieszBasis(NotInvertible):
    """The gramian of a generator is not bounded away from zero."""


class AliasingError(HypothesisFailed):
    """The symbol grid is too coarse for the support of the sequence."""

    def __init__(self, message, required):
        super().__init__(message)
        self.required = required


class Divergent(HypothesisFailed):
    """A series constant was requested outside its convergence range."""


class NotDense(HypothesisFailed):
    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class GridTooSmall(SplineDeconvError):
    """Doubling the grid changed the inverse by more than the tolerance."""

    def __init__(self, message, required):
        super().__init__(message)
        self.required = required


class Infeasible(SplineDeconvError):
    pass


class NotContracting(SplineDeconvError):
    pass


class QuadratureError(SplineDeconvError):
    pass
