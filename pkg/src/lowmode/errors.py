"""Exception hierarchy shared by the solver modules."""


class LowModeError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgument(LowModeError, ValueError):
    pass


class EvaluationError(LowModeError, ValueError):
    """A field returned a non-finite value at a grid node."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class EllipticityViolation(LowModeError, ValueError):
    """The diffusion coefficient is nonpositive somewhere it was sampled."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class NyquistViolation(LowModeError, ValueError):
    pass


class DefinitenessFailure(LowModeError, ArithmeticError):
    """A matrix expected to be symmetric positive definite is not."""


class ConvergenceFailure(LowModeError, RuntimeError):
    """An iterative solver exhausted its iteration budget.

    The partial :class:`~lowmode.baselines.SolveReport` is kept on ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class GridIncompatible(LowModeError, ValueError):
    pass


class FeasibilityError(LowModeError, ValueError):
    """A dense brute-force computation was requested on too large a grid."""


class ConsistencyFailure(LowModeError, RuntimeError):
    """Solvers that should agree produced different solutions."""
