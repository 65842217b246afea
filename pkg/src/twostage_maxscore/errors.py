"""Exception hierarchy.

``EstimationError`` subclasses signal a computation failure on valid input
(the CLI maps them to exit code 3); plain ``ValueError`` is bad input.
"""


class EstimationError(RuntimeError):
    pass


class SingularSystemError(ValueError):
    pass


class InsufficientDataError(EstimationError):
    pass


class DegenerateCovariateError(EstimationError):
    pass


class DegenerateDenominatorError(EstimationError):
    pass


class SingularFitError(EstimationError):
    pass


class FirstStageError(EstimationError):
    pass


class CellFailureError(EstimationError):
    pass
