"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` (bad input, the CLI
maps it to exit code 2) and :class:`NumericalError` (a computation could not
be carried out reliably, exit code 3).
"""


class QuasifreeError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(QuasifreeError, ValueError):
    pass


class NumericalError(QuasifreeError, ArithmeticError):
    pass


class InvalidMatrix(ValidationError):
    pass


class NotPositive(ValidationError):
    pass


class NotDominated(ValidationError):
    pass


class NotEquivalent(ValidationError):
    pass


class FormMismatch(ValidationError):
    pass


class NotAPolarization(ValidationError):
    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class NotPresymplectic(ValidationError):
    pass


class BoundaryPolarization(ValidationError):
    pass


class InvalidBasis(ValidationError):
    pass


class InvalidParameter(ValidationError):
    pass


class InvalidDirection(ValidationError):
    pass


class IncompatibleSubspace(ValidationError):
    pass


class InvalidFamily(ValidationError):
    pass


class UnsupportedDimension(ValidationError):
    pass


class UnsupportedDegenerate(ValidationError):
    pass


class InsufficientSamples(ValidationError):
    pass


class DegenerateForm(ValidationError):
    pass


class DegenerateCenter(ValidationError):
    pass


class ConvergenceFailure(NumericalError):
    pass
