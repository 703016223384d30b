"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: validation problems exit 1, I/O
problems exit 2, numerical failures exit 3.
"""


class ValidationError(ValueError):
    """Bad input: wrong shapes, out-of-range parameters, malformed files."""


class SingularityError(ValidationError):
    """A distance that must be positive came out as zero."""


class NumericalError(ArithmeticError):
    """A computation could not produce a trustworthy value."""


class ConvergenceError(NumericalError):
    def __init__(self, message: str, violation: float, iterations: int):
        super().__init__(f"{message} (KKT violation {violation:.3e} after {iterations} iterations)")
        self.violation = violation
        self.iterations = iterations


class UndefinedCorrelationError(NumericalError):
    """Correlation requested for a sample with zero variance."""
