"""Exception hierarchy.

Every error carries the short name of the module that raised it so the
command line can prefix its diagnostics.
"""


class EimkitError(Exception):
    module = "eimkit"


class ParseError(EimkitError, ValueError):
    module = "model"


class DimensionError(EimkitError, ValueError):
    module = "model"


class NonFiniteError(EimkitError, ValueError):
    module = "model"


class SingularMatrix(EimkitError, ArithmeticError):
    """Raised when a pivot of the LU factorization falls below threshold."""

    module = "linalg"

    def __init__(self, message, step=None, pivot_index=None):
        super().__init__(message)
        self.step = step
        self.pivot_index = pivot_index


class NumericalBreakdown(EimkitError, ArithmeticError):
    """Singular interpolation matrix although the greedy pivot was nonzero."""

    module = "greedy"

    def __init__(self, step, pivot, condition):
        super().__init__(
            f"interpolation matrix singular at step {step} "
            f"(pivot={pivot:.3e}, condition estimate={condition:.3e})"
        )
        self.step = step
        self.pivot = pivot
        self.condition = condition


class DegeneratePivot(EimkitError, ArithmeticError):
    module = "evaluation"


class AllDropped(EimkitError, ValueError):
    module = "rectangular"


class BuildFailure(EimkitError, RuntimeError):
    module = "harness"
