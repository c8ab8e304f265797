"""Exception types shared across the library.

The CLI maps these onto exit codes: validation failures exit 1, numerical
failures (including convergence and precision problems) exit 2.
"""


class ValidationError(ValueError):
    """Inputs violate a documented precondition or type invariant."""


class ConvergenceError(RuntimeError):
    """An iterative solver exhausted its budget without reaching tolerance."""


class NumericalError(RuntimeError):
    """A linear-algebra or root-finding step is singular or inconsistent."""


class PrecisionError(NumericalError):
    """The requested target sits below attainable floating-point resolution."""


class InfeasibleDistortionError(NumericalError):
    """No test-channel noise in the search bracket attains the target distortion."""
