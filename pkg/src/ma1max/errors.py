"""Exception hierarchy shared by all modules."""


class Ma1Error(Exception):
    """Base class for all package-specific errors."""


class ArgumentError(Ma1Error, ValueError):
    """Invalid argument (bad bounds, length mismatch, rho == 0, ...)."""


class DerivativeOrderError(Ma1Error):
    """Derivative order beyond the analytic depth with fallback disabled."""


class EigenSolverError(Ma1Error):
    """Dense eigensolver failure; carries residual diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConvergenceError(Ma1Error):
    """Iteration did not converge (power iteration, Newton polish, ...)."""


class PoleProximityError(Ma1Error):
    """Resolvent requested too close to an eigenvalue pole."""

    def __init__(self, message, pole=None):
        super().__init__(message)
        self.pole = pole


class DegeneracyError(Ma1Error):
    """Repeated roots / multiplicity where the method assumes distinctness."""


class IllConditionedError(Ma1Error):
    """Linear system condition number beyond the trust threshold."""


class SeriesInstabilityError(Ma1Error):
    """Power-series manipulation produced blowing-up coefficients."""


class TruncationFailureError(Ma1Error):
    """No truncation-stable roots found by a series eigen-solver."""


class ValidityError(Ma1Error):
    """Result violates a structural requirement (e.g. |delta_1| >= 1)."""
