"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class RegimeError(DomainError):
    """An argument lies outside the Hurst regime an asymptotic formula covers."""


class QuadratureError(RuntimeError):
    """Quadrature failed to converge at maximum refinement.

    Carries the best available estimate and its error bound so callers can
    decide whether the partial result is still usable.
    """

    def __init__(self, message, value, error):
        super().__init__(f"{message} (best estimate {value!r}, error bound {error!r})")
        self.value = value
        self.error = error


class DegeneracyError(RuntimeError):
    """A covariance matrix stayed numerically indefinite beyond the jitter policy."""


class FitError(RuntimeError):
    """A power-law fit was too poor (R^2 below threshold) or degenerate."""


class ConsistencyWarning(UserWarning):
    """Two independently computed forms of the same quantity disagree."""
