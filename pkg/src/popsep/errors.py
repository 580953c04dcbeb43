"""Exception types shared across the package."""


class PopsepError(Exception):
    """Base class for package-specific failures."""


class ConvergenceError(PopsepError):
    """Iterative eigensolver failed to reach its tolerance within the cap."""

    def __init__(self, iterations: int, residual: float, message: str | None = None):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            message
            or f"no convergence after {iterations} iterations (residual {residual:.3e})"
        )


class DegenerateSpectrumError(PopsepError):
    """The spectrum carries no usable signal (equal or vanishing singular values)."""
