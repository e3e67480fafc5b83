"""Exception types shared across the package."""


class QrelaxError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(QrelaxError):
    """Malformed or invalid experiment configuration."""


class EigensolverError(QrelaxError):
    """Eigendecomposition failed or violated its accuracy contract."""


class ConvergenceError(QrelaxError):
    """An iterative numerical routine did not converge."""


class InvalidStateError(QrelaxError):
    """A state or density matrix violates a physical invariant."""


class PredictionError(QrelaxError):
    """Equilibrium prediction is degenerate (all statistical weights zero)."""


class FitError(QrelaxError):
    """Least-squares fit cannot be performed on the given points."""


class WindowError(QrelaxError):
    """Equilibrium window selects too few trajectory samples."""
