"""Exception types shared across the package."""


class ContractViolationError(ValueError):
    """An argument violated a documented precondition."""


class ConvergenceError(RuntimeError):
    """An iterative routine exhausted its budget; carries the last estimate."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class UndefinedCorrelationError(ValueError):
    """Pearson correlation requested for a constant (zero-variance) input."""


class UndefinedScoreError(ValueError):
    """A structure score was requested where it is undefined (all-zero map)."""


class UnsupportedTaskError(ValueError):
    """The requested operation does not apply to this task kind."""


class TrainingDivergedError(RuntimeError):
    """Training produced a non-finite loss."""

    def __init__(self, message, epoch, loss):
        super().__init__(message)
        self.epoch = epoch
        self.loss = loss


class ConfigError(ValueError):
    """A configuration document could not be interpreted."""
