"""Exception types raised across the package."""


class DegenerateInputError(ValueError):
    """Input has no variation (or otherwise carries no information)."""


class FitFailureError(RuntimeError):
    """An estimator could not produce a usable fit.

    ``best`` carries the best point found, when one exists.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class PipelineError(RuntimeError):
    """A pipeline stage failed; ``label`` names the offending series."""

    def __init__(self, message, label=None):
        super().__init__(message)
        self.label = label
