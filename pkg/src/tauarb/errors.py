"""Exception hierarchy shared by every module."""


class ModelError(ValueError):
    """Invalid model data: weights, partitions, measurability, time ranges."""

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class NotAdaptedError(ModelError):
    pass


class NotPredictableError(ModelError):
    pass


class NotMartingaleError(ModelError):
    pass


class NotHonestError(ModelError):
    pass


class ArbitrageExists(ValueError):
    """Raised when an equivalent martingale measure is requested for an arbitrage instance."""


class InstanceTooLarge(ValueError):
    pass


class InvariantBreach(RuntimeError):
    """A proven identity failed on a concrete instance. Always a bug, never model content."""
