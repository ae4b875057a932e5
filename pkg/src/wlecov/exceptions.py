class WLEError(Exception):
    """Base class for numerical failures of the weighted likelihood fit."""


class DegenerateScatterError(WLEError):
    """Scatter matrix is singular or too badly conditioned to continue."""


class RankError(WLEError):
    """Effective sample size does not exceed the dimension."""


class ConvergenceError(WLEError):
    """No start converged. ``best`` holds the best non-converged iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class BandwidthSelectionError(WLEError):
    """No bandwidth bracket reaches the requested downweighting level.

    ``profile`` lists the ``(bandwidth, downweighting)`` pairs visited.
    """

    def __init__(self, message, profile=()):
        super().__init__(message)
        self.profile = list(profile)
