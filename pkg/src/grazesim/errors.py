"""Exception types shared across the library."""


class GrazesimError(Exception):
    """Base class for every library-specific failure."""


class DegenerateParametersError(GrazesimError):
    """A non-degeneracy condition on the model parameters failed.

    The message names the specific condition (e.g. ``delta - tau + 1 = 0``
    or ``square-root coefficient c = 0``).
    """


class NumericOverflowError(GrazesimError):
    """An iterate or integration step produced a non-finite value."""


class InvalidNoiseDrawError(GrazesimError):
    """A noise draw left the domain where the map variant is defined."""


class InvalidSampleError(GrazesimError):
    """A first-return sample (r, h) fell outside the open positive quadrant."""


class SamplerSetupError(GrazesimError):
    """Envelope construction for the first-return sampler failed validation."""


class ChatteringError(GrazesimError):
    """Switching events accumulated faster than the configured guard allows."""

    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state


class StarvationError(GrazesimError):
    """No return to x > 0 occurred within the configured iteration cap."""


class DegenerateClusteringError(GrazesimError):
    """Cloud comparison produced an empty cluster."""


class ConfigError(GrazesimError):
    """Command-line / config-file combination is invalid."""
