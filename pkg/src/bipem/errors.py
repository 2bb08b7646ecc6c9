"""Exception types shared across the package."""


class BipemError(Exception):
    """Base class for all package-specific errors."""


class NonZeroMean(BipemError):
    """A negative-order multiplier or torus Poisson solve was asked for a
    field whose mean is not negligible."""


class DensityUnderflow(BipemError):
    """The pointwise density positivity 1 + mu*n > floor failed somewhere."""


class BlowUpDetected(BipemError):
    """Integration aborted because the state left the admissible set."""

    def __init__(self, time: float, message: str = ""):
        self.time = time
        super().__init__(message or f"blow-up detected at t={time:.6g}")


class StepLimitExceeded(BipemError):
    """Integration hit max_steps before reaching t_max."""


class IncompatibleExponents(BipemError):
    """No interpolation weight theta in [0, 1] solves the exponent relation."""


class AmplitudeTooLarge(BipemError):
    """Input field is outside the small-amplitude regime of the checker."""


class ExponentOutOfRange(BipemError):
    """Requested Lebesgue exponent is outside the embedding's range."""


class QuadratureNotConverged(BipemError):
    """Doubling the radial shell count moved a channel value by too much."""


class InsufficientSamples(BipemError):
    """Too few samples inside the requested fit window."""


class NonPositiveValues(BipemError):
    """A log-log fit was asked for a series containing zeros or negatives."""
