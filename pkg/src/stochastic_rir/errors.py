"""Exception hierarchy shared by every module of the package."""


class RirError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParams(RirError, ValueError):
    pass


class InfeasibleDrr(RirError):
    """The response already sits well above the requested DRR."""


class ExhaustedRays(RirError):
    """The requested DRR cannot be reached by deleting reflections."""


class InvalidBandLayout(RirError, ValueError):
    pass


class InvalidBandEdges(RirError, ValueError):
    pass


class SilentInput(RirError, ValueError):
    pass


class InsufficientDecay(RirError):
    """The decay curve does not span the level range the estimator needs."""


class NoReverberantEnergy(RirError):
    pass


class NoReflectionFound(RirError):
    pass


class SampleRateMismatch(RirError, ValueError):
    pass


class UnsatisfiableRanges(RirError, ValueError):
    pass


class UnsupportedFormat(RirError):
    pass


class CorruptFile(RirError):
    pass


class ClippingError(RirError, ValueError):
    pass
