"""Exception hierarchy for the finite-gap NLS toolkit."""


class FgnlsError(Exception):
    """Base class for all errors raised by this package."""


class SurfaceError(FgnlsError, ValueError):
    """Invalid branch-point data."""


class OverlappingCuts(SurfaceError):
    pass


class NonPositiveBandHeight(SurfaceError):
    pass


class OrderingViolation(SurfaceError):
    pass


class DuplicateBranchPoint(SurfaceError):
    pass


class OnBranchCut(FgnlsError, ValueError):
    """A point lies on a cut where a one-sided value was not requested."""


class RootFindingFailure(FgnlsError):
    pass


class QuadratureNonConvergence(FgnlsError):
    pass


class PathCrossesCut(FgnlsError, ValueError):
    pass


class SingularAMatrix(FgnlsError):
    pass


class SingularNormalizationSystem(FgnlsError):
    pass


class TailNotConverged(FgnlsError):
    pass


class TruncationOverflow(FgnlsError):
    """The theta lattice sum needs more points than the configured cap."""


class ThetaZeroDenominator(FgnlsError):
    pass


class SingularLInfinity(FgnlsError):
    pass


class FitNonConvergence(FgnlsError):
    pass
