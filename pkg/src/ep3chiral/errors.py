"""Exception hierarchy shared by all modules.

The CLI reports the class name of any :class:`EPError` it catches, so the
names double as the structured error identifiers.
"""


class EPError(Exception):
    """Base class for numerical failures raised by this package."""


class DimensionError(EPError, ValueError):
    pass


class NotSymmetricError(EPError, ValueError):
    pass


class DefectiveMatrixError(EPError):
    """Bi-orthogonal basis is numerically meaningless (too close to an EP)."""


class SingularConfigurationError(EPError, ValueError):
    pass


class InconsistentBranchError(EPError):
    pass


class InvalidParamsError(EPError, ValueError):
    pass


class StepSizeError(EPError):
    """Eigenvalue matching along a path is ambiguous; refine the path."""


class OnSingularityError(EPError):
    """Two eigenvalues collided on the path (path hits an EP or a crossing)."""


class InvalidSampleError(EPError, ValueError):
    pass


class GaugeError(EPError):
    pass


class BranchTrackingError(EPError):
    pass


class DivergenceError(EPError):
    pass


class DegenerateStructureError(EPError):
    """Triple eigenvalue found, but not a single Jordan block of size 3."""


class StructuralInfeasibilityError(EPError, ValueError):
    pass


class NonGenericTieError(EPError):
    pass


class IndeterminatePatternError(EPError):
    pass


class InconsistencyError(EPError):
    """Measured phases disagree with the width-predicted assignment."""
