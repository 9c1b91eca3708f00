"""Exception types shared across the solver layers."""


class HJKernelError(Exception):
    """Base class for all errors raised by this package."""


class InvalidMappingError(HJKernelError):
    """Coordinate mapping is not strictly monotone."""


class DegenerateMappingError(HJKernelError):
    """Computed mapping Jacobian is zero or negative somewhere."""


class InsufficientStencilError(HJKernelError):
    """Too few nodes to form the requested difference stencil."""


class UnderResolvedSegmentError(HJKernelError):
    """An embedded-boundary line segment has too few interior nodes."""


class InvalidParameterError(HJKernelError):
    """Kernel or scheme parameter outside its admissible range."""


class ShapeError(HJKernelError):
    """Array arguments have mismatched shapes."""


class IncompleteClosureError(HJKernelError):
    """Boundary derivative data required by a non-periodic closure is missing."""


class IllConditionedBasisError(HJKernelError):
    """Quadrature interpolation system is numerically singular."""


class InconsistentWeightsError(HJKernelError):
    """Linear weights cannot reproduce the global quadrature functional."""


class SingularSystemError(HJKernelError):
    """Undivided-difference system is singular (duplicate nodes)."""


class InvalidOrderError(HJKernelError):
    """Unsupported scheme order."""


class InvalidSpeedError(HJKernelError):
    """Nonpositive wave speed where a positive one is required."""


class InvalidRangeError(HJKernelError):
    """Empty or invalid argument range."""


class DivergenceError(HJKernelError):
    """Solution became non-finite during time stepping."""

    def __init__(self, message, step=None, time=None, history=None):
        super().__init__(message)
        self.step = step
        self.time = time
        self.history = history if history is not None else []
