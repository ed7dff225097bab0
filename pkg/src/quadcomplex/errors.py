"""Exception hierarchy shared by all modules."""


class QuadComplexError(Exception):
    """Base class for library errors."""

    exit_code = 1


class GeometryError(QuadComplexError):
    exit_code = 4


class NonConvex(GeometryError):
    """Cell is not strictly convex or not counterclockwise."""


class Degenerate(GeometryError):
    """Cell area is below the configured floor."""


class DegreeTooHigh(QuadComplexError, ValueError):
    """Requested quadrature degree exceeds the rule catalog."""

    exit_code = 2


class EmptyInterior(QuadComplexError):
    """Discrete problem has no free degrees of freedom."""

    exit_code = 4


class NoConvergence(QuadComplexError):
    """Iterative solver did not reach its tolerance."""

    exit_code = 3


class TooLargeForDense(QuadComplexError):
    """Dense rank computation requested on too many unknowns."""

    exit_code = 2
