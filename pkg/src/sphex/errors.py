"""Exception types shared across the package.

The hierarchy mirrors how the command line tool maps failures to exit
codes: geometric impossibilities and bad input data are ValueError-like,
while numerical degeneracies (tangency, vanishing pivots, hopeless
finite-difference steps) get their own branch so callers can tell a
wrong answer apart from an ill-posed question.
"""


class SphexError(Exception):
    """Base class for errors raised by this package."""


class NonRealizableError(SphexError, ValueError):
    """Squared-distance data admits no Euclidean point configuration."""


class DegenerateConfigError(SphexError, ValueError):
    """Configuration is numerically degenerate (flat simplex, tangency, ...)."""


class TangencyError(DegenerateConfigError):
    """Two spheres touch; derived angles or labels are ambiguous."""


class EmptyIntersectionError(SphexError, ValueError):
    """Requested sphere intersection is empty."""


class HypothesisError(SphexError, ValueError):
    """A sign hypothesis required by the requested computation fails."""


class IndeterminateSignError(SphexError, ValueError):
    """A required determinant sign is below the resolution threshold."""


class FdNoiseError(SphexError, ArithmeticError):
    """Finite-difference estimate is dominated by sampling noise."""
