"""Exception types shared across the package.

Everything raised on purpose derives from GapfieldError so callers can
catch one base class at the CLI boundary and keep batch runs alive.
"""


class GapfieldError(Exception):
    """Base class for all errors raised deliberately by this package."""


# --- geometry / map evaluation ---

class PoleAtCenter(GapfieldError):
    """An inversion map was evaluated at (or too close to) its own center."""


class PoleEncountered(GapfieldError):
    """An intermediate iterate of a map composition hit a disk center."""


class DegenerateI(GapfieldError):
    """The structural denominator of a closed-form map power is numerically zero."""


# --- series evaluation ---

class CoincidentPoints(GapfieldError):
    """Field point and source point coincide (log kernel singular)."""


class SingularSourcePoint(GapfieldError):
    """A reflected image of the field point landed on the source point.

    Raised when the argument of a series log/pole term falls below the
    degeneracy floor, which makes the term (not just the sum) singular.
    """


class TruncationFailure(GapfieldError):
    """Series tail estimate did not reach the requested tolerance within k_max."""


class DegenerateCorrection(GapfieldError):
    """Interior-source correction factor is infinite (contrast ratio equals one)."""


class DerivativeOrderUnsupported(GapfieldError):
    """Requested derivative order is outside the supported range."""


# --- quadrature / potentials ---

class QuadratureNonConvergent(GapfieldError):
    """Node doubling changed the integral by more than the allowed factor."""


# --- finite differences ---

class SolverDiverged(GapfieldError):
    """Sparse linear solve failed to reach the requested residual."""


class GapUnderresolved(GapfieldError):
    """Grid spacing is too coarse for the gap between the inclusions."""


# --- conformal reduction ---

class EqualRadii(GapfieldError):
    """Radius-equalizing map is not defined when the radii already agree."""


class MapDegenerate(GapfieldError):
    """Conformal map evaluated at or too near its pole."""
