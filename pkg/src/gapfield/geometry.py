"""Geometry of two nearly touching disks and the associated inversion maps.

Two disks of radius r1, r2 sit on the real axis with a gap of width eps
between them, symmetric about the origin:

    B1 = disk of radius r1 centered at  (eps/2 + r1, 0)
    B2 = disk of radius r2 centered at (-eps/2 - r2, 0)

Points are complex numbers (x1 + 1j*x2).  phi1 and phi2 are the inversions
through the two circles.  For unit radii the alternating composition
psi = phi2 o phi1 (phi1 applied first) is hyperbolic with real fixed points
sitting just inside each disk near the gap; powers of psi (and their
derivatives) have closed forms that stay bounded for arbitrarily large
iteration count, which is what the series evaluators downstream rely on.

All maps here act on the plane as "anti-Mobius" transformations: an inversion
is a Mobius transformation of the conjugated variable.  We track each
composition as a real 2x2 coefficient matrix plus a parity bit saying whether
it acts on z or on conj(z); real matrices commute with conjugation, so
composition is plain matrix multiplication and parity adds mod 2.
"""

from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

from .errors import DegenerateI, PoleAtCenter, PoleEncountered

_EPS = np.finfo(float).eps

# Absolute floor (relative to point magnitude) below which a map denominator
# counts as a pole hit rather than a finite value.
_POLE_TOL = 1e3 * _EPS


class Region(Enum):
    """Which piece of the plane a point belongs to."""

    B0 = "background"
    B1 = "inclusion_right"
    B2 = "inclusion_left"
    INTERFACE_B1 = "circle_right"
    INTERFACE_B2 = "circle_left"


class Frame(Enum):
    """Coordinate frame for map-power evaluation.

    ORIGINAL is the physical plane.  TRANSFORMED is the affine chart
    w = 2*a*z - (2*a**2 - 1) in which psi = phi2 o phi1 becomes
    w -> -1/w - 2*(2*a**2 - 1), with real fixed points.
    """

    ORIGINAL = "original"
    TRANSFORMED = "transformed"


@dataclass(frozen=True)
class Geometry:
    """Two-disk geometry parameterized by the gap width.

    Parameters
    ----------
    eps : float
        Gap width between the disks, > 0.
    r1, r2 : float
        Disk radii, > 0.  The inversion-composition machinery (psi_pow,
        i_k, fixed_points, d_psi_pow) requires r1 == r2 == 1; general
        radii are reduced to that case elsewhere.
    """

    eps: float
    r1: float = 1.0
    r2: float = 1.0

    def __post_init__(self):
        if not (self.eps > 0):
            raise ValueError("gap width eps must be positive")
        if not (self.r1 > 0 and self.r2 > 0):
            raise ValueError("radii must be positive")

    @property
    def c1(self):
        """Center of the right disk."""
        return complex(self.eps / 2 + self.r1, 0.0)

    @property
    def c2(self):
        """Center of the left disk."""
        return complex(-self.eps / 2 - self.r2, 0.0)

    @property
    def a(self):
        """Half-distance parameter a = 1 + eps/2 (unit-radius convention)."""
        return 1.0 + self.eps / 2

    @property
    def unit_radii(self):
        return self.r1 == 1.0 and self.r2 == 1.0

    def require_unit_radii(self):
        if not self.unit_radii:
            raise ValueError(
                "operation requires unit radii (r1 == r2 == 1); "
                "rescale or reduce the geometry first"
            )


@dataclass(frozen=True)
class FixedPoints:
    """Fixed points of psi = phi2 o phi1 in the transformed frame.

    lambda1 in (-1, 0) is repelling, lambda2 < -1 is attracting, and
    lambda1 * lambda2 == 1 exactly by construction.
    """

    lambda1: float
    lambda2: float


def classify_region(x, g, tol=0.0):
    """Classify a point against the two-disk geometry.

    A point within ``tol`` of either circle is tagged as interface;
    otherwise strict inequalities decide inclusion vs background.
    """
    x = complex(x)
    d1 = abs(x - g.c1)
    d2 = abs(x - g.c2)
    if abs(d1 - g.r1) <= tol:
        return Region.INTERFACE_B1
    if abs(d2 - g.r2) <= tol:
        return Region.INTERFACE_B2
    if d1 < g.r1:
        return Region.B1
    if d2 < g.r2:
        return Region.B2
    return Region.B0


def phi1(x, g):
    """Inversion through the right circle: c1 + r1**2 / conj(x - c1)."""
    x = complex(x)
    d = x - g.c1
    if abs(d) < _POLE_TOL * (1.0 + abs(g.c1)):
        raise PoleAtCenter("phi1 evaluated at the center of the right disk")
    return g.c1 + g.r1 ** 2 / d.conjugate()


def phi2(x, g):
    """Inversion through the left circle: c2 + r2**2 / conj(x - c2)."""
    x = complex(x)
    d = x - g.c2
    if abs(d) < _POLE_TOL * (1.0 + abs(g.c2)):
        raise PoleAtCenter("phi2 evaluated at the center of the left disk")
    return g.c2 + g.r2 ** 2 / d.conjugate()


# --------------------------------------------------------------------------
# real-matrix representation of the map algebra (unit radii)
# --------------------------------------------------------------------------

class MapWord:
    """A composition of inversions, stored as (real 2x2 matrix, parity).

    The map is z -> (m00*w + m01) / (m10*w + m11) with w = conj(z) when
    parity is odd and w = z when even.  Because the coefficient matrix is
    real, composing two words multiplies the matrices and xors the parities.
    """

    __slots__ = ("mat", "odd")

    def __init__(self, mat, odd):
        self.mat = np.asarray(mat, dtype=float)
        self.odd = bool(odd)

    def __call__(self, z):
        z = complex(z)
        w = z.conjugate() if self.odd else z
        m = self.mat
        den = m[1, 0] * w + m[1, 1]
        if abs(den) < _POLE_TOL * (1.0 + abs(w)) * (abs(m[1, 0]) + abs(m[1, 1])):
            raise PoleEncountered("map word evaluated at its pole")
        return (m[0, 0] * w + m[0, 1]) / den

    def after(self, other):
        """Composition self o other (apply other first)."""
        return MapWord(self.mat @ other.mat, self.odd ^ other.odd)

    def inverse(self):
        m = self.mat
        adj = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])
        return MapWord(adj, self.odd)


def phi1_word(g):
    """phi1 as a MapWord (unit radii)."""
    g.require_unit_radii()
    a = g.a
    return MapWord([[a, 1.0 - a * a], [1.0, -a]], odd=True)


def phi2_word(g):
    """phi2 as a MapWord (unit radii)."""
    g.require_unit_radii()
    a = g.a
    return MapWord([[-a, 1.0 - a * a], [1.0, a]], odd=True)


def chi(z, g):
    """Affine change of frame chi(z) = 2*a*z - (2*a**2 - 1)."""
    a = g.a
    return 2.0 * a * complex(z) - (2.0 * a * a - 1.0)


def chi_inv(w, g):
    """Inverse of chi."""
    a = g.a
    return (complex(w) + (2.0 * a * a - 1.0)) / (2.0 * a)


def chi_mat(g):
    """chi as a Mobius coefficient matrix (even parity)."""
    a = g.a
    return np.array([[2.0 * a, -(2.0 * a * a - 1.0)], [0.0, 1.0]])


def chi_inv_mat(g):
    a = g.a
    return np.array([[1.0 / (2.0 * a), (2.0 * a * a - 1.0) / (2.0 * a)], [0.0, 1.0]])


def fixed_points(g):
    """Fixed points of the transformed map w -> -1/w - 2*(2*a**2 - 1).

    Both roots of w**2 + 2*(2*a**2 - 1)*w + 1 = 0 are negative;
    lambda2 < -1 is computed from the stable root formula and
    lambda1 = 1/lambda2 so the product identity holds exactly.
    """
    g.require_unit_radii()
    a = g.a
    b = 2.0 * a * a - 1.0
    lam2 = -b - 2.0 * a * math.sqrt(a * a - 1.0)
    return FixedPoints(lambda1=1.0 / lam2, lambda2=lam2)


def i_k(z, k, g):
    """Structural denominator I_k(z) = (z - 1/lambda2) - |lambda2|**(-k) (z - lambda2).

    Transformed-frame quantity; it is the denominator of the closed form for
    the k/2-th map power and controls how close z is to the degenerate locus.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    lam2 = fixed_points(g).lambda2
    z = complex(z)
    s = abs(lam2) ** (-k)
    return (z - 1.0 / lam2) - s * (z - lam2)


def _psi_mat_transformed(k, g):
    """Coefficient matrix of the k-th power of the transformed map.

    All four entries stay bounded as k grows (the scale lambda2**(-2k)
    decays), so this form is safe for arbitrarily large k.
    """
    lam2 = fixed_points(g).lambda2
    u = (lam2 * lam2) ** (-float(k))  # lambda2**(-2k) > 0
    return np.array(
        [
            [lam2 - u / lam2, u - 1.0],
            [1.0 - u, u * lam2 - 1.0 / lam2],
        ]
    )


def psi_pow_word(k, g):
    """psi**k = (phi2 o phi1)**k as a MapWord in the original frame (even parity)."""
    g.require_unit_radii()
    p = _psi_mat_transformed(k, g)
    m = chi_inv_mat(g) @ p @ chi_mat(g)
    return MapWord(m, odd=False)


def psi_pow(z, k, g, frame=Frame.ORIGINAL):
    """k-th power of psi = phi2 o phi1, evaluated via the closed form.

    In the TRANSFORMED frame z is a point of the affine chart and the
    bounded matrix applies directly; in the ORIGINAL frame the matrix is
    conjugated by chi.  Raises DegenerateI when the denominator falls
    below the admissibility floor 1e3 * machine_eps * (1 + |z|).
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    g.require_unit_radii()
    z = complex(z)
    if frame == Frame.TRANSFORMED:
        m = _psi_mat_transformed(k, g)
    else:
        m = chi_inv_mat(g) @ _psi_mat_transformed(k, g) @ chi_mat(g)
    den = m[1, 0] * z + m[1, 1]
    if abs(den) < 1e3 * _EPS * (1.0 + abs(z)):
        raise DegenerateI(
            f"map-power denominator degenerate at k={k}: |den|={abs(den):.3e}"
        )
    return (m[0, 0] * z + m[0, 1]) / den


def psi_iterate(x, k, g):
    """k-fold literal iteration of psi = phi2 o phi1 (apply phi1, then phi2).

    Slower and less stable than psi_pow but independent of the closed form,
    which is exactly why it exists.  Raises PoleEncountered if an iterate
    hits a disk center.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    z = complex(x)
    for _ in range(k):
        try:
            z = phi1(z, g)
            z = phi2(z, g)
        except PoleAtCenter as exc:
            raise PoleEncountered(str(exc)) from exc
    return z


def d_psi_pow(z, k, order, g):
    """order-th complex derivative of the k-th power of psi, transformed frame.

    Closed form: with L = lambda2 and s = L**(-2k),

        D^n psi^k (z) = (L - 1/L)**2 * s * (-1)**(n-1) * n!
                        * (1 - s)**(n-1) / I_{2k}(z)**(n+1)

    which reduces to 1 at n = 1, k = 0.  Bounded in k for z away from the
    degenerate locus of I_{2k}.
    """
    if order < 1:
        raise ValueError("derivative order must be >= 1")
    if k < 0:
        raise ValueError("k must be >= 0")
    g.require_unit_radii()
    z = complex(z)
    lam2 = fixed_points(g).lambda2
    s = (lam2 * lam2) ** (-float(k))
    denom = i_k(z, 2 * k, g)
    if abs(denom) < 1e3 * _EPS * (1.0 + abs(z)):
        raise DegenerateI(
            f"I_{2 * k} degenerate at z={z!r}: |I|={abs(denom):.3e}"
        )
    n = order
    pref = (lam2 - 1.0 / lam2) ** 2 * s * (-1.0) ** (n - 1) * math.factorial(n)
    return pref * (1.0 - s) ** (n - 1) / denom ** (n + 1)


def gap_points(g, n=1):
    """Convenience: points on the gap segment between the disks.

    Returns the midpoint for n == 1, otherwise n points spread on the open
    segment (-eps/2, eps/2) of the real axis.
    """
    if n == 1:
        return [0j]
    ts = np.linspace(-0.5, 0.5, n + 2)[1:-1]
    return [complex(t * g.eps, 0.0) for t in ts]
