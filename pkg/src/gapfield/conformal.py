"""Reduction of unequal radii to the symmetric two-disk configuration.

For ``r2 > r1`` there is an inversion ``T(z) = 1/(z - z0)`` with a real
pole ``z0`` that maps the two disks to disks of one common radius.  The
pole is the positive root

    z0 = sqrt( (2 r1 r2 / (r2-r1))**2
               + 2 eps r1 r2 (r1+r2) / (r2-r1)**2
               + eps**2/4 * (((r1+r2)/(r2-r1))**2 - 1) )
         + eps/2 * (r1+r2)/(r2-r1)  +  2 r1 r2 / (r2-r1),

which always lies beyond the small disk (``z0 > eps/2 + 4 r1``), so the
map is smooth on a neighborhood of both inclusions.  A rigid motion
after the inversion re-centers the image disks into the standard
configuration (equal disks facing each other across a gap on the real
axis), and that composed Moebius map is what `build_reduction` hands
out.  Equal radii are a degenerate direction of the formula; that case
is a plain rescaling (`scaling_reduction`).

Conformal maps preserve harmonicity and the divergence-form structure
with scalar piecewise-constant coefficients, so conductivities carry
over unchanged while volume densities pick up the |map'|**2 Jacobian.
"""

import numpy as np

from .errors import EqualRadii, MapDegenerate
from .geometry import Geometry


class ConformalReduction(object):
    """A disk-preserving reduction to the equal-radius configuration.

    Attributes
    ----------
    z0 : float or None
        Pole of the inversion in the canonical orientation (smaller
        disk on the right); None for the pure-scaling branch.
    forward, inverse : callables
        The composed map and its inverse; complex in, complex out.
    deriv : callable
        Complex derivative of `forward`.
    mapped_geometry : Geometry
        Equal-radius configuration the disks land on.
    radius : float
        Common radius of the mapped disks.
    centers_raw : (complex, complex)
        Raw inversion images of the two disks' centers before the
        re-centering motion (the displayed center formulas).
    radii_raw : (float, float)
        The two mapped radii evaluated independently from the displayed
        radius formulas; equal up to roundoff by construction of z0.
    reflected : bool
        True when the input had r1 > r2 and the construction ran on the
        reflected configuration.
    """

    def __init__(self, z0, forward, inverse, deriv, mapped_geometry,
                 radius, centers_raw, radii_raw=None, reflected=False):
        self.z0 = z0
        self.forward = forward
        self.inverse = inverse
        self.deriv = deriv
        self.mapped_geometry = mapped_geometry
        self.radius = radius
        self.centers_raw = centers_raw
        self.radii_raw = (radius, radius) if radii_raw is None else radii_raw
        self.reflected = reflected

    def deriv_abs(self, z):
        return np.abs(self.deriv(z))


def _pole(eps, r1, r2):
    # positive root; the negative branch violates z0 > eps/2 + 4 r1
    d = r2 - r1
    under = ((2.0 * r1 * r2 / d) ** 2
             + 2.0 * eps * r1 * r2 * (r1 + r2) / d ** 2
             + 0.25 * eps ** 2 * (((r1 + r2) / d) ** 2 - 1.0))
    return np.sqrt(under) + 0.5 * eps * (r1 + r2) / d + 2.0 * r1 * r2 / d


def build_reduction(g):
    """Reduction of a two-disk geometry to equal radii.

    Parameters
    ----------
    g : Geometry
        Disk configuration; r1 = r2 raises EqualRadii (use
        `scaling_reduction`), r1 > r2 is handled by reflecting, building
        the r2 > r1 reduction and reflecting back.

    Returns
    -------
    ConformalReduction
    """
    eps, r1, r2 = g.eps, g.r1, g.r2
    if r1 == r2 or abs(r2 - r1) < 1e-12 * max(r1, r2):
        raise EqualRadii("equal radii: use scaling_reduction")
    if r1 > r2:
        red = build_reduction(Geometry(eps, r2, r1))
        fwd_r, inv_r, der_r = red.forward, red.inverse, red.deriv
        return ConformalReduction(
            red.z0,
            lambda z: -fwd_r(-np.asarray(z, dtype=complex)),
            lambda w: -inv_r(-np.asarray(w, dtype=complex)),
            lambda z: der_r(-np.asarray(z, dtype=complex)),
            red.mapped_geometry, red.radius,
            red.centers_raw, red.radii_raw, reflected=True)

    z0 = _pole(eps, r1, r2)
    c1 = eps / 2.0 + r1          # center of the right (small) disk
    c2 = -eps / 2.0 - r2
    if abs(z0 - c1) <= r1 or abs(z0 - c2) <= r2:
        raise MapDegenerate("pole fell inside a disk; formula violated")

    den1 = r1 ** 2 - abs(z0 - eps / 2.0 - r1) ** 2
    den2 = r2 ** 2 - abs(z0 + eps / 2.0 + r2) ** 2
    q1 = (np.conj(z0) - eps / 2.0 - r1) / den1
    q2 = (np.conj(z0) + eps / 2.0 + r2) / den2
    rho1 = r1 / abs(den1)
    rho2 = r2 / abs(den2)
    rho = 0.5 * (rho1 + rho2)

    eps_m = (q2 - q1).real - 2.0 * rho
    if eps_m <= 0.0:
        raise MapDegenerate("mapped disks overlap")
    mid = 0.5 * (q1 + q2)

    def forward(z):
        return mid - 1.0 / (np.asarray(z, dtype=complex) - z0)

    def inverse(w):
        return z0 + 1.0 / (mid - np.asarray(w, dtype=complex))

    def deriv(z):
        return 1.0 / (np.asarray(z, dtype=complex) - z0) ** 2

    mapped = Geometry(eps_m, rho, rho)
    return ConformalReduction(float(z0), forward, inverse, deriv, mapped,
                              float(rho), (complex(q1), complex(q2)),
                              (float(rho1), float(rho2)))


def scaling_reduction(g):
    """Equal-radius branch: rescale by 1/r1 to the unit-radius setup."""
    if g.r1 != g.r2:
        raise ValueError("scaling branch requires equal radii")
    s = 1.0 / g.r1
    mapped = Geometry(g.eps * s, 1.0, 1.0)
    return ConformalReduction(
        None,
        lambda z: s * np.asarray(z, dtype=complex),
        lambda w: np.asarray(w, dtype=complex) / s,
        lambda z: s * np.ones_like(np.asarray(z, dtype=complex)),
        mapped, 1.0, (complex(mapped.c1), complex(mapped.c2)))


def circle_fit(pts):
    """Least-squares circle through complex points.

    Returns (center, radius, residual) where the residual is the
    maximum absolute deviation of |pt - center| from the radius.
    """
    pts = np.asarray(pts, dtype=complex)
    x, y = pts.real, pts.imag
    A = np.column_stack([2 * x, 2 * y, np.ones_like(x)])
    b = x ** 2 + y ** 2
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    cx, cy, c = sol
    r = np.sqrt(c + cx ** 2 + cy ** 2)
    res = np.max(np.abs(np.hypot(x - cx, y - cy) - r))
    return complex(cx, cy), float(r), float(res)


def pushforward_harmonic_check(reduction, func, points=None, h=1e-3):
    """Discrete-Laplacian residual of func composed with the reduction.

    `func` should be harmonic near the image of the sample points; the
    composition with the forward map must then again be harmonic.  The
    report carries the five-point Laplacian residual at each point.
    """
    if points is None:
        points = 0.25 * np.exp(2j * np.pi * np.arange(8) / 8.0)
    points = np.asarray(points, dtype=complex)

    def comp(z):
        return np.real(func(reduction.forward(z)))

    lap = (comp(points + h) + comp(points - h) + comp(points + 1j * h)
           + comp(points - 1j * h) - 4.0 * comp(points)) / h ** 2
    resid = np.abs(lap)
    return {"points": points, "residuals": resid,
            "max_residual": float(resid.max()),
            "passes": bool(resid.max() < 1e-6)}
