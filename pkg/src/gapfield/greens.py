"""Point-source kernel for the two-disk transmission problem.

green(x, y) evaluates the kernel G with a point source at y: away from x = y
it is harmonic in each region, G and the flux a * dG/dnu are continuous
across both circles, and near y it behaves like log|x-y| / a(y).  The raw
reflection sum green_script is kept public because interior sources need a
center correction on top of it (and the correction itself is a reflection
sum with the source at a disk center).

Normalization: a(x) Delta_x G(x, y) = 2*pi*delta(x - y); consumers that
want unit mass divide by 2*pi (the potential assembly does).

Derivatives are term-wise and closed-form: every term is Re F(x) with F
holomorphic (after the parity trick in the series module), so mixed
partials only need complex derivatives of Mobius-composed logs.
"""

from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from . import series
from .errors import (
    CoincidentPoints,
    DegenerateCorrection,
    DerivativeOrderUnsupported,
)

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Conductivity:
    """Conductivities (k1, k2) of the two disks against background k0 = 1."""

    k1: float
    k2: float
    k0: float = 1.0

    def __post_init__(self):
        if not (self.k1 > 0 and self.k2 > 0):
            raise ValueError("conductivities must be positive")
        if self.k0 != 1.0:
            raise ValueError("background conductivity is fixed at 1")

    @property
    def alpha(self):
        return (self.k1 - 1.0) / (self.k1 + 1.0)

    @property
    def beta(self):
        return (self.k2 - 1.0) / (self.k2 + 1.0)

    @property
    def gamma(self):
        return -self.alpha * self.beta

    @property
    def theorem_regime(self):
        """True in the bounded-gradient window: k1 < 1 < k2 with gamma in (1/2, 1)."""
        return (
            0.0 < self.k1 < 1.0
            and self.k2 > 1.0
            and 0.5 < self.gamma < 1.0
        )


@dataclass(frozen=True)
class GreenParams:
    """Series evaluation controls.

    tol is the absolute tail target for the truncated reflection series;
    k_max caps the truncation index; deriv_step is the step used by
    finite-difference cross-checks of the analytic derivatives.
    """

    tol: float = 1e-10
    k_max: int = 10 ** 6
    deriv_step: float = 1e-5


@dataclass(frozen=True)
class GreenValue:
    value: float
    k_used: int
    est_tail: float


_caches = {}


def map_cache(g):
    """Shared per-geometry matrix cache (keyed by the gap width)."""
    key = (g.eps, g.r1, g.r2)
    c = _caches.get(key)
    if c is None:
        c = series.MapCache(g)
        _caches[key] = c
    return c


def _check_points(x, y):
    x = complex(x)
    y = complex(y)
    if abs(x - y) <= 1e3 * _EPS * (1.0 + abs(x) + abs(y)):
        raise CoincidentPoints(f"x = y = {x!r}")
    return x, y


def _eval(x, y, c, g, p, corrected, nmax):
    g.require_unit_radii()
    x, y = _check_points(x, y)
    xr = geo.classify_region(x, g)
    yr = geo.classify_region(y, g)
    if corrected:
        if yr == geo.Region.B1 and abs(1.0 - c.alpha) < 1e-12:
            raise DegenerateCorrection("alpha = 1: interior-source factor diverges")
        if yr == geo.Region.B2 and abs(1.0 - c.beta) < 1e-12:
            raise DegenerateCorrection("beta = 1: interior-source factor diverges")
    table = series.term_table(xr, yr, c, corrected=corrected)
    srcs = series.make_srcs(y, None, np.array([1.0]), g)
    _, G, k_used, est = series.eval_case(
        x, table, c, map_cache(g), srcs, nmax, p.tol, p.k_max
    )
    return G, k_used, est


def green_script(x, y, c, g, p):
    """Raw reflection sum (no interior-source correction)."""
    G, k_used, est = _eval(x, y, c, g, p, corrected=False, nmax=0)
    return GreenValue(float(G[0].real), k_used, est)


def green(x, y, c, g, p):
    """The kernel G(x, y), with the center correction for interior sources."""
    G, k_used, est = _eval(x, y, c, g, p, corrected=True, nmax=0)
    return GreenValue(float(G[0].real), k_used, est)


def d_green(x, y, c, g, p, multi_index):
    """Mixed partial d^m1_x1 d^m2_x2 G(x, y), term-wise analytic."""
    m1, m2 = multi_index
    m = m1 + m2
    if m1 < 0 or m2 < 0 or m < 1 or m > 6:
        raise DerivativeOrderUnsupported(
            f"multi-index {multi_index} outside 1 <= m1+m2 <= 6"
        )
    G, k_used, est = _eval(x, y, c, g, p, corrected=True, nmax=m)
    return GreenValue(series.derivative_pick(G, m1, m2), k_used, est)
