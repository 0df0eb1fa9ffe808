"""Volume potentials and the representation formula for the field.

The solution of the two-disk transmission problem with manufactured data
(f1, f2, f3) is, up to an additive constant,

    u(x) = -w1(x) - w2(x) - w0(x) + w3(x)

where w_j (j = 0, 1, 2) integrates the y-gradient of the kernel against
(f1, f2) over region j, and w3 integrates the kernel itself against f3
over the whole support.  Expanding the kernel's reflection series turns
every w into sums of two primitive potentials composed with image maps:

    h_j(t) = d/dy-log potential of (f1, f2) over region j   (pole kernel)
    g_j(t) = log potential of f3 over region j              (log kernel)

The series engine evaluates those map-composed sums directly (all
derivative orders in one pass); h_pot / g_pot also exist standalone as
plain free-space quadratures, mainly as oracles.

Everything here is normalized so that u solves  div(a grad u) = f3 + div f
with the standard (2*pi)^{-1} log kernel; the kernel module's G carries
the bare 2*pi normalization and the division happens in the assembly.
"""

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import geometry as geo
from . import series
from .errors import QuadratureNonConvergent
from .greens import map_cache

TWO_PI = 2.0 * np.pi

_REGION_OF = {0: geo.Region.B0, 1: geo.Region.B1, 2: geo.Region.B2}


@dataclass(frozen=True)
class Quadrature:
    """Tensor Gauss-Legendre rule in polar coordinates about the support center.

    n_radial nodes per radial subinterval, n_angular angles over [0, 2*pi);
    region boundaries are handled by clipping each ray's radial extent
    against the two circles, so integrands stay smooth on every subinterval.
    tol is the node-doubling acceptance threshold used by h_pot/g_pot.
    """

    n_radial: int = 48
    n_angular: int = 64
    tol: float = 1e-9

    def doubled(self):
        return replace(self, n_radial=2 * self.n_radial, n_angular=2 * self.n_angular)


@dataclass(frozen=True)
class SourceData:
    """Manufactured source fields; callables take complex arrays.

    f1, f2 are the divergence-form components, f3 the scalar part; None
    means identically zero.  support_center/support_radius bound the union
    of all supports (quadrature never looks outside that disk).  patches
    optionally splits the support into disjoint disks -- one polar rule is
    laid per patch, which keeps far-apart lobes individually resolved.
    """

    f1: object = None
    f2: object = None
    f3: object = None
    support_center: complex = 0j
    support_radius: float = 1.0
    patches: tuple = None      # ((center, radius), ...) or None for one patch

    @property
    def has_vector_part(self):
        return self.f1 is not None or self.f2 is not None

    @property
    def patch_list(self):
        if self.patches is not None:
            return self.patches
        return ((self.support_center, self.support_radius),)


# --- the smooth compactly supported profile used by the manufactured family

@lru_cache(maxsize=None)
def _bump_mass_unit():
    # integral of exp(-q^2/(1-q^2)) over the unit disk (radius coordinate q)
    xg, wg = np.polynomial.legendre.leggauss(200)
    q = 0.5 * (xg + 1.0)
    w = 0.5 * wg
    return TWO_PI * float(np.sum(w * q * np.exp(-q * q / (1.0 - q * q))))


def bump_profile(dist, radius):
    """Smooth bump: ~ Gaussian near the center, identically 0 for dist >= radius."""
    q = np.asarray(dist, dtype=float) / radius
    out = np.zeros_like(q)
    inside = q < 1.0
    qi = q[inside]
    out[inside] = np.exp(-qi * qi / (1.0 - qi * qi))
    return out


def bump_source(center, radius):
    """Unit-mass smooth bump at `center`, supported in the given radius."""
    center = complex(center)
    norm = 1.0 / (radius ** 2 * _bump_mass_unit())

    def f3(y):
        return norm * bump_profile(np.abs(np.asarray(y) - center), radius)

    return SourceData(f3=f3, support_center=center, support_radius=radius)


def mirrored_bump_source(center=0.45 + 0j, radius=0.25):
    """Bump at `center` minus its mirror through the origin (total mass 0).

    The default puts the positive lobe inside the right disk and the
    negative one inside the left disk, which drives a current across the
    gap along the line of centers -- the configuration where gradient
    concentration (or its absence) in the gap is actually visible.
    """
    center = complex(center)
    norm = 1.0 / (radius ** 2 * _bump_mass_unit())

    def f3(y):
        d = np.asarray(y)
        return norm * (
            bump_profile(np.abs(d - center), radius)
            - bump_profile(np.abs(d + center), radius)
        )

    return SourceData(
        f3=f3,
        support_center=0j,
        support_radius=abs(center) + radius,
        patches=((center, radius), (-center, radius)),
    )


# --- region-clipped polar quadrature ------------------------------------

@lru_cache(maxsize=None)
def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _ray_disk_interval(s0, theta, c, r):
    """Parameter interval of {s0 + rho*e^{i theta} : rho} inside disk(c, r)."""
    e = np.exp(1j * theta)
    b = ((c - s0) * np.conj(e)).real
    qq = abs(c - s0) ** 2 - r * r
    disc = b * b - qq
    if disc <= 0.0:
        return None
    s = np.sqrt(disc)
    return (b - s, b + s)


def _subtract(intervals, cut):
    if cut is None:
        return intervals
    lo, hi = cut
    out = []
    for a, b in intervals:
        if hi <= a or lo >= b:
            out.append((a, b))
            continue
        if lo > a:
            out.append((a, lo))
        if hi < b:
            out.append((hi, b))
    return out


def region_nodes(j, g, src, quad):
    """Quadrature nodes and weights for (region j) intersect (support).

    One polar rule per support patch, centered on the patch; each angle's
    radial range is clipped against the two circles so every subinterval
    lies in one region.  Returns (nodes, weights) arrays, possibly empty.
    """
    xr, wr = _gl(quad.n_radial)
    xt, wt = _gl(quad.n_angular)
    thetas = np.pi * (xt + 1.0)          # (0, 2*pi)
    wthetas = np.pi * wt
    nodes = []
    weights = []
    for pc, pr in src.patch_list:
        s0 = complex(pc)
        R = float(pr)
        for theta, wth in zip(thetas, wthetas):
            i1 = _ray_disk_interval(s0, theta, g.c1, g.r1)
            i2 = _ray_disk_interval(s0, theta, g.c2, g.r2)
            if j == 1:
                ivs = [] if i1 is None else [(max(0.0, i1[0]), min(R, i1[1]))]
            elif j == 2:
                ivs = [] if i2 is None else [(max(0.0, i2[0]), min(R, i2[1]))]
            else:
                ivs = _subtract(_subtract([(0.0, R)], i1), i2)
            for lo, hi in ivs:
                if hi - lo <= 0.0:
                    continue
                mid = 0.5 * (hi + lo)
                hal = 0.5 * (hi - lo)
                rho = mid + hal * xr
                w = wth * hal * wr * rho
                nodes.append(s0 + rho * np.exp(1j * theta))
                weights.append(w)
    if not nodes:
        return np.empty(0, dtype=complex), np.empty(0)
    return np.concatenate(nodes), np.concatenate(weights)


def _channel_weights(nodes, w, src):
    """(pole-kernel weights, log-kernel weights) for a node set."""
    hw = None
    gw = None
    if src.has_vector_part:
        f1 = src.f1(nodes) if src.f1 is not None else 0.0
        f2 = src.f2(nodes) if src.f2 is not None else 0.0
        hw = w * (np.asarray(f1, dtype=float) + 1j * np.asarray(f2, dtype=float))
    if src.f3 is not None:
        gw = w * np.asarray(src.f3(nodes), dtype=float)
    return hw, gw


# --- standalone free-space potentials (quadrature oracles) ---------------

def _h_free(x, nodes, hw):
    if nodes.size == 0 or hw is None:
        return 0.0
    return -np.sum(hw / (complex(x) - nodes)).real


def _g_free(x, nodes, gw):
    if nodes.size == 0 or gw is None:
        return 0.0
    return float(np.sum(gw * np.log(np.abs(complex(x) - nodes))))


def _doubling_check(f, quad, label):
    v1 = f(quad)
    v2 = f(quad.doubled())
    if abs(v2 - v1) > quad.tol * (1.0 + abs(v2)):
        raise QuadratureNonConvergent(
            f"{label}: node doubling moved the value by {abs(v2 - v1):.3e}"
        )
    return v2


def h_pot(j, x, s, q, g):
    """Free-space potential of the vector data over region j (value at x):

        h_j(x) = integral over region j of  d/dy_i log|x-y| * f_i(y) dy

    The geometry defines the region decomposition, hence the extra argument.
    """
    def run(quad):
        nodes, w = region_nodes(j, g, s, quad)
        hw, _ = _channel_weights(nodes, w, s)
        return _h_free(x, nodes, hw)

    return _doubling_check(run, q, f"h_pot region {j}")


def g_pot(j, x, s, q, g):
    """Free-space log potential of f3 over region j (value at x)."""
    def run(quad):
        nodes, w = region_nodes(j, g, s, quad)
        _, gw = _channel_weights(nodes, w, s)
        return _g_free(x, nodes, gw)

    return _doubling_check(run, q, f"g_pot region {j}")


@dataclass(frozen=True)
class PotentialValue:
    value: float
    components: tuple          # (w0, w1, w2, w3)
    quad_err_est: float
    series_err_est: float


def _assemble(x, s, c, g, p, quad, nmax, k_init):
    """One full series pass: per-order channel sums for every region."""
    x = complex(x)
    xr = geo.classify_region(x, g)
    cache = map_cache(g)
    picks = {}           # (region j) -> (H, G)
    k_used = 0
    est = 0.0
    for j in (1, 2, 0):
        nodes, w = region_nodes(j, g, s, quad)
        if nodes.size == 0:
            continue
        hw, gw = _channel_weights(nodes, w, s)
        if hw is None and gw is None:
            continue
        table = series.term_table(xr, _REGION_OF[j], c, corrected=True)
        srcs = series.make_srcs(nodes, hw, gw, g)
        H, G, K, e = series.eval_case(
            x, table, c, cache, srcs, nmax, p.tol, p.k_max, k_init=k_init
        )
        picks[j] = (H, G)
        k_used = max(k_used, K)
        est += e
    return picks, k_used, est


def _order_value(picks, m1, m2):
    """(d/dx)^(m1,m2) of (-w0 - w1 - w2 + w3), and the components at order 0."""
    comps = [0.0, 0.0, 0.0, 0.0]
    for j, (H, G) in picks.items():
        comps[j] = -series.derivative_pick(H, m1, m2) / TWO_PI
        comps[3] += series.derivative_pick(G, m1, m2) / TWO_PI
    tot = -comps[1] - comps[2] - comps[0] + comps[3]
    return tot, tuple(comps)


def u_rep(x, s, c, g, p, q, check_quad=True):
    """Representation-formula value at x; see the module docstring."""
    picks, k_used, est = _assemble(x, s, c, g, p, q, nmax=0, k_init=64)
    val, comps = _order_value(picks, 0, 0)
    qerr = np.nan
    if check_quad:
        picks2, _, _ = _assemble(x, s, c, g, p, q.doubled(), nmax=0, k_init=k_used)
        val2, _ = _order_value(picks2, 0, 0)
        qerr = abs(val2 - val)
    return PotentialValue(val, comps, qerr, est)


def d_u_rep(x, s, c, g, p, q, multi_index, check_quad=False):
    """Mixed partial of the representation formula at x (a plain float)."""
    m1, m2 = multi_index
    if m1 < 0 or m2 < 0 or not (1 <= m1 + m2 <= 6):
        raise ValueError(f"multi-index {multi_index} outside 1 <= m <= 6")
    picks, k_used, _ = _assemble(x, s, c, g, p, q, nmax=m1 + m2, k_init=64)
    val, _ = _order_value(picks, m1, m2)
    if check_quad:
        picks2, _, _ = _assemble(
            x, s, c, g, p, q.doubled(), nmax=m1 + m2, k_init=k_used
        )
        val2, _ = _order_value(picks2, m1, m2)
        if abs(val2 - val) > 100.0 * q.tol * (1.0 + abs(val2)):
            raise QuadratureNonConvergent(
                f"derivative {multi_index}: doubling moved value by {abs(val2 - val):.3e}"
            )
    return val


def all_orders(x, s, c, g, p, q, mmax, k_init=64):
    """All mixed partials (m1, m2) with m1 + m2 <= mmax in one series pass.

    Returns (dict (m1, m2) -> value, components at order 0, k_used, est_tail).
    Shared by the sweep driver, which needs several orders per probe point.
    """
    picks, k_used, est = _assemble(x, s, c, g, p, q, nmax=mmax, k_init=k_init)
    out = {}
    comps = (0.0, 0.0, 0.0, 0.0)
    for m in range(mmax + 1):
        for m1 in range(m, -1, -1):
            v, cpg = _order_value(picks, m1, m - m1)
            out[(m1, m - m1)] = v
            if m == 0:
                comps = cpg
    return out, comps, k_used, est
