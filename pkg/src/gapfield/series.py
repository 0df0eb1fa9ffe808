"""Image-series term tables and the shared evaluation engine.

The kernel solution for two unit disks is a weighted sum of log kernels
composed with words in the two circle inversions.  Which words appear, and
with which coefficients, depends only on (region of x, region of y); that
case split is encoded here once, as data, and consumed by both the
point-source evaluators (greens) and the volume-potential evaluators
(potentials).

Each table entry is a TermBlock: a scalar prefactor, a map family (either a
single word or a k-indexed family whose k-th member carries an extra weight
(alpha*beta)**k), a target (the source point itself, or one of the disk
centers for the interior-source correction), and a "fused" flag.  A fused
entry drops the log of the word's Mobius denominator; that piece is exactly
the center log it is paired with, so fusing evaluates the pair as one
affine log kernel and never forms the two canceling singular halves.

Words with odd parity act on conj(z); since all coefficient matrices are
real this is equivalent to conjugating the source nodes (and the complex
pole-kernel weights), after which every term is holomorphic in x and
mixed partials come from powers: d^p_x1 d^q_x2 Re F = Re[i**q F^(p+q)].
"""

from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from ._kernels import block_pot
from .errors import PoleEncountered, SingularSourcePoint, TruncationFailure

_EPS = np.finfo(float).eps
_SING_FLOOR = 1e3 * _EPS

TARGET_Y = "y"
TARGET_C1 = "c1"
TARGET_C2 = "c2"

# family names; the *_c families iterate in k with weight (alpha*beta)**k
F_IDENT = "ident"
F_PHI1 = "phi1"
F_PHI2 = "phi2"
F_PSI21 = "psi21"            # (phi2 phi1)^k
F_PSI12 = "psi12"            # (phi1 phi2)^k
F_PSI21_PHI2 = "psi21_phi2"  # (phi2 phi1)^k phi2
F_PSI12_PHI1 = "psi12_phi1"  # (phi1 phi2)^k phi1

_SINGLE_FAMILIES = (F_IDENT, F_PHI1, F_PHI2)
_ODD_FAMILIES = (F_PHI1, F_PHI2, F_PSI21_PHI2, F_PSI12_PHI1)


@dataclass(frozen=True)
class TermBlock:
    coef: float
    family: str
    k_start: int = 0
    target: str = TARGET_Y
    fused: bool = False


class MapCache:
    """Per-geometry cache of family coefficient matrices.

    Matrices are stored flat as (K, 4) rows (A, B, C, D) ready for the
    kernel; arrays grow geometrically and are sliced on request, so a
    sweep over many evaluation points builds them exactly once.
    """

    def __init__(self, g):
        g.require_unit_radii()
        self.g = g
        fp = geo.fixed_points(g)
        self.lam2 = fp.lambda2
        # contraction ratio of consecutive psi-word images
        self.decay = 1.0 / (fp.lambda2 * fp.lambda2)
        self._chi = geo.chi_mat(g)
        self._chi_inv = geo.chi_inv_mat(g)
        self._m1 = geo.phi1_word(g).mat
        self._m2 = geo.phi2_word(g).mat
        self._store = {}

    def _psi21_block(self, K):
        lam2 = self.lam2
        u = self.decay ** np.arange(K, dtype=float)
        p = np.empty((K, 2, 2))
        p[:, 0, 0] = lam2 - u / lam2
        p[:, 0, 1] = u - 1.0
        p[:, 1, 0] = 1.0 - u
        p[:, 1, 1] = u * lam2 - 1.0 / lam2
        return self._chi_inv @ p @ self._chi

    def _build(self, family, K):
        if family == F_IDENT:
            return np.array([[1.0, 0.0, 0.0, 1.0]])
        if family == F_PHI1:
            return self._m1.reshape(1, 4).copy()
        if family == F_PHI2:
            return self._m2.reshape(1, 4).copy()
        psi21 = self._psi21_block(K)
        if family == F_PSI21:
            out = psi21
        elif family == F_PSI21_PHI2:
            out = psi21 @ self._m2
        else:
            # adjugate inverts a Mobius matrix (projective scale is free,
            # but it also keeps det > 0, which the pole kernels rely on)
            psi12 = np.empty_like(psi21)
            psi12[:, 0, 0] = psi21[:, 1, 1]
            psi12[:, 0, 1] = -psi21[:, 0, 1]
            psi12[:, 1, 0] = -psi21[:, 1, 0]
            psi12[:, 1, 1] = psi21[:, 0, 0]
            if family == F_PSI12:
                out = psi12
            elif family == F_PSI12_PHI1:
                out = psi12 @ self._m1
            else:
                raise ValueError(f"unknown family {family!r}")
        return np.ascontiguousarray(out.reshape(K, 4))

    def family(self, family, K):
        """(K, 4) coefficient rows for terms k = 0..K-1, plus the parity."""
        if family in _SINGLE_FAMILIES:
            K = 1
        have = self._store.get(family)
        if have is None or have.shape[0] < K:
            grow = K if family in _SINGLE_FAMILIES else max(K, 8)
            have = self._build(family, grow)
            self._store[family] = have
        return have[:K], family in _ODD_FAMILIES


def term_table(x_region, y_region, cond, corrected=True):
    """Series term table for G(x, y) with x, y in the given regions.

    x on an interface uses the closure branch of the matching disk.  With
    corrected=True the table is for the actual kernel (interior sources
    get the center-correction entries and the fused pairing that removes
    the spurious center singularity); corrected=False gives the raw
    reflection sum, which is what the correction itself is built from.
    """
    R = geo.Region
    if x_region == R.INTERFACE_B1:
        x_region = R.B1
    elif x_region == R.INTERFACE_B2:
        x_region = R.B2
    if y_region in (R.INTERFACE_B1, R.INTERFACE_B2):
        y_region = R.B0
    al, be = cond.alpha, cond.beta
    k1, k2 = cond.k1, cond.k2

    if y_region == R.B0:
        if x_region == R.B1:
            t = [
                TermBlock(2.0 / (k1 + 1.0), F_PSI12),
                TermBlock(-2.0 * be / (k1 + 1.0), F_PSI21_PHI2),
            ]
        elif x_region == R.B2:
            t = [
                TermBlock(2.0 / (k2 + 1.0), F_PSI21),
                TermBlock(-2.0 * al / (k2 + 1.0), F_PSI12_PHI1),
            ]
        else:
            t = [
                TermBlock(1.0, F_IDENT),
                TermBlock(1.0, F_PSI12, k_start=1),
                TermBlock(1.0, F_PSI21, k_start=1),
                TermBlock(-be, F_PSI21_PHI2),
                TermBlock(-al, F_PSI12_PHI1),
            ]
        return t

    if y_region == R.B1:
        s1 = -4.0 * be / (k1 + 1.0) ** 2
        if x_region == R.B1:
            t = [
                TermBlock(1.0 / k1, F_IDENT),
                TermBlock(al / k1, F_PHI1, fused=corrected),
                TermBlock(s1, F_PSI21_PHI2),
            ]
            if corrected:
                t.append(TermBlock(al / (1.0 - al) * s1, F_PSI21_PHI2, target=TARGET_C1))
        elif x_region == R.B0:
            t = [
                TermBlock(2.0 / (k1 + 1.0), F_PSI21),
                TermBlock(-2.0 * be / (k1 + 1.0), F_PSI21_PHI2),
            ]
            if corrected:
                t += [
                    TermBlock(al, F_PSI21, target=TARGET_C1),
                    TermBlock(-al * be, F_PSI21_PHI2, target=TARGET_C1),
                ]
        else:
            c = 4.0 / ((k1 + 1.0) * (k2 + 1.0))
            t = [TermBlock(c, F_PSI21)]
            if corrected:
                t.append(TermBlock(al / (1.0 - al) * c, F_PSI21, target=TARGET_C1))
        return t

    # y in B2: mirror of the B1 case
    s2 = -4.0 * al / (k2 + 1.0) ** 2
    if x_region == R.B2:
        t = [
            TermBlock(1.0 / k2, F_IDENT),
            TermBlock(be / k2, F_PHI2, fused=corrected),
            TermBlock(s2, F_PSI12_PHI1),
        ]
        if corrected:
            t.append(TermBlock(be / (1.0 - be) * s2, F_PSI12_PHI1, target=TARGET_C2))
    elif x_region == R.B0:
        t = [
            TermBlock(2.0 / (k2 + 1.0), F_PSI12),
            TermBlock(-2.0 * al / (k2 + 1.0), F_PSI12_PHI1),
        ]
        if corrected:
            t += [
                TermBlock(be, F_PSI12, target=TARGET_C2),
                TermBlock(-al * be, F_PSI12_PHI1, target=TARGET_C2),
            ]
    else:
        c = 4.0 / ((k1 + 1.0) * (k2 + 1.0))
        t = [TermBlock(c, F_PSI12)]
        if corrected:
            t.append(TermBlock(be / (1.0 - be) * c, F_PSI12, target=TARGET_C2))
    return t


def _den_correction(x, mats, coefs, gw_sum, nmax):
    """Map-denominator part of the log-kernel derivatives, summed over k.

    For each term the full log kernel is log|t| - log|C x + D|; the kernel
    routine returns only the numerator sums, and this adds the rest (it is
    node independent, so it only needs the total log weight).
    """
    C = mats[:, 2]
    D = mats[:, 3]
    Q = C * x + D
    aQ = np.abs(Q)
    if np.any(aQ < _SING_FLOOR * (np.abs(C) * abs(x) + np.abs(D) + 1e-300)):
        raise PoleEncountered("evaluation point sits on a pole of an image map")
    out = np.zeros(nmax + 1, dtype=complex)
    last = np.zeros(nmax + 1)
    v = gw_sum * coefs * np.log(aQ)
    out[0] = -np.sum(v)
    last[0] = abs(v[-1])
    if nmax >= 1:
        r = C / Q
        rpow = np.ones_like(r)
        fact = 1.0
        sgn = 1.0
        for n in range(1, nmax + 1):
            rpow = rpow * r
            v = gw_sum * coefs * rpow
            out[n] = -sgn * fact * np.sum(v)
            last[n] = abs(v[-1])
            fact *= n
            sgn = -sgn
    return out, last


def eval_case(x, table, cond, cache, srcs, nmax, tol, k_max, k_init=64):
    """Evaluate one region-case series at a point, to all orders 0..nmax.

    Parameters
    ----------
    x : complex
        Evaluation point.
    table : list of TermBlock
    cond : conductivity pair (alpha, beta used for the series weights)
    cache : MapCache for the geometry
    srcs : dict target -> (nodes, hw, gw)
        Source nodes and channel weights per target.  hw weights the pole
        kernel (complex), gw the log kernel (float); either may be None.
        Center targets are single nodes created by the caller.
    nmax, tol, k_max : order cap, absolute tail tolerance, series cap.
    k_init : starting truncation length (doubled until the tail estimate
        passes; pass a larger value to skip warm-up rounds).

    Returns
    -------
    H, G : complex arrays (nmax+1,) -- pole- and log-channel sums.
    k_used : int
    est_tail : float
    """
    ab = cond.alpha * cond.beta
    gamma = max(abs(ab), cache.decay)
    # series length needed only if some k-family is actually present
    has_series = any(b.family not in _SINGLE_FAMILIES for b in table)
    K = int(k_init) if has_series else 1
    K = max(1, min(K, int(k_max)))
    while True:
        H = np.zeros(nmax + 1, dtype=complex)
        G = np.zeros(nmax + 1, dtype=complex)
        tail = 0.0
        for b in table:
            nodes, hw, gw = srcs[b.target]
            if nodes.shape[0] == 0:
                continue
            mats, odd = cache.family(b.family, K)
            if b.family in _SINGLE_FAMILIES:
                ks = np.array([0])
            else:
                ks = np.arange(b.k_start, K)
                mats = mats[b.k_start:]
                if ks.size == 0:
                    continue
            # integer exponents: alpha*beta is negative in the interesting regime
            coefs = b.coef * ab ** ks
            if odd:
                nodes = np.conj(nodes)
                hw_eff = np.conj(hw) if hw is not None else None
            else:
                hw_eff = hw
            Hb, Gb, last_h, last_g, min_rel = block_pot(
                x, mats, coefs, nodes, hw_eff, gw, nmax
            )
            if min_rel < _SING_FLOOR:
                raise SingularSourcePoint(
                    f"an image of the evaluation point hit a source node "
                    f"(family {b.family}, relative distance {min_rel:.3e})"
                )
            if hw is not None:
                H += Hb
            if gw is not None:
                G += Gb
                if not b.fused:
                    corr, last_c = _den_correction(
                        x, mats, coefs, float(np.sum(gw)), nmax
                    )
                    G += corr
                    last_g = last_g + last_c
            if b.family not in _SINGLE_FAMILIES:
                m = 0.0
                if hw is not None:
                    m = max(m, float(np.max(last_h)))
                if gw is not None:
                    m = max(m, float(np.max(last_g)))
                tail += m
        if gamma >= 1.0:
            raise TruncationFailure(
                f"series ratio {gamma:.6f} is not contracting; "
                "geometry/conductivity outside the convergent range"
            )
        est_tail = tail * gamma / (1.0 - gamma)
        if (not has_series) or est_tail <= tol or K >= k_max:
            break
        K = min(2 * K, int(k_max))
    if est_tail > tol:
        raise TruncationFailure(
            f"tail estimate {est_tail:.3e} above tolerance {tol:.1e} "
            f"at the series cap k_max={k_max}"
        )
    return H, G, K, est_tail


def center_src(c, weight=1.0):
    """Single-node log-channel source for a center target."""
    return (np.array([complex(c)]), None, np.array([float(weight)]))


def point_src(y):
    """Single-node log-channel source of unit weight (point evaluation)."""
    return (np.array([complex(y)]), None, np.array([1.0]))


def make_srcs(y_or_nodes, hw, gw, g):
    """Assemble the srcs dict with both center targets attached.

    The center targets carry the total log-channel weight (for a point
    source that is 1; for a volume potential it is the integral of the
    log-kernel density over the region, which is what multiplies the
    center terms of the interior-source correction).
    """
    nodes = np.atleast_1d(np.asarray(y_or_nodes, dtype=complex))
    mass = 0.0 if gw is None else float(np.sum(gw))
    return {
        TARGET_Y: (nodes, hw, gw),
        TARGET_C1: center_src(g.c1, mass),
        TARGET_C2: center_src(g.c2, mass),
    }


def derivative_pick(channel, p, q):
    """Mixed partial d^p_x1 d^q_x2 of Re(F) from the order-(p+q) complex sum."""
    n = p + q
    return ((1j) ** q * channel[n]).real
