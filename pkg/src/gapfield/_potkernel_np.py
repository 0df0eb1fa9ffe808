"""Pure-numpy fallback for the image-series node sums.

Same contract as the compiled extension in _potkernel.pyx: the k-loop is
Python but every node operation is vectorized, so this stays usable (just
a few times slower) when the extension was not built.
"""

import numpy as np

BACKEND = "numpy"


def block_pot(x, mats, coefs, nodes, hw, gw, nmax):
    """Accumulate one family block of the image series over source nodes.

    For each term k with coefficient row (A, B, C, D) = mats[k] and scalar
    weight coefs[k], and each node y = nodes[q], let

        P = A*x + B,  Q = C*x + D,  t = P - y*Q,  U = A - y*C

    (so the mapped difference is  M_k(x) - y = t / Q).  The routine returns,
    for derivative orders n = 0..nmax,

        H[n] = sum_k coefs[k] * sum_q hw[q] * d^n/dx^n [ 1 / (M_k(x) - y_q) ]
        G[n] = sum_k coefs[k] * sum_q gw[q] * Gn(t, U)

    where Gn is the *numerator part* of the n-th derivative of Log(M_k(x)-y):
    G0 = log|t| and Gn = (-1)**(n-1) (n-1)! (U/t)**n.  The caller adds the
    map-denominator part (a node-independent correction built from C, Q)
    except for fused terms, where it cancels by construction.

    hw (complex) and gw (float) may be None to skip a channel.  Also returned
    are the per-order magnitudes of the k = K-1 contribution (for geometric
    tail estimates) and the minimum relative |t| seen (for singularity
    detection); no error is raised here.
    """
    K = mats.shape[0]
    H = np.zeros(nmax + 1, dtype=complex)
    G = np.zeros(nmax + 1, dtype=complex)
    last_h = np.zeros(nmax + 1)
    last_g = np.zeros(nmax + 1)
    min_rel = np.inf
    do_h = hw is not None
    do_g = gw is not None
    absn = np.abs(nodes)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for k in range(K):
            A, B, C, D = mats[k]
            c = coefs[k]
            P = A * x + B
            Q = C * x + D
            t = P - nodes * Q
            at = np.abs(t)
            m = np.min(at / (abs(P) + absn * abs(Q) + 1e-300))
            if m < min_rel:
                min_rel = m
            inv_t = 1.0 / t
            U = A - nodes * C
            if do_h:
                hk = c * np.sum(hw * Q * inv_t)
                H[0] += hk
                last_h[0] = abs(hk)
                if nmax >= 1:
                    det = A * D - B * C
                    upow = np.ones_like(t)
                    tpow = inv_t * inv_t
                    fact = 1.0
                    sgn = -1.0
                    for n in range(1, nmax + 1):
                        hk = c * det * sgn * fact * np.sum(hw * upow * tpow)
                        H[n] += hk
                        last_h[n] = abs(hk)
                        upow = upow * U
                        tpow = tpow * inv_t
                        fact *= n + 1
                        sgn = -sgn
            if do_g:
                gk = c * np.sum(gw * np.log(at))
                G[0] += gk
                last_g[0] = abs(gk)
                if nmax >= 1:
                    r = U * inv_t
                    rpow = np.ones_like(r)
                    fact = 1.0
                    sgn = 1.0
                    for n in range(1, nmax + 1):
                        rpow = rpow * r
                        gk = c * sgn * fact * np.sum(gw * rpow)
                        G[n] += gk
                        last_g[n] = abs(gk)
                        fact *= n
                        sgn = -sgn
    return H, G, last_h, last_g, min_rel
