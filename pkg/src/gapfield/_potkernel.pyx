# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled core for the image-series node sums.

Same contract as _potkernel_np.block_pot (which is also the reference
implementation for tests); see the docstring there.  The inner loops are
arranged so each (term, node, order) step costs one complex multiply-add:
both channels share the ratio r = U/t, node sums are accumulated in stack
arrays (alias-free), and the n-dependent scalar factors are applied once
per term after the node loop.  |t| never goes through hypot -- log|t| =
log(|t|^2)/2 and 1/t = conj(t)/|t|^2 reuse the squared magnitude.
"""

import numpy as np

cimport cython
from libc.math cimport log, sqrt

BACKEND = "cython"

DEF NMAXCAP = 16


def block_pot(double complex x, double[:, ::1] mats, double[::1] coefs,
              double complex[::1] nodes, hw, gw, int nmax):
    if nmax >= NMAXCAP:
        raise ValueError("compiled kernel caps the derivative order at %d"
                         % (NMAXCAP - 1))
    cdef Py_ssize_t K = mats.shape[0]
    cdef Py_ssize_t N = nodes.shape[0]
    cdef bint do_h = hw is not None
    cdef bint do_g = gw is not None

    cdef double complex[::1] hwv
    cdef double[::1] gwv
    if do_h:
        hwv = hw
    if do_g:
        gwv = gw

    ay_arr = np.abs(np.asarray(nodes))
    cdef double[::1] ay = ay_arr

    H_arr = np.zeros(nmax + 1, dtype=complex)
    G_arr = np.zeros(nmax + 1, dtype=complex)
    last_h_arr = np.zeros(nmax + 1)
    last_g_arr = np.zeros(nmax + 1)
    cdef double complex[::1] H = H_arr
    cdef double complex[::1] G = G_arr
    cdef double[::1] last_h = last_h_arr
    cdef double[::1] last_g = last_g_arr

    # (-1)**n n!  /  (-1)**(n-1) (n-1)!  order factors, shared by every term
    cdef double hfac[NMAXCAP]
    cdef double gfac[NMAXCAP]
    cdef int n
    hfac[0] = 1.0
    gfac[0] = 1.0
    for n in range(1, nmax + 1):
        hfac[n] = -hfac[n - 1] * n
        gfac[n] = -gfac[n - 1] * (n - 1 if n > 1 else -1)

    # per-term node sums, accumulated on the stack
    cdef double complex hs[NMAXCAP]
    cdef double complex gs[NMAXCAP]

    cdef double min_rel2 = 1e300
    cdef double A, B, C, D, c, det, aP, aQ, at2, den, rel2, ia, gwq
    cdef double complex P, Q, t, U, inv_t, y, r, b, p, hv, gv
    cdef Py_ssize_t k, q

    for k in range(K):
        A = mats[k, 0]
        B = mats[k, 1]
        C = mats[k, 2]
        D = mats[k, 3]
        c = coefs[k]
        P = A * x + B
        Q = C * x + D
        det = A * D - B * C
        aP = abs(P)
        aQ = abs(Q)
        for n in range(nmax + 1):
            hs[n] = 0
            gs[n] = 0
        for q in range(N):
            y = nodes[q]
            t = P - y * Q
            at2 = t.real * t.real + t.imag * t.imag
            den = aP + ay[q] * aQ + 1e-300
            rel2 = at2 / (den * den)
            if rel2 < min_rel2:
                min_rel2 = rel2
            if at2 == 0.0:
                continue  # caller raises via min_rel; keep sums finite
            ia = 1.0 / at2
            inv_t.real = t.real * ia
            inv_t.imag = -t.imag * ia
            U = A - y * C
            r = U * inv_t
            if do_h:
                b = hwv[q] * inv_t
                hs[0] = hs[0] + b
                if nmax >= 1:
                    b = b * inv_t
                    for n in range(1, nmax + 1):
                        hs[n] = hs[n] + b
                        b = b * r
            if do_g:
                gwq = gwv[q]
                gs[0] = gs[0] + gwq * log(at2)
                if nmax >= 1:
                    p = gwq * r
                    for n in range(1, nmax + 1):
                        gs[n] = gs[n] + p
                        p = p * r
        if do_h:
            hv = c * Q * hs[0]
            H[0] = H[0] + hv
            if k == K - 1:
                last_h[0] = abs(hv)
            for n in range(1, nmax + 1):
                hv = c * det * hfac[n] * hs[n]
                H[n] = H[n] + hv
                if k == K - 1:
                    last_h[n] = abs(hv)
        if do_g:
            gv = c * 0.5 * gs[0]
            G[0] = G[0] + gv
            if k == K - 1:
                last_g[0] = abs(gv)
            for n in range(1, nmax + 1):
                gv = c * gfac[n] * gs[n]
                G[n] = G[n] + gv
                if k == K - 1:
                    last_g[n] = abs(gv)
    return H_arr, G_arr, last_h_arr, last_g_arr, sqrt(min_rel2)
