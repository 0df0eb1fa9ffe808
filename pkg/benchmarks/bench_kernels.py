"""Timing comparison: compiled series kernel vs the numpy fallback.

Runs the raw block accumulator on realistic term/node counts, then times a
full mixed-derivative evaluation end to end (the numpy end-to-end pass is
re-executed in a subprocess with GAPFIELD_NO_EXT=1 so the import-time
backend switch is exercised the same way a user would hit it).

Usage:  python3 benchmarks/bench_kernels.py
"""

import os
import subprocess
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from gapfield import _potkernel_np
from gapfield._kernels import BACKEND

try:
    from gapfield import _potkernel
except ImportError:
    _potkernel = None


def kernel_inputs(n_terms, n_nodes, rng):
    mats = rng.normal(size=(n_terms, 4))
    mats[:, 0] += 3.0          # keep the maps away from degeneracy
    mats[:, 3] += 3.0
    coefs = 0.7 ** np.arange(n_terms)
    nodes = (rng.normal(size=n_nodes) + 1j * rng.normal(size=n_nodes)) * 0.1 + 1.1
    hw = rng.normal(size=n_nodes) + 1j * rng.normal(size=n_nodes)
    gw = rng.normal(size=n_nodes)
    return mats, coefs, nodes, hw, gw


def time_call(fn, *args, repeat=5):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_raw():
    rng = np.random.default_rng(7)
    print("raw block_pot (best of 5), times in ms")
    print("%8s %8s %5s %10s %10s %8s" % ("terms", "nodes", "nmax",
                                         "cython", "numpy", "speedup"))
    for n_terms, n_nodes, nmax in [(16, 768, 1), (32, 3072, 3),
                                   (64, 3072, 3), (64, 6144, 6)]:
        mats, coefs, nodes, hw, gw = kernel_inputs(n_terms, n_nodes, rng)
        x = 0.003 + 0.001j
        args = (x, mats, coefs, nodes, hw, gw, nmax)
        t_np = time_call(_potkernel_np.block_pot, *args)
        if _potkernel is not None:
            t_cy = time_call(_potkernel.block_pot, *args)
            # the two backends must agree before their times mean anything
            Hc, Gc = _potkernel.block_pot(*args)[:2]
            Hn, Gn = _potkernel_np.block_pot(*args)[:2]
            assert np.allclose(Hc, Hn, rtol=1e-12, atol=1e-12)
            assert np.allclose(Gc, Gn, rtol=1e-12, atol=1e-12)
            print("%8d %8d %5d %10.3f %10.3f %7.1fx"
                  % (n_terms, n_nodes, nmax, 1e3 * t_cy, 1e3 * t_np,
                     t_np / t_cy))
        else:
            print("%8d %8d %5d %10s %10.3f %8s"
                  % (n_terms, n_nodes, nmax, "-", 1e3 * t_np, "-"))


END_TO_END = r"""
import sys, time
sys.path.insert(0, %r)
from gapfield import Conductivity, Geometry, GreenParams, Quadrature
from gapfield import mirrored_bump_source
from gapfield._kernels import BACKEND
from gapfield.potentials import all_orders

g = Geometry(0.01, 1.0, 1.0)
cond = Conductivity(0.1, 10.0)
src = mirrored_bump_source()
params = GreenParams()
quad = Quadrature()
all_orders(0j, src, cond, g, params, quad, 3)   # warm-up / truncation search
t0 = time.perf_counter()
for _ in range(5):
    all_orders(0j, src, cond, g, params, quad, 3)
print("%%s %%.4f" %% (BACKEND, (time.perf_counter() - t0) / 5))
"""


def bench_end_to_end():
    src_dir = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "src")
    code = END_TO_END % src_dir
    print()
    print("all_orders(mmax=3) at eps=0.01, theorem regime, per call")
    for env_extra in ({}, {"GAPFIELD_NO_EXT": "1"}):
        env = dict(os.environ, **env_extra)
        out = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True, check=True)
        backend, secs = out.stdout.split()
        print("  %-8s %8.1f ms" % (backend, 1e3 * float(secs)))


if __name__ == "__main__":
    print("active backend:", BACKEND)
    bench_raw()
    bench_end_to_end()
