"""Parameter sweeps over gap widths and conductivity regimes.

A sweep walks a grid of (eps, regime, derivative order, probe point)
cells, builds the manufactured two-lobe problem for each geometry,
evaluates the represented solution's derivatives at the probes and
emits one record per cell.  Records go to a CSV file with the fixed
header

    eps,k1,k2,gamma,m,probe_x,probe_y,deriv_abs,series_k,tail_est,oracle_dev,error

and to a JSON-lines mirror with the same fields.  Output is
deterministic: identical configurations produce byte-identical files
(wall-clock times stay in memory).  Cell failures land in the `error`
column and the sweep keeps going.

The jikang variant appends the comparison envelope

    (-(k1+1)(k2+1)/((k1-1)(k2-1)) - 1 + sqrt(2 (r1+r2) eps/(r1 r2)))**(-m+1)

and the measured/envelope ratio as extra columns; the narrow variant
drives the strip solver across an eps-list and reports per-column
gradient maxima plus a decay/energy summary sidecar.
"""

import json
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .errors import GapfieldError
from .geometry import Geometry
from .greens import Conductivity, GreenParams
from .potentials import Quadrature, mirrored_bump_source, all_orders
from . import fdsolve

CSV_HEADER = ("eps,k1,k2,gamma,m,probe_x,probe_y,deriv_abs,"
              "series_k,tail_est,oracle_dev,error")
FIELDS = CSV_HEADER.split(",")


class SweepConfig(object):
    """Everything a sweep run needs, normalized.

    eps_list is kept sorted descending; regimes are (label, k1, k2)
    triples and any regime labeled as the theorem regime must actually
    satisfy gamma in (1/2, 1).
    """

    def __init__(self, eps_list=(1e-1, 1e-2, 1e-3, 1e-4),
                 regimes=(("theorem", 0.1, 10.0),),
                 orders=(1, 2, 3), r1=1.0, r2=1.0,
                 probes="default", oracle=False, out=None,
                 tol=1e-10, k_max=10 ** 6, jobs=1,
                 source_center=0.45 + 0.0j, source_radius=0.25,
                 narrow_eps=(1e-2, 4e-3, 1e-3), narrow_shape="parabolic",
                 narrow_ns=400, narrow_nt=60, narrow_half_width=0.5):
        self.eps_list = tuple(sorted((float(e) for e in eps_list),
                                     reverse=True))
        self.regimes = tuple((str(l), float(a), float(b))
                             for l, a, b in regimes)
        for label, k1, k2 in self.regimes:
            if "theorem" in label:
                gam = Conductivity(k1, k2).gamma
                if not 0.5 < gam < 1.0:
                    raise ValueError(
                        "regime %r has gamma = %.6f outside (1/2, 1); "
                        "the theorem regime needs k1 in (0,1), k2 in "
                        "(1,inf) with gamma in that window" % (label, gam))
        self.orders = tuple(int(m) for m in orders)
        if any(m < 1 or m > 6 for m in self.orders):
            raise ValueError("derivative orders must lie in 1..6")
        self.r1 = float(r1)
        self.r2 = float(r2)
        self.probes = probes
        self.oracle = bool(oracle)
        self.out = out
        self.tol = float(tol)
        self.k_max = int(k_max)
        self.jobs = int(jobs)
        self.source_center = complex(source_center)
        self.source_radius = float(source_radius)
        self.narrow_eps = tuple(sorted((float(e) for e in narrow_eps),
                                       reverse=True))
        self.narrow_shape = narrow_shape
        self.narrow_ns = int(narrow_ns)
        self.narrow_nt = int(narrow_nt)
        self.narrow_half_width = float(narrow_half_width)


def probe_points(eps, spec="default"):
    """Probe set for one geometry: gap midpoint plus the ε/4 star."""
    if spec == "midpoint":
        return [0.0 + 0.0j]
    if spec == "default":
        r = eps / 4.0
        pts = [0.0 + 0.0j]
        for k in range(8):
            pts.append(r * np.exp(2j * np.pi * k / 8.0))
        return pts
    return [complex(p) for p in spec]


def jikang_envelope(eps, k1, k2, r1, r2, m):
    """Comparison envelope from the earlier two-disk derivative bounds.

    Undefined (None) when either conductivity equals the background:
    the bound's constant degenerates there.
    """
    if (k1 - 1.0) * (k2 - 1.0) == 0.0:
        return None
    base = -(k1 + 1.0) * (k2 + 1.0) / ((k1 - 1.0) * (k2 - 1.0)) - 1.0
    return (base + np.sqrt(2.0 * (r1 + r2) * eps / (r1 * r2))) ** (1 - m)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return "%d" % x
    return repr(float(x))


def write_records(records, out, extra_fields=()):
    """Write records to `out` (CSV) and `out`+'.jsonl' (mirror)."""
    fields = FIELDS + list(extra_fields)
    with open(out, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(fields) + "\n")
        for r in records:
            f.write(",".join(_fmt(r.get(k)) for k in fields) + "\n")
    with open(out + ".jsonl", "w", encoding="utf-8", newline="\n") as f:
        for r in records:
            row = {k: r.get(k) for k in fields}
            f.write(json.dumps(row, sort_keys=True) + "\n")


def _sweep_cell(args):
    """One (eps, regime, probe) cell: all requested orders at one probe."""
    (eps, label, k1, k2, r1, r2, probe, orders, tol, k_max,
     src_center, src_radius, jik) = args
    g = Geometry(eps, r1, r2)
    cond = Conductivity(k1, k2)
    params = GreenParams(tol=tol, k_max=k_max)
    quad = Quadrature()
    src = mirrored_bump_source(center=src_center, radius=src_radius)
    rows = []
    t0 = time.perf_counter()
    try:
        mmax = max(orders)
        derivs, _, k_used, est = all_orders(probe, src, cond, g, params,
                                            quad, mmax)
        for m in orders:
            dabs = max(abs(derivs[(p, m - p)]) for p in range(m + 1))
            row = {"eps": eps, "k1": k1, "k2": k2, "gamma": cond.gamma,
                   "m": m, "probe_x": probe.real, "probe_y": probe.imag,
                   "deriv_abs": dabs, "series_k": k_used, "tail_est": est,
                   "oracle_dev": None, "error": None}
            if jik:
                env = jikang_envelope(eps, k1, k2, r1, r2, m)
                row["envelope"] = env
                row["ratio"] = None if env is None else dabs / env
            rows.append(row)
    except (GapfieldError, ValueError) as exc:
        for m in orders:
            row = {"eps": eps, "k1": k1, "k2": k2, "gamma": cond.gamma,
                   "m": m, "probe_x": probe.real, "probe_y": probe.imag,
                   "deriv_abs": None, "series_k": None, "tail_est": None,
                   "oracle_dev": None,
                   "error": "%s: %s" % (type(exc).__name__, exc)}
            if jik:
                row["envelope"] = None
                row["ratio"] = None
            rows.append(row)
    wall = time.perf_counter() - t0
    for row in rows:
        row["wall"] = wall / len(rows)
    return rows


def _run_cells(cfg, jik):
    cells = []
    for eps in cfg.eps_list:
        probes = probe_points(eps, cfg.probes)
        for label, k1, k2 in cfg.regimes:
            for probe in probes:
                cells.append((eps, label, k1, k2, cfg.r1, cfg.r2, probe,
                              cfg.orders, cfg.tol, cfg.k_max,
                              cfg.source_center, cfg.source_radius, jik))
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            chunks = list(pool.map(_sweep_cell, cells))
    else:
        chunks = [_sweep_cell(c) for c in cells]
    records = [row for chunk in chunks for row in chunk]
    return records


def _attach_oracle(records, cfg):
    """FD cross-check of the first-order cells at the two largest eps.

    One transmission solve per (eps, regime); the oracle gradient is a
    central difference of the bilinear-sampled FD field at grid spacing,
    and oracle_dev is its absolute deviation from the series value.
    """
    from .potentials import u_rep  # local import keeps module load light
    targets = set(cfg.eps_list[:2])
    cache = {}
    for row in records:
        if row["m"] != 1 or row["error"] or row["eps"] not in targets:
            continue
        key = (row["eps"], row["k1"], row["k2"])
        if key not in cache:
            g = Geometry(row["eps"], cfg.r1, cfg.r2)
            cond = Conductivity(row["k1"], row["k2"])
            params = GreenParams(tol=cfg.tol, k_max=cfg.k_max)
            quad = Quadrature()
            src = mirrored_bump_source(center=cfg.source_center,
                                       radius=cfg.source_radius)
            n = int(np.ceil(1.5 / (row["eps"] / 8.0)))
            grid = fdsolve.make_grid(g, cond, n, half_width=0.75)
            trace = lambda z: np.array(
                [u_rep(zz, src, cond, g, params, quad,
                       check_quad=False).value for zz in np.atleast_1d(z)])
            cache[key] = fdsolve.solve_transmission(grid, trace, src)
        sol = cache[key]
        h = sol.grid.h
        x = complex(row["probe_x"], row["probe_y"])
        dx = (sol.sample(x + h) - sol.sample(x - h)) / (2 * h)
        dy = (sol.sample(x + 1j * h) - sol.sample(x - 1j * h)) / (2 * h)
        row["oracle_dev"] = abs(row["deriv_abs"] - max(abs(dx), abs(dy)))
    return records


def run_sweep(cfg):
    """Derivative-boundedness sweep; returns records, writes cfg.out."""
    records = _run_cells(cfg, jik=False)
    if cfg.oracle:
        records = _attach_oracle(records, cfg)
    if cfg.out:
        write_records(records, cfg.out)
    return records


def run_jikang_comparison(cfg):
    """Sweep with the comparison-envelope columns appended."""
    records = _run_cells(cfg, jik=True)
    if cfg.out:
        write_records(records, cfg.out, extra_fields=("envelope", "ratio"))
    return records


def run_narrow(cfg):
    """Strip-decay runs across the narrow eps list.

    Returns (records, summary).  Records map onto the sweep schema with
    k1 = k2 = 1, m = 1, probe_x = the chart abscissa and deriv_abs = the
    column maximum of |Du|; the summary carries the decay fit and the
    energy-iteration report per eps and lands next to cfg.out as a
    .summary.json sidecar.
    """
    records = []
    summary = {}
    for eps in cfg.narrow_eps:
        try:
            if cfg.narrow_shape == "flat":
                dom = fdsolve.flat_strip(eps, cfg.narrow_half_width)
            else:
                dom = fdsolve.parabolic_strip(eps, cfg.narrow_half_width)
            sol = fdsolve.solve_strip(dom, cfg.narrow_ns, cfg.narrow_nt)
            s, colmax = fdsolve.column_grad_max(sol)
            fit = fdsolve.decay_fit(sol)
            ladder = fdsolve.iteration_ladder(eps)
            rep = fdsolve.caccioppoli_check(sol, dom, ladder)
            summary["%g" % eps] = {
                "slope": fit["slope"], "r2": fit["r2"],
                "decays": fit["decays"],
                "c0_min": rep["c0_min"], "c0_max": rep["c0_max"],
                "ladder": ladder}
            for sj, cm in zip(s, colmax):
                records.append({
                    "eps": eps, "k1": 1.0, "k2": 1.0, "gamma": 0.0,
                    "m": 1, "probe_x": float(sj), "probe_y": 0.0,
                    "deriv_abs": float(cm), "series_k": None,
                    "tail_est": None, "oracle_dev": None,
                    "error": None if fit["decays"] else "no decay"})
        except (GapfieldError, ValueError) as exc:
            records.append({
                "eps": eps, "k1": 1.0, "k2": 1.0, "gamma": 0.0,
                "m": 1, "probe_x": 0.0, "probe_y": 0.0,
                "deriv_abs": None, "series_k": None, "tail_est": None,
                "oracle_dev": None,
                "error": "%s: %s" % (type(exc).__name__, exc)})
    if cfg.out:
        write_records(records, cfg.out)
        with open(cfg.out + ".summary.json", "w", encoding="utf-8",
                  newline="\n") as f:
            json.dump(summary, f, sort_keys=True, indent=1)
            f.write("\n")
    return records, summary
