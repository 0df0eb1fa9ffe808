"""Command-line driver.

Subcommands
-----------
sweep           derivative-boundedness sweep over eps and regimes
jikang          sweep with the comparison-envelope columns
narrow          strip-decay runs (gradient columns + summary sidecar)
green-check     interface continuity / flux continuity / harmonicity
fd-solve        one transmission solve, exported as x,y,u,a CSV
conformal-check equal-radius reduction diagnostics

Configuration is INI-style; every subcommand accepts --config, --out,
--tol, --kmax and --jobs.  See the package README for the schema and
defaults.  All file output is deterministic for a fixed configuration.
"""

import sys
import json
import argparse
import configparser

import numpy as np

from .geometry import Geometry
from .greens import Conductivity, GreenParams, green, d_green
from .potentials import Quadrature, mirrored_bump_source, u_rep
from .conformal import build_reduction, circle_fit
from . import fdsolve
from . import sweeps


def _split_floats(text):
    return [float(p) for p in text.replace(",", " ").split()]


def load_config(path=None, tol=None, kmax=None, jobs=None, out=None):
    """Build a SweepConfig from an INI file plus flag overrides."""
    cp = configparser.ConfigParser()
    if path:
        with open(path, "r", encoding="utf-8") as f:
            cp.read_file(f)
    kw = {}
    if cp.has_section("sweep"):
        s = cp["sweep"]
        if "eps" in s:
            kw["eps_list"] = _split_floats(s["eps"])
        if "orders" in s:
            kw["orders"] = [int(v) for v in _split_floats(s["orders"])]
        kw["r1"] = s.getfloat("r1", 1.0)
        kw["r2"] = s.getfloat("r2", 1.0)
        kw["oracle"] = s.getboolean("oracle", False)
        if "probes" in s and s["probes"] not in ("default", "midpoint"):
            kw["probes"] = [complex(*p) for p in
                            zip(*[iter(_split_floats(s["probes"]))] * 2)]
        elif "probes" in s:
            kw["probes"] = s["probes"]
        if "source_center" in s:
            cx, cy = _split_floats(s["source_center"])
            kw["source_center"] = complex(cx, cy)
        if "source_radius" in s:
            kw["source_radius"] = s.getfloat("source_radius")
    regimes = []
    for name in cp.sections():
        if name.startswith("regime:"):
            regimes.append((name.split(":", 1)[1],
                            cp[name].getfloat("k1"),
                            cp[name].getfloat("k2")))
    if regimes:
        kw["regimes"] = regimes
    if cp.has_section("narrow"):
        s = cp["narrow"]
        if "eps" in s:
            kw["narrow_eps"] = _split_floats(s["eps"])
        kw["narrow_shape"] = s.get("shape", "parabolic")
        kw["narrow_ns"] = s.getint("n_s", 400)
        kw["narrow_nt"] = s.getint("n_t", 60)
        kw["narrow_half_width"] = s.getfloat("half_width", 0.5)
    if tol is not None:
        kw["tol"] = tol
    if kmax is not None:
        kw["k_max"] = kmax
    if jobs is not None:
        kw["jobs"] = jobs
    if out is not None:
        kw["out"] = out
    cfg = sweeps.SweepConfig(**kw)
    cfg.raw = cp
    return cfg


# ----------------------------------------------------------------------
# green-check
# ----------------------------------------------------------------------

def green_check_report(g, cond, params, n_points=32, y=0.0 + 0.0j,
                       h_lap=1e-3):
    """Continuity, flux continuity and harmonicity of the series kernel.

    One-sided limits come from deliberate 1e-13 radial nudges to either
    side of the circle (the series branches are analytic up to the
    interface, so the nudge error is ~1e-13 |DG|), which keeps both
    limits of G and of the analytic conormal derivative free of
    finite-difference pollution.  Harmonicity is measured as a
    five-point Laplacian residual at points away from the source, the
    interfaces and the disk centers.
    """
    theta = 2.0 * np.pi * (np.arange(n_points) + 0.5) / n_points
    jumps, fluxes = [], []
    for c, r, kin in ((g.c1, g.r1, cond.k1), (g.c2, g.r2, cond.k2)):
        for th in theta:
            nrm = np.exp(1j * th)
            zi = c + r * (1.0 - 1e-13) * nrm
            zo = c + r * (1.0 + 1e-13) * nrm
            gi = green(zi, y, cond, g, params)
            go = green(zo, y, cond, g, params)
            jumps.append(abs(gi.value - go.value))
            di = [d_green(zi, y, cond, g, params, mi).value
                  for mi in ((1, 0), (0, 1))]
            do = [d_green(zo, y, cond, g, params, mi).value
                  for mi in ((1, 0), (0, 1))]
            fi = kin * (di[0] * nrm.real + di[1] * nrm.imag)
            fo = cond.k0 * (do[0] * nrm.real + do[1] * nrm.imag)
            fluxes.append(abs(fi - fo) / max(1.0, abs(fo)))
    far = [1.5j, -1.5j, 1.2 + 1.2j, -1.2 - 1.2j,
           g.c1 + 0.4 * g.r1, g.c2 - 0.4 * g.r2]
    resid = []
    for x in far:
        x = complex(x)
        if abs(x - y) < 0.3:
            continue
        vals = [green(x + dz, y, cond, g, params).value
                for dz in (0.0, h_lap, -h_lap, 1j * h_lap, -1j * h_lap)]
        resid.append(abs(vals[1] + vals[2] + vals[3] + vals[4]
                         - 4.0 * vals[0]) / h_lap ** 2)
    return {"max_jump": float(np.max(jumps)),
            "max_flux_jump": float(np.max(fluxes)),
            "max_residual": float(np.max(resid)),
            "n_points": n_points,
            "source": [y.real, y.imag]}


def _cmd_green_check(args):
    cfg = load_config(args.config, args.tol, args.kmax, args.jobs, args.out)
    params = GreenParams(tol=cfg.tol, k_max=cfg.k_max)
    raw = cfg.raw["green"] if cfg.raw.has_section("green") else {}
    eps_list = _split_floats(raw.get("eps", "0.1"))
    k1 = float(raw.get("k1", 0.1))
    k2 = float(raw.get("k2", 10.0))
    n_points = int(raw.get("points", 32))
    cond = Conductivity(k1, k2)
    reports = {}
    for eps in eps_list:
        g = Geometry(eps, cfg.r1, cfg.r2)
        rep = green_check_report(g, cond, params, n_points)
        reports["%g" % eps] = rep
        print("eps=%g  jump=%.3e  flux_jump=%.3e  residual=%.3e"
              % (eps, rep["max_jump"], rep["max_flux_jump"],
                 rep["max_residual"]))
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as f:
            json.dump(reports, f, sort_keys=True, indent=1)
            f.write("\n")
    return 0


# ----------------------------------------------------------------------
# fd-solve
# ----------------------------------------------------------------------

def _cmd_fd_solve(args):
    cfg = load_config(args.config, args.tol, args.kmax, args.jobs, args.out)
    raw = cfg.raw["fdsolve"] if cfg.raw.has_section("fdsolve") else {}
    eps = float(raw.get("eps", 0.1))
    k1 = float(raw.get("k1", 0.1))
    k2 = float(raw.get("k2", 10.0))
    half_width = float(raw.get("half_width", 0.75))
    boundary = raw.get("boundary", "series")
    n_auto = int(np.ceil(2.0 * half_width / (eps / 8.0)))
    n = int(raw.get("n", n_auto))
    g = Geometry(eps, cfg.r1, cfg.r2)
    cond = Conductivity(k1, k2)
    grid = fdsolve.make_grid(g, cond, n, half_width)
    src = mirrored_bump_source(center=cfg.source_center,
                               radius=cfg.source_radius)
    if boundary == "series":
        params = GreenParams(tol=cfg.tol, k_max=cfg.k_max)
        quad = Quadrature()

        def trace(z):
            return np.array([u_rep(zz, src, cond, g, params, quad,
                                   check_quad=False).value
                             for zz in np.atleast_1d(z)])
    elif boundary == "polynomial":
        trace = lambda z: z.real ** 2 - z.imag ** 2
    else:
        trace = None
    sol = fdsolve.solve_transmission(grid, trace, src)
    print("n=%d  h=%.4e  iterations=%d  residual=%.3e"
          % (n, grid.h, sol.iterations, sol.residual))
    if cfg.out:
        fdsolve.export_csv(sol, cfg.out)
        print("wrote %s" % cfg.out)
    return 0


# ----------------------------------------------------------------------
# conformal-check
# ----------------------------------------------------------------------

def _cmd_conformal_check(args):
    cfg = load_config(args.config, args.tol, args.kmax, args.jobs, args.out)
    raw = cfg.raw["conformal"] if cfg.raw.has_section("conformal") else {}
    draws = int(raw.get("draws", 20))
    seed = int(raw.get("seed", 0))
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(draws):
        r1 = rng.uniform(0.5, 10.0)
        r2 = rng.uniform(0.5, 10.0)
        while abs(r1 - r2) < 1e-3:
            r2 = rng.uniform(0.5, 10.0)
        eps = rng.uniform(1e-4, 0.5)
        red = build_reduction(Geometry(eps, r1, r2))
        ra, rb = red.radii_raw
        w = (red.mapped_geometry.c1
             + red.radius * np.exp(2j * np.pi * np.arange(16) / 16.0))
        rt = float(np.max(np.abs(red.forward(red.inverse(w)) - w)))
        th = 2.0 * np.pi * np.arange(64) / 64.0
        img = red.forward(eps / 2.0 + r1 + r1 * np.exp(1j * th))
        _, _, fit = circle_fit(img)
        rows.append({"r1": r1, "r2": r2, "eps": eps, "z0": red.z0,
                     "radii_rel_dev": abs(ra - rb) / ra,
                     "roundtrip": rt, "circle_fit": fit,
                     "z0_margin": red.z0 - (eps / 2.0 + 4.0 * min(r1, r2)),
                     "mapped_eps": red.mapped_geometry.eps})
    worst = {k: max(r[k] for r in rows)
             for k in ("radii_rel_dev", "roundtrip", "circle_fit")}
    worst["min_z0_margin"] = min(r["z0_margin"] for r in rows)
    worst["min_mapped_eps"] = min(r["mapped_eps"] for r in rows)
    print("draws=%d  radii_dev=%.2e  roundtrip=%.2e  circle_fit=%.2e  "
          "z0_margin=%.3f" % (draws, worst["radii_rel_dev"],
                              worst["roundtrip"], worst["circle_fit"],
                              worst["min_z0_margin"]))
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as f:
            json.dump({"rows": rows, "worst": worst}, f, sort_keys=True,
                      indent=1)
            f.write("\n")
    return 0


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", default=None, help="INI configuration file")
    p.add_argument("--out", default=None, help="output path")
    p.add_argument("--tol", type=float, default=None,
                   help="series truncation tolerance")
    p.add_argument("--kmax", type=int, default=None,
                   help="series term cap")
    p.add_argument("--jobs", type=int, default=None,
                   help="concurrent sweep cells")


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="gapfield",
        description="two-disk gap fields: sweeps and reference checks")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("sweep", "jikang", "narrow", "green-check", "fd-solve",
                 "conformal-check"):
        _add_common(sub.add_parser(name))
    args = ap.parse_args(argv)

    if args.command == "sweep":
        cfg = load_config(args.config, args.tol, args.kmax, args.jobs,
                          args.out)
        records = sweeps.run_sweep(cfg)
        ok = sum(1 for r in records if not r["error"])
        print("sweep: %d records (%d ok)" % (len(records), ok))
        if cfg.out:
            print("wrote %s and %s.jsonl" % (cfg.out, cfg.out))
    elif args.command == "jikang":
        cfg = load_config(args.config, args.tol, args.kmax, args.jobs,
                          args.out)
        records = sweeps.run_jikang_comparison(cfg)
        ok = sum(1 for r in records if not r["error"])
        print("jikang: %d records (%d ok)" % (len(records), ok))
        if cfg.out:
            print("wrote %s and %s.jsonl" % (cfg.out, cfg.out))
    elif args.command == "narrow":
        cfg = load_config(args.config, args.tol, args.kmax, args.jobs,
                          args.out)
        records, summary = sweeps.run_narrow(cfg)
        for eps, rep in summary.items():
            print("eps=%s  slope=%+.4f  r2=%.4f  decays=%s  c0=[%.3g, %.3g]"
                  % (eps, rep["slope"], rep["r2"], rep["decays"],
                     rep["c0_min"], rep["c0_max"]))
        if cfg.out:
            print("wrote %s, %s.jsonl and %s.summary.json"
                  % (cfg.out, cfg.out, cfg.out))
    elif args.command == "green-check":
        return _cmd_green_check(args)
    elif args.command == "fd-solve":
        return _cmd_fd_solve(args)
    elif args.command == "conformal-check":
        return _cmd_conformal_check(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
