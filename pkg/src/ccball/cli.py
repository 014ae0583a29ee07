"""Command-line interface: ``ccball <command> [options]``.

Commands
--------
geodesic        samples of one geodesic (t = arc length, x, y, z)
sphere          geodesic endpoints at arc length R over a (lambda, mu) grid
bounds          lower bound, pushforward volume and upper bound per radius
volume          ball volume by pushforward or grid
jacobian-check  closed-form vs matrix vs finite-difference determinants
profile-info    f, f', |f'|/f and the same for g at given abscissae

Options may also come from a ``--config`` file of ``key = value`` lines
(``#`` starts a comment); command-line flags take precedence.  Numbers are
written with 17 significant digits, so CSV and JSON round-trip exactly.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from contextlib import contextmanager

import numpy as np

from . import geodesics, jacobian, measure
from ._core import BACKEND
from .errors import CCBallError, TurningPointError
from .geodesics import GeodesicParams
from .profiles import ProfilePair
from .quadrature import QuadConfig

DEFAULTS = {
    "f": "exp-inverse:sigma=1,p=2",
    "g": "exp-inverse:sigma=2,p=2",
    "abs_tol": None,
    "rel_tol": None,
    "format": "csv",
    "out": None,
    "seed": 0,
    "n": 200,
    "lam": 0.0,
    "mu": 0.0,
    "n_lambda": 9,
    "n_mu": 9,
    "method": "pushforward",
    "cells": measure.GRID_CELLS,
    "nodes": measure.PUSHFORWARD_NODES,
    "jobs": 1,
    "lambdas": "0:2.5:5",
    "mus": "0:8:5",
    "xs": "0.4:1.4:5",
    "random": 0,
    "tol": 1e-4,
    "min_d": 0.05,
    "x": "0.25,0.5,1",
}

EXIT_OK, EXIT_CHECK_FAILED, EXIT_ERROR = 0, 1, 2
X_TOL = 1e-15  # arc-length inversion; Brent stops at a few ulps anyway


# -- parsing ------------------------------------------------------------------

def _floats(text):
    """``"a,b,c"`` or ``"start:stop:num"`` (inclusive linspace); ``""`` is empty."""
    text = str(text).strip()
    if not text:
        return []
    if ":" in text:
        start, stop, num = text.split(":")
        return [float(v) for v in np.linspace(float(start), float(stop), int(num))]
    return [float(v) for v in text.split(",") if v.strip()]


def load_config(path):
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise CCBallError(f"{path}:{lineno}: expected key = value")
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def _common(p):
    p.add_argument("--f", help=f"profile f (default {DEFAULTS['f']})")
    p.add_argument("--g", help=f"profile g (default {DEFAULTS['g']})")
    p.add_argument("--abs-tol", type=float, help="quadrature absolute tolerance")
    p.add_argument("--rel-tol", type=float, help="quadrature relative tolerance")
    p.add_argument("--format", choices=["csv", "json"], help="output format (default csv)")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--seed", type=int, help="seed for randomized sampling (default 0)")


def build_parser():
    parser = argparse.ArgumentParser(prog="ccball", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="store_true", help="print version and backend")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("geodesic", help="sample one geodesic from the origin")
    _common(p)
    p.add_argument("--lambda", dest="lam", type=float, help="y-momentum (default 0)")
    p.add_argument("--mu", type=float, help="z-momentum (default 0)")
    end = p.add_mutually_exclusive_group()
    end.add_argument("--x-end", type=float, help="final abscissa")
    end.add_argument("--r-end", type=float, help="final arc length")
    p.add_argument("--n", type=int, help="number of samples (default 200)")

    p = sub.add_parser("sphere", help="geodesic endpoints at arc length R")
    _common(p)
    p.add_argument("--R", type=float, help="arc length of the sphere")
    p.add_argument("--n-lambda", type=int, help="grid size in lambda (default 9)")
    p.add_argument("--n-mu", type=int, help="grid size in mu (default 9)")
    p.add_argument("--lambda-max", type=float, help="default 2/f(R)")
    p.add_argument("--mu-max", type=float, help="default 2/g(R)")

    p = sub.add_parser("bounds", help="bounds and volume for a list of radii")
    _common(p)
    p.add_argument("--R", help="radii: a,b,c or start:stop:num")
    p.add_argument("--nodes", type=int, help="pushforward nodes per momentum axis")
    p.add_argument("--jobs", type=int, help="worker processes (default 1)")

    p = sub.add_parser("volume", help="ball volume estimate")
    _common(p)
    p.add_argument("--R", type=float, help="ball radius")
    p.add_argument("--method", choices=["pushforward", "grid"])
    p.add_argument("--nodes", type=int, help="pushforward nodes per momentum axis")
    p.add_argument("--cells", type=int, help="grid cells per axis (default 40)")
    p.add_argument("--jobs", type=int, help="worker processes for the grid")

    p = sub.add_parser("jacobian-check", help="validate the closed-form determinant")
    _common(p)
    p.add_argument("--lambdas", help="lambda values (default 0:2.5:5)")
    p.add_argument("--mus", help="mu values (default 0:8:5)")
    p.add_argument("--xs", help="abscissae (default 0.4:1.4:5)")
    p.add_argument("--random", type=int, help="extra random points in the grid box")
    p.add_argument("--tol", type=float, help="relative tolerance (default 1e-4)")
    p.add_argument("--min-d", type=float, help="skip points with D <= this (default 0.05)")

    p = sub.add_parser("profile-info", help="profile values and log-derivatives")
    _common(p)
    p.add_argument("--x", help="abscissae (default 0.25,0.5,1)")
    return parser


# config-file values arrive as strings
CONVERTERS = {"abs_tol": float, "rel_tol": float, "seed": int, "n": int, "lam": float,
              "mu": float, "n_lambda": int, "n_mu": int, "cells": int, "nodes": int,
              "jobs": int, "random": int, "tol": float, "min_d": float, "x_end": float,
              "r_end": float, "lambda_max": float, "mu_max": float}


def resolve(args):
    """Merge flags over config-file values over built-in defaults."""
    cfg = load_config(args.config) if getattr(args, "config", None) else {}
    opts = {}
    keys = list(DEFAULTS) + ["x_end", "r_end", "R", "lambda_max", "mu_max"]
    for key in keys:
        val = getattr(args, key, None)
        if val is None and key in cfg:
            conv = CONVERTERS.get(key, str)
            if key == "R" and args.command != "bounds":
                conv = float
            val = conv(cfg[key])
        if val is None:
            val = DEFAULTS.get(key)
        opts[key] = val
    if args.command in ("sphere", "bounds", "volume") and opts["R"] is None:
        raise CCBallError(f"{args.command} needs --R (flag or config)")
    return opts


def _quad_cfg(opts, base):
    abs_tol = opts["abs_tol"] if opts["abs_tol"] is not None else base.abs_tol
    rel_tol = opts["rel_tol"] if opts["rel_tol"] is not None else base.rel_tol
    return QuadConfig(abs_tol=abs_tol, rel_tol=rel_tol, max_depth=base.max_depth)


# -- output -------------------------------------------------------------------

def _num(v):
    if v is None:
        return "nan"
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return "%.17g" % float(v)


def _json_val(v):
    if v is None or isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return int(v)
    v = float(v)
    return None if math.isnan(v) else v


def render(columns, rows, fmt):
    if fmt == "json":
        return json.dumps([{c: _json_val(r[c]) for c in columns} for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_num(r[c]) for c in columns])
    return buf.getvalue()


@contextmanager
def _sink(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def emit(opts, columns, rows):
    with _sink(opts["out"]) as fh:
        fh.write(render(columns, rows, opts["format"]))


# -- commands -----------------------------------------------------------------

def cmd_geodesic(opts, profiles):
    cfg = _quad_cfg(opts, geodesics.GEODESIC_CFG)
    params = GeodesicParams(opts["lam"], opts["mu"])
    n = int(opts["n"])
    if (opts["x_end"] is None) == (opts["r_end"] is None):
        raise CCBallError("give exactly one of --x-end / --r-end")
    if opts["r_end"] is not None:
        r_end = opts["r_end"]
        r_star = jacobian.arc_length_at_turning(params, profiles, cfg)
        if r_end >= r_star:
            xs = geodesics.turning_point(params, profiles)
            raise TurningPointError(
                f"r_end={r_end} reaches the turning point x*={xs!r} (r*={r_star!r})", x_star=xs)
        x_end = jacobian.x_of_r(params, profiles, r_end, cfg, x_tol=X_TOL)
    else:
        x_end = opts["x_end"]
        r_end = geodesics.geodesic_map(params, profiles, x_end, cfg).r
    xs = geodesics.turning_point(params, profiles)
    xa = geodesics.graded_abscissae(x_end, xs, n)
    if r_end >= 1.0:
        # guarantee a sample at unit distance
        x1 = x_end if r_end == 1.0 else jacobian.x_of_r(params, profiles, 1.0, cfg, x_tol=X_TOL)
        xa = np.union1d(xa, [x1])
    curve = geodesics.geodesic_curve(params, profiles, x_end, n, cfg, abscissae=xa)
    rows = [{"t": t, "x": p.x, "y": p.y, "z": p.z} for t, p in curve]
    emit(opts, ["t", "x", "y", "z"], rows)
    return EXIT_OK


def cmd_sphere(opts, profiles):
    cfg = _quad_cfg(opts, geodesics.GEODESIC_CFG)
    R = opts["R"]
    if R < 0:
        raise CCBallError("R must be nonnegative")
    lam_max, mu_max = opts["lambda_max"], opts["mu_max"]
    for name, prof, given in (("lambda", profiles.f, lam_max), ("mu", profiles.g, mu_max)):
        if given is None and R > 0 and prof.value(R) == 0:
            raise CCBallError(f"profile vanishes at R={R}; pass --{name}-max")
    # every grid point sits at the origin when R = 0
    if lam_max is None:
        lam_max = 2.0 / profiles.f.value(R) if R > 0 else 1.0
    if mu_max is None:
        mu_max = 2.0 / profiles.g.value(R) if R > 0 else 1.0
    rows = []
    for lam in np.linspace(0.0, lam_max, int(opts["n_lambda"])):
        for mu in np.linspace(0.0, mu_max, int(opts["n_mu"])):
            row = {"lambda": lam, "mu": mu, "x": None, "y": None, "z": None}
            params = GeodesicParams(lam, mu)
            if R == 0:
                row.update(x=0.0, y=0.0, z=0.0)
            elif R < jacobian.arc_length_at_turning(params, profiles, cfg):
                x = jacobian.x_of_r(params, profiles, R, cfg, x_tol=X_TOL)
                gp = geodesics.geodesic_map(params, profiles, x, cfg)
                row.update(x=gp.x, y=gp.y, z=gp.z)
            rows.append(row)
    emit(opts, ["lambda", "mu", "x", "y", "z"], rows)
    return EXIT_OK


BOUNDS_COLUMNS = ["R", "lower", "volume", "vol_err", "upper", "ratio_lv", "ratio_vu"]


def cmd_bounds(opts, profiles):
    cfg = _quad_cfg(opts, measure.COLUMN_CFG)
    radii = _floats(opts["R"])
    reports = measure.bound_ratio_scan(profiles, radii, cfg, n=int(opts["nodes"]),
                                       n_jobs=int(opts["jobs"]))
    for rep in reports:
        if rep.error:
            print(f"R={rep.R}: volume failed: {rep.error}", file=sys.stderr)
    emit(opts, BOUNDS_COLUMNS, [rep.row() for rep in reports])
    return EXIT_OK


def cmd_volume(opts, profiles):
    cfg = _quad_cfg(opts, measure.COLUMN_CFG)
    vol, err = measure.ball_volume(profiles, opts["R"], opts["method"], cfg,
                                   n=int(opts["nodes"]), cells=int(opts["cells"]),
                                   n_jobs=int(opts["jobs"]))
    emit(opts, ["R", "method", "volume", "vol_err"],
         [{"R": opts["R"], "method": opts["method"], "volume": vol, "vol_err": err}])
    return EXIT_OK


JACOBIAN_COLUMNS = ["lambda", "mu", "x", "det_closed", "det_matrix", "det_fd", "max_rel_err"]


def jacobian_rows(profiles, points, cfg, min_d):
    """Determinant comparison rows and the list of skipped points."""
    rows, skipped = [], []
    for lam, mu, x in points:
        params = GeodesicParams(lam, mu)
        xs = geodesics.turning_point(params, profiles)
        if (xs is not None and x >= xs) or float(geodesics.denominator(params, profiles, x)) <= min_d:
            skipped.append((lam, mu, x))
            continue
        closed = jacobian.jacobian_det(params, profiles, x, cfg)
        matrix = jacobian.jacobian_partials(params, profiles, x, cfg).det()
        fd = jacobian.fd_jacobian(params, profiles, x, cfg=cfg).det()
        scale = abs(closed)
        err = max(abs(matrix - closed), abs(fd - closed)) / scale if scale > 0 else math.inf
        rows.append({"lambda": lam, "mu": mu, "x": x, "det_closed": closed,
                     "det_matrix": matrix, "det_fd": fd, "max_rel_err": err})
    return rows, skipped


def cmd_jacobian_check(opts, profiles):
    cfg = _quad_cfg(opts, geodesics.GEODESIC_CFG)
    lams, mus, xs = _floats(opts["lambdas"]), _floats(opts["mus"]), _floats(opts["xs"])
    points = [(lam, mu, x) for lam in lams for mu in mus for x in xs]
    n_random = int(opts["random"])
    if n_random and lams and mus and xs:
        rng = np.random.default_rng(int(opts["seed"]))
        lo = np.array([min(lams), min(mus), min(xs)])
        hi = np.array([max(lams), max(mus), max(xs)])
        points += [tuple(map(float, p)) for p in rng.uniform(lo, hi, size=(n_random, 3))]
    rows, skipped = jacobian_rows(profiles, points, cfg, float(opts["min_d"]))
    if skipped:
        print(f"skipped {len(skipped)} point(s) at or near the turning point "
              f"(D <= {opts['min_d']})", file=sys.stderr)
    emit(opts, JACOBIAN_COLUMNS, rows)
    worst = max((r["max_rel_err"] for r in rows), default=0.0)
    print(f"max relative error {worst:.3e} over {len(rows)} point(s)", file=sys.stderr)
    return EXIT_OK if worst <= float(opts["tol"]) else EXIT_CHECK_FAILED


def cmd_profile_info(opts, profiles):
    rows = []
    for x in _floats(opts["x"]):
        rows.append({"x": x,
                     "f": profiles.f.value(x), "df": profiles.f.deriv(x),
                     "logd_f": profiles.f.log_deriv_mag(x),
                     "g": profiles.g.value(x), "dg": profiles.g.deriv(x),
                     "logd_g": profiles.g.log_deriv_mag(x)})
    emit(opts, ["x", "f", "df", "logd_f", "g", "dg", "logd_g"], rows)
    return EXIT_OK


COMMANDS = {
    "geodesic": cmd_geodesic,
    "sphere": cmd_sphere,
    "bounds": cmd_bounds,
    "volume": cmd_volume,
    "jacobian-check": cmd_jacobian_check,
    "profile-info": cmd_profile_info,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.version:
        from . import __version__
        print(f"ccball {__version__} ({BACKEND} kernels)")
        return EXIT_OK
    if args.command is None:
        parser.print_help()
        return EXIT_ERROR
    try:
        opts = resolve(args)
        if opts["format"] not in ("csv", "json"):
            raise CCBallError(f"unknown format {opts['format']!r}")
        profiles = ProfilePair.parse(opts["f"], opts["g"])
        return COMMANDS[args.command](opts, profiles)
    except (CCBallError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR
