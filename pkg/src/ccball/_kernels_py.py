"""Pure numpy implementation of the geodesic kernels.

Mirrors ``_kernels.pyx`` function for function; used when the compiled
extension is unavailable or when ``CCBALL_PURE_PYTHON=1`` is set.

All kernels integrate the vector

    [1, lam f^2, mu g^2] / sqrt(D)   and   [f^2, g^2, f^2 g^2] / D^(3/2)

with D = 1 - lam^2 f^2 - mu^2 g^2.  When a turning point ``xstar`` > 0 is
supplied the integration runs in u with t = xstar - u^2, and D is evaluated
as lam^2 (f*^2 - f^2) + mu^2 (g*^2 - g^2) through log1p/expm1 so that it
keeps full relative accuracy next to the turning point.
"""
from __future__ import annotations

import math

import numpy as np

from .quadrature import NODES15, WEIGHTS_G7, WEIGHTS_K15, find_root, gk15_error
from .errors import DomainError, NoBracketError

NAME = "python"
MAX_EVALS = 600_000


def profile_value(code, t):
    kind, a, b = code
    t = np.asarray(t, dtype=float)
    if kind == 0:
        return np.power(np.maximum(t, 0.0), a)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(t > 0, np.exp(-a / np.power(np.maximum(t, 0.0), b)), 0.0)


def _log_ratio(code, xs, delta):
    # ln(f(xs - delta*xs) / f(xs))
    kind, a, b = code
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if kind == 0:
            return a * np.log1p(-delta)
        return -a * xs ** (-b) * np.expm1(-b * np.log1p(-delta))


def denominator(fcode, gcode, lam, mu, x):
    f = float(profile_value(fcode, x))
    g = float(profile_value(gcode, x))
    return 1.0 - (lam * f) ** 2 - (mu * g) ** 2


class _Integrand:
    def __init__(self, fcode, gcode, lam, mu, xstar, nc):
        self.fcode, self.gcode = fcode, gcode
        self.lam, self.mu = lam, mu
        self.xs = xstar
        self.nc = nc
        if xstar > 0:
            self.fs2 = float(profile_value(fcode, xstar)) ** 2
            self.gs2 = float(profile_value(gcode, xstar)) ** 2
            self.lfs2 = (lam * float(profile_value(fcode, xstar))) ** 2
            self.mgs2 = (mu * float(profile_value(gcode, xstar))) ** 2

    def __call__(self, v):
        if self.xs > 0:
            delta = np.minimum(v * v / self.xs, 1.0)
            lrf = _log_ratio(self.fcode, self.xs, delta)
            lrg = _log_ratio(self.gcode, self.xs, delta)
            f2 = self.fs2 * np.exp(2.0 * lrf)
            g2 = self.gs2 * np.exp(2.0 * lrg)
            D = -(self.lfs2 * np.expm1(2.0 * lrf) + self.mgs2 * np.expm1(2.0 * lrg))
            jac = 2.0 * v
        else:
            f = profile_value(self.fcode, v)
            g = profile_value(self.gcode, v)
            f2, g2 = f * f, g * g
            # (lam f)^2 rather than lam^2 f^2: huge momenta meet tiny profiles
            D = 1.0 - np.square(self.lam * f) - np.square(self.mu * g)
            jac = 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            D = np.where(D > 0, D, np.nan)
            s = jac / np.sqrt(D)
            rows = [s, self.lam * f2 * s, self.mu * g2 * s]
            if self.nc > 3:
                s3 = s / D
                rows += [f2 * s3, g2 * s3, f2 * g2 * s3]
        return np.array(rows)


def _panels(fn, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = mid[:, None] + half[:, None] * NODES15[None, :]
    fk = fn(pts)  # (nc, m, 15)
    resk = np.einsum("cmk,k->cm", fk, WEIGHTS_K15) * half
    resg = np.einsum("cmk,k->cm", fk, WEIGHTS_G7) * half
    err = gk15_error(fk, resk, resg, half)
    return resk, err


def _adaptive(fn, a, b, nc, abs_tol, rel_tol, max_depth):
    """Globally adaptive vector Gauss-Kronrod on [a, b].

    Converged when every component satisfies sum(err_i) <= max(abs_tol,
    rel_tol*|I_i|).  Each sweep bisects all panels whose scaled error is
    within a factor two of the worst one.
    """
    if b <= a:
        return np.zeros(nc), np.zeros(nc), 0, True
    lo, hi = np.array([a]), np.array([b])
    vals, errs = _panels(fn, lo, hi)
    depth = np.zeros(1, dtype=int)
    n_evals = 15
    while True:
        total = vals.sum(axis=1)
        if np.any(np.isnan(total)):
            return total, errs.sum(axis=1), n_evals, False
        tau = np.maximum(abs_tol, rel_tol * np.abs(total))
        total_err = errs.sum(axis=1)
        if np.all(total_err <= tau):
            return total, total_err, n_evals, True
        scaled = np.max(errs / tau[:, None], axis=0)
        scaled[depth >= max_depth] = 0.0
        worst = scaled.max()
        if worst <= 0.0 or n_evals > MAX_EVALS:
            return total, total_err, n_evals, False
        split = scaled >= 0.5 * worst
        keep = ~split
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        new_vals, new_errs = _panels(fn, new_lo, new_hi)
        n_evals += 15 * new_lo.size
        new_depth = np.concatenate([depth[split], depth[split]]) + 1
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        vals = np.concatenate([vals[:, keep], new_vals], axis=1)
        errs = np.concatenate([errs[:, keep], new_errs], axis=1)
        depth = np.concatenate([depth[keep], new_depth])


def _native(fcode, gcode, lam, mu, lo_v, hi_v, xstar, abs_tol, rel_tol, max_depth, nc):
    fn = _Integrand(fcode, gcode, lam, mu, xstar, nc)
    return _adaptive(fn, lo_v, hi_v, nc, abs_tol, rel_tol, max_depth)


def moments(fcode, gcode, lam, mu, a, b, xstar, abs_tol, rel_tol, max_depth, nc=6):
    """Integrals of the geodesic integrand vector over x in [a, b].

    Returns ``(values, errors, n_evals, converged)`` with six-tuples of
    values (r, y, z, A, B, C); entries past ``nc`` are zero.
    """
    if xstar > 0:
        if b > xstar:
            raise DomainError(f"upper limit {b} beyond turning point {xstar}")
        lo_v, hi_v = math.sqrt(max(xstar - b, 0.0)), math.sqrt(max(xstar - a, 0.0))
    else:
        lo_v, hi_v = a, b
    vals, errs, n_evals, ok = _native(fcode, gcode, lam, mu, lo_v, hi_v, xstar,
                                      abs_tol, rel_tol, max_depth, nc)
    pad = [0.0] * (6 - nc)
    return (tuple(vals.tolist()) + tuple(pad), tuple(errs.tolist()) + tuple(pad),
            int(n_evals), bool(ok))


def turning_point(fcode, gcode, lam, mu, x_max):
    """Smallest x in (0, x_max] with D(x) = 0, or -1.0 when D > 0 throughout."""
    if lam == 0.0 and mu == 0.0:
        return -1.0
    d_hi = denominator(fcode, gcode, lam, mu, x_max)
    if d_hi > 0:
        return -1.0
    if d_hi == 0.0:
        return float(x_max)
    return find_root(lambda x: denominator(fcode, gcode, lam, mu, x), 0.0, x_max, x_tol=0.0)


def x_of_r(fcode, gcode, lam, mu, r, xstar, x_hi, abs_tol, rel_tol, max_depth, x_tol):
    """Invert r(x) = integral of D^(-1/2) from 0 to x.

    With ``xstar`` > 0 the search runs over u in [0, sqrt(xstar)] where
    x = xstar - u^2; otherwise over x in [0, x_hi].
    """
    if r <= 0:
        return 0.0
    if xstar > 0:
        u_top = math.sqrt(xstar)

        def resid(u):
            return _native(fcode, gcode, lam, mu, u, u_top, xstar, abs_tol, rel_tol,
                           max_depth, 3)[0][0] - r

        try:
            u = find_root(resid, 0.0, u_top, x_tol=x_tol / (2.0 * u_top))
        except NoBracketError:
            raise DomainError(f"arc length {r} not below the turning-point arc length") from None
        return xstar - u * u

    def resid_x(x):
        return _native(fcode, gcode, lam, mu, 0.0, x, -1.0, abs_tol, rel_tol,
                       max_depth, 3)[0][0] - r

    try:
        return find_root(resid_x, 0.0, x_hi, x_tol=x_tol)
    except NoBracketError:
        raise DomainError(f"arc length {r} not reached for x <= {x_hi}") from None


def volume_column(fcode, gcode, lam, mu, x_max, xstar, nodes, weights,
                  abs_tol, rel_tol, max_depth):
    """Integral over x in [0, x_max] of |AB - lam^2 AC - mu^2 BC|.

    This equals the integral of |det d(x,y,z)/d(r,lam,mu)| over the arc
    length r for fixed momenta.  Outer Gauss-Legendre ``nodes``/``weights``
    on [-1, 1]; A, B, C accumulated between consecutive nodes.
    """
    nodes = np.asarray(nodes, dtype=float)
    weights = np.asarray(weights, dtype=float)
    lam2, mu2 = lam * lam, mu * mu
    if xstar > 0:
        v_lo, v_hi = math.sqrt(max(xstar - x_max, 0.0)), math.sqrt(xstar)
    else:
        v_lo, v_hi = 0.0, x_max
    half = 0.5 * (v_hi - v_lo)
    mid = 0.5 * (v_hi + v_lo)
    vs = mid + half * nodes
    order = np.argsort(-vs) if xstar > 0 else np.argsort(vs)
    A = B = C = 0.0
    prev = v_hi if xstar > 0 else 0.0
    total = 0.0
    for k in order:
        v = vs[k]
        seg = (v, prev) if xstar > 0 else (prev, v)
        vals = _native(fcode, gcode, lam, mu, seg[0], seg[1], xstar, abs_tol, rel_tol,
                       max_depth, 6)[0]
        A += vals[3]
        B += vals[4]
        C += vals[5]
        bracket = A * B - lam2 * A * C - mu2 * B * C
        jac = 2.0 * v if xstar > 0 else 1.0
        total += weights[k] * abs(bracket) * jac
        prev = v
    return total * half
