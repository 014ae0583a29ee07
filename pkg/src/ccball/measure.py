"""Volume of the metric ball B(0, R) and its closed-form bounds.

* ``upper_bound``: min{ fg / (F'^2 G'), fg / (F' G'^2) } at R
* ``lower_bound``: fg / max(F', G')^3 at R
* ``lower_bound_exact_integral``: V = int_0^R (R - x)^2 f g / 2, the volume
  filled by the three-leg staircase curves, which is a rigorous lower bound

Here F' and G' denote the logarithmic-derivative magnitudes |f'|/f and
|g'|/g.  ``ball_volume`` estimates |B(0, R)| either by integrating the
geodesic-coordinate Jacobian (``pushforward``) or by classifying the
cells of a uniform grid with ``distance`` (``grid``).
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._core import kernels
from .errors import CCBallError, DomainError, UnreachableTargetError
from .geodesics import (GEODESIC_CFG, GeodesicParams, Point3, SampledCurve, _moments,
                        _turning, shoot)
from .jacobian import x_of_r
from .profiles import ProfilePair
from .quadrature import QuadConfig, integrate

MEASURE_CFG = QuadConfig(abs_tol=1e-300, rel_tol=1e-12)
# the column quadrature only has to beat the outer tensor rule
COLUMN_CFG = QuadConfig(abs_tol=1e-300, rel_tol=1e-10)
PUSHFORWARD_NODES = 24
COLUMN_NODES = 32
GRID_CELLS = 40
_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class StaircaseParams:
    """Leg lengths of the curve x-leg [0, a], y-leg [a, b], z-leg [b, R]."""

    a: float
    b: float
    R: float

    def __post_init__(self):
        if not (0 <= self.a <= self.b <= self.R and self.R > 0):
            raise DomainError(f"need 0 <= a <= b <= R and R > 0, got {self}")


@dataclass
class BallReport:
    R: float
    lower: float
    upper: float
    volume: Optional[float] = None
    vol_err: Optional[float] = None
    error: Optional[str] = field(default=None, compare=False)

    @property
    def ratio_lv(self):
        return None if not self.volume else self.lower / self.volume

    @property
    def ratio_vu(self):
        return None if self.volume is None else self.volume / self.upper

    @property
    def bound_ratio(self):
        return None if not self.lower else self.upper / self.lower

    def row(self):
        return {"R": self.R, "lower": self.lower, "volume": self.volume,
                "vol_err": self.vol_err, "upper": self.upper,
                "ratio_lv": self.ratio_lv, "ratio_vu": self.ratio_vu}


# -- closed-form bounds ---------------------------------------------------------

def _log_derivs(profiles, R):
    if not 0 < R <= profiles.domain_max:
        raise DomainError(f"R={R} outside (0, {profiles.domain_max}]")
    return profiles.f.log_deriv_mag(R), profiles.g.log_deriv_mag(R)


def upper_bound(profiles: ProfilePair, R: float) -> float:
    Fp, Gp = _log_derivs(profiles, R)
    fg = profiles.f.value(R) * profiles.g.value(R)
    return fg * min(1.0 / (Fp * Fp * Gp), 1.0 / (Fp * Gp * Gp))


def lower_bound(profiles: ProfilePair, R: float) -> float:
    Fp, Gp = _log_derivs(profiles, R)
    fg = profiles.f.value(R) * profiles.g.value(R)
    return fg / max(Fp, Gp) ** 3


def lower_bound_exact_integral(profiles: ProfilePair, R: float,
                               cfg: QuadConfig = MEASURE_CFG) -> float:
    """V = int_0^R (R - x)^2 f(x) g(x) / 2 dx."""
    if R == 0:
        return 0.0
    if not 0 < R <= profiles.domain_max:
        raise DomainError(f"R={R} outside [0, {profiles.domain_max}]")
    f, g = profiles.f, profiles.g
    res = integrate(lambda x: 0.5 * (R - x) ** 2 * f.value(x) * g.value(x), 0.0, R, cfg)
    if not res.converged:
        raise CCBallError(f"staircase volume quadrature did not converge at R={R}")
    return res.value


def chain_lower_bound(profiles: ProfilePair, R: float) -> float:
    """(1/6) f(R - M) g(R - M) M^3 with M = min(1/F', 1/G') clamped to R.

    Since f, g are nondecreasing, restricting V to [R - M, R] gives this
    rigorous lower bound for V.
    """
    Fp, Gp = _log_derivs(profiles, R)
    M = min(1.0 / Fp, 1.0 / Gp, R)
    return profiles.f.value(R - M) * profiles.g.value(R - M) * M ** 3 / 6.0


# -- staircase curves -------------------------------------------------------------

def staircase_point(sp: StaircaseParams, profiles: ProfilePair, t):
    t = np.asarray(t, dtype=float)
    fa = float(profiles.f.value(sp.a))
    ga = float(profiles.g.value(sp.a))
    x = np.minimum(t, sp.a)
    y = (np.clip(t, sp.a, sp.b) - sp.a) * fa
    z = (np.maximum(t, sp.b) - sp.b) * ga
    return np.column_stack([x, y, z])


def staircase_curve(sp: StaircaseParams, profiles: ProfilePair, n: int) -> SampledCurve:
    """n uniform samples of the staircase on [0, R], plus the corners a, b.

    The corners are always sampled so that no difference quotient straddles
    two legs.
    """
    if n < 2:
        raise DomainError("staircase_curve needs n >= 2")
    t = np.union1d(np.linspace(0.0, sp.R, n), [sp.a, sp.b])
    return SampledCurve(t, staircase_point(sp, profiles, t))


def staircase_reach(profiles: ProfilePair, x0: float, y0: float, R: float) -> float:
    """Largest z reached by a staircase ending at (x0, y0, .) with budget R."""
    if not 0 <= x0 <= R:
        raise DomainError(f"need 0 <= x0 <= R, got x0={x0}, R={R}")
    f0 = float(profiles.f.value(x0))
    if y0 < 0 or y0 > (R - x0) * f0:
        raise DomainError(f"y0={y0} outside [0, (R - x0) f(x0)] = [0, {(R - x0) * f0}]")
    y_cost = y0 / f0 if y0 > 0 else 0.0
    return (R - x0 - y_cost) * float(profiles.g.value(x0))


# -- volume ---------------------------------------------------------------------

def column_extent(profiles: ProfilePair, lam: float, mu: float, R: float,
                  cfg: QuadConfig = GEODESIC_CFG):
    """``(x_max, x_star)`` of the geodesic (lam, mu) within arc length R.

    x_max is the abscissa at r = R or the turning point if that comes
    first; x_star is -1.0 when there is no turning point.
    """
    xs = _turning(profiles, lam, mu)
    params = GeodesicParams(lam, mu)
    if xs is None:
        return x_of_r(params, profiles, R, cfg), -1.0
    r_star = _moments(profiles, lam, mu, 0.0, xs, xs, cfg)[0]
    if r_star <= R:
        return xs, xs
    return x_of_r(params, profiles, R, cfg), xs


def _pushforward(profiles, R, n, n_col, cfg):
    fR = float(profiles.f.value(R))
    gR = float(profiles.g.value(R))
    if fR * fR < _TINY or gR * gR < _TINY:
        raise DomainError(f"profile values at R={R} are below double-precision range")
    s, w = np.polynomial.legendre.leggauss(n)
    s, w = 0.5 * (s + 1.0), 0.5 * w
    # lam = s/(1-s)/f(R): momenta scale like 1/f(R), tails decay fast
    mom = s / (1.0 - s)
    dmom = w / (1.0 - s) ** 2
    cn, cw = np.polynomial.legendre.leggauss(n_col)
    fc, gc = profiles.codes
    total = 0.0
    for i in range(n):
        lam = mom[i] / fR
        for j in range(n):
            mu = mom[j] / gR
            x_max, xs = column_extent(profiles, lam, mu, R)
            col = kernels.volume_column(fc, gc, lam, mu, x_max, xs, cn, cw,
                                        cfg.abs_tol, cfg.rel_tol, cfg.max_depth)
            total += dmom[i] * dmom[j] * col
    return 8.0 * total / (fR * gR)


def _grid_cell(args):
    profiles, R, cfg, center = args
    try:
        return distance_or_inf(Point3(*center), profiles, cfg) < R
    except CCBallError:
        return False


def distance_or_inf(p: Point3, profiles: ProfilePair, cfg: QuadConfig = GEODESIC_CFG):
    """distance(p), or +inf for targets outside the chart image."""
    try:
        return shoot(p, profiles, cfg)[1]
    except UnreachableTargetError:
        return math.inf


def _grid(profiles, R, cells, cfg, n_jobs):
    fR = float(profiles.f.value(R))
    gR = float(profiles.g.value(R))
    # subunit curves of length R stay in |y| <= R f(R), |z| <= R g(R)
    edges = [R, R * fR, R * gR]
    centers = [(np.arange(cells) + 0.5) * e / cells for e in edges]
    jobs = [(profiles, R, cfg, (x, y, z))
            for x in centers[0] for y in centers[1] for z in centers[2]]
    if n_jobs and n_jobs > 1:
        with ProcessPoolExecutor(n_jobs) as ex:
            inside = list(ex.map(_grid_cell, jobs, chunksize=256))
    else:
        inside = [_grid_cell(j) for j in jobs]
    cell_vol = edges[0] * edges[1] * edges[2] / cells ** 3
    inside = np.array(inside, dtype=bool).reshape(cells, cells, cells)
    # cells with a neighbour of the other kind: half of each is misclassified
    # area, on average, by the center rule
    pad = np.pad(inside, 1, mode="edge")
    mixed = np.zeros_like(inside)
    for axis in range(3):
        for shift in (-1, 1):
            mixed |= np.roll(pad, shift, axis=axis)[1:-1, 1:-1, 1:-1] != inside
    volume = 8.0 * int(inside.sum()) * cell_vol
    return volume, 8.0 * 0.5 * int(mixed.sum()) * cell_vol


def ball_volume(profiles: ProfilePair, R: float, method: str = "pushforward",
                cfg: QuadConfig = COLUMN_CFG, n: int = PUSHFORWARD_NODES,
                n_col: int = COLUMN_NODES, cells: int = GRID_CELLS,
                n_jobs: Optional[int] = None):
    """``(volume, err)`` estimate of |B(0, R)| covered by the geodesic chart.

    pushforward: 8 * int |det d(x,y,z)/d(r,lam,mu)| over the positive-octant
    momenta and r < min(R, r(x*)), by an n x n Gauss-Legendre rule in the
    compactified momenta; err compares with a rule of about 2n/3 nodes.

    grid: 8 * (volume of the cells of a cells^3 grid on the positive-octant
    bounding box whose centers have distance < R).
    """
    if R == 0:
        return 0.0, 0.0
    if not 0 < R <= profiles.domain_max:
        raise DomainError(f"R={R} outside (0, {profiles.domain_max}]")
    if method == "pushforward":
        v = _pushforward(profiles, R, n, n_col, cfg)
        v_coarse = _pushforward(profiles, R, max(2, (2 * n) // 3), n_col, cfg)
        return float(v), float(abs(v - v_coarse))
    if method == "grid":
        return _grid(profiles, R, cells, GEODESIC_CFG, n_jobs)
    raise DomainError(f"unknown volume method {method!r}")


def _report(args):
    profiles, R, cfg, n = args
    rep = BallReport(R, lower_bound(profiles, R), upper_bound(profiles, R))
    try:
        rep.volume, rep.vol_err = ball_volume(profiles, R, "pushforward", cfg, n=n)
    except CCBallError as exc:
        rep.error = str(exc)
    return rep


def bound_ratio_scan(profiles: ProfilePair, R_list: Sequence[float],
                     cfg: QuadConfig = COLUMN_CFG, n: int = PUSHFORWARD_NODES,
                     n_jobs: Optional[int] = None):
    """BallReport per R, in input order; per-R volume failures are recorded."""
    jobs = [(profiles, float(R), cfg, n) for R in R_list]
    if n_jobs and n_jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(n_jobs) as ex:
            return list(ex.map(_report, jobs))
    return [_report(j) for j in jobs]
