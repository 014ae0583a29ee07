"""Geodesics from the origin for the metric dx^2 + dy^2/f(x)^2 + dz^2/g(x)^2.

Along an x-monotone geodesic the momenta lam and mu are conserved and, with
D(x) = 1 - lam^2 f^2 - mu^2 g^2,

    r(x) = int_0^x D^(-1/2),   y(x) = int_0^x lam f^2 D^(-1/2),
    z(x) = int_0^x mu g^2 D^(-1/2).

The chart is valid up to the turning point x*, the first zero of D.  All
computations run in the positive octant; ``GeodesicParams`` carries the
branch signs that map results back to the other seven.  Profiles are
extended evenly to negative x.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from ._core import kernels
from .errors import (ConvergenceError, DomainError, NoBracketError, TurningPointError,
                     UnreachableTargetError)
from .profiles import Profile, ProfilePair
from .quadrature import QuadConfig, find_root

# geodesic integrals feed Newton solves and finite differences, so they run
# far tighter than the generic quadrature default; abs_tol is effectively
# off so that exponentially small z values keep full relative accuracy
GEODESIC_CFG = QuadConfig(abs_tol=1e-300, rel_tol=1e-12)

TURNING_GUARD = 1e-12      # x_end <= x* (1 - TURNING_GUARD)
SINGULAR_SWITCH = 0.999    # u-substitution once x_end > SINGULAR_SWITCH * x*
SHOOT_MAX_ITER = 100
SHOOT_BOUNDARY = 1e-10     # 1 - |(p, q)| below this counts as pinned
_TINY = np.finfo(float).tiny


def _sign(v):
    return -1 if v < 0 else 1


@dataclass(frozen=True)
class GeodesicParams:
    """Conserved momenta and branch signs of one geodesic from the origin.

    ``lam`` and ``mu`` are signed; ``sign_y``/``sign_z`` default to their
    signs (+1 for zero).  ``sign_x`` selects the x < 0 mirror image.
    """

    lam: float
    mu: float
    sign_x: int = 1
    sign_y: Optional[int] = None
    sign_z: Optional[int] = None

    def __post_init__(self):
        for name in ("lam", "mu"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        for name, mom in (("sign_y", self.lam), ("sign_z", self.mu)):
            s = getattr(self, name)
            if s is None:
                object.__setattr__(self, name, _sign(mom))
            elif s not in (1, -1):
                raise DomainError(f"{name} must be +1 or -1, got {s}")
            elif mom != 0 and s != _sign(mom):
                raise DomainError(f"{name}={s} contradicts momentum sign {mom}")
        if self.sign_x not in (1, -1):
            raise DomainError(f"sign_x must be +1 or -1, got {self.sign_x}")

    @property
    def lam_abs(self):
        return abs(self.lam)

    @property
    def mu_abs(self):
        return abs(self.mu)


@dataclass(frozen=True)
class Point3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise DomainError(f"non-finite point {self!r}")

    def as_array(self):
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class GeodesicPoint:
    params: GeodesicParams
    x: float
    r: float
    y: float
    z: float

    @property
    def point(self):
        return Point3(self.x, self.y, self.z)


class SampledCurve:
    """Samples (t_i, p_i) of a curve with strictly increasing t."""

    def __init__(self, t, xyz):
        t = np.asarray(t, dtype=float)
        xyz = np.asarray(xyz, dtype=float)
        if t.ndim != 1 or xyz.shape != (t.size, 3):
            raise DomainError(f"shape mismatch: t {t.shape}, points {xyz.shape}")
        if np.any(np.diff(t) <= 0):
            raise DomainError("curve parameter must be strictly increasing")
        self.t = t
        self.xyz = xyz

    def __len__(self):
        return self.t.size

    def __iter__(self) -> Iterator[tuple]:
        for t, (x, y, z) in zip(self.t, self.xyz):
            yield float(t), Point3(float(x), float(y), float(z))

    @property
    def end(self):
        return Point3(*map(float, self.xyz[-1]))

    def metric_length(self, profiles: ProfilePair):
        """Polyline length with f, g frozen at each segment's left endpoint."""
        d = np.diff(self.xyz, axis=0)
        xl = np.abs(self.xyz[:-1, 0])
        return float(np.sum(np.sqrt(_quad_form(d, xl, profiles))))


# -- low-level helpers --------------------------------------------------------

def _check_x(profiles, x):
    if not 0 <= x <= profiles.domain_max:
        raise DomainError(f"x={x} outside [0, {profiles.domain_max}]")


def _moments(profiles, lam, mu, a, b, xs, cfg, nc=3):
    fc, gc = profiles.codes
    vals, errs, _, ok = kernels.moments(fc, gc, lam, mu, a, b, xs, cfg.abs_tol,
                                        cfg.rel_tol, cfg.max_depth, nc)
    if not ok:
        raise ConvergenceError(
            f"geodesic quadrature did not converge on [{a}, {b}] for lam={lam}, mu={mu}")
    return vals


def _turning(profiles, lam, mu, x_max=None):
    if x_max is None:
        x_max = profiles.domain_max
    fc, gc = profiles.codes
    xs = kernels.turning_point(fc, gc, abs(lam), abs(mu), x_max)
    return xs if xs > 0 else None


def _mode_xstar(xs, x_end):
    # the u-substitution is only worth it close to the turning point
    if xs is not None and x_end > SINGULAR_SWITCH * xs:
        return xs
    return -1.0


def _guard(xs, x_end):
    if xs is not None and x_end > xs * (1.0 - TURNING_GUARD):
        raise TurningPointError(
            f"x_end={x_end} is at or beyond the turning point x*={xs!r}", x_star=xs)


# -- public operations ----------------------------------------------------------

def denominator(params: GeodesicParams, profiles: ProfilePair, x):
    """D(x) = 1 - lam^2 f(x)^2 - mu^2 g(x)^2 (vectorized over x)."""
    f = profiles.f.value(np.abs(x))
    g = profiles.g.value(np.abs(x))
    return 1.0 - params.lam ** 2 * np.square(f) - params.mu ** 2 * np.square(g)


def turning_point(params: GeodesicParams, profiles: ProfilePair,
                  x_max: Optional[float] = None) -> Optional[float]:
    """Smallest x* in (0, x_max] with D(x*) = 0, or None if D > 0 there."""
    if x_max is None:
        x_max = profiles.domain_max
    _check_x(profiles, x_max)
    return _turning(profiles, params.lam, params.mu, x_max)


def geodesic_map(params: GeodesicParams, profiles: ProfilePair, x_end: float,
                 cfg: QuadConfig = GEODESIC_CFG) -> GeodesicPoint:
    """(r, y, z) of the geodesic ``params`` at abscissa |x| = x_end >= 0.

    The returned point has x = sign_x * x_end and y, z carrying the branch
    signs.  Raises ``TurningPointError`` at or past the turning point.
    """
    _check_x(profiles, x_end)
    lam, mu = params.lam_abs, params.mu_abs
    xs = _turning(profiles, lam, mu)
    _guard(xs, x_end)
    if x_end == 0:
        return GeodesicPoint(params, 0.0, 0.0, 0.0, 0.0)
    r, y, z = _moments(profiles, lam, mu, 0.0, x_end, _mode_xstar(xs, x_end), cfg)[:3]
    return GeodesicPoint(params, params.sign_x * x_end, r, params.sign_y * y,
                         params.sign_z * z)


def graded_abscissae(x_end, xs, n):
    """n abscissae on [0, x_end], uniform in u = sqrt(x* - x) if x* exists."""
    s = np.linspace(0.0, 1.0, n)
    if xs is None:
        return x_end * s
    u0, u1 = math.sqrt(xs), math.sqrt(max(xs - x_end, 0.0))
    x = xs - (u0 + (u1 - u0) * s) ** 2
    x[0], x[-1] = 0.0, x_end
    return x


def geodesic_curve(params: GeodesicParams, profiles: ProfilePair, x_end: float,
                   n: int, cfg: QuadConfig = GEODESIC_CFG,
                   abscissae=None) -> SampledCurve:
    """Samples of the geodesic on [0, x_end], parameterized by arc length.

    Abscissae are graded toward the turning point when one exists (uniform
    in sqrt(x* - x)); pass ``abscissae`` to override.  Arc length and y, z
    are accumulated segment by segment.
    """
    if n < 2:
        raise DomainError("geodesic_curve needs n >= 2")
    _check_x(profiles, x_end)
    if x_end <= 0:
        raise DomainError("geodesic_curve needs x_end > 0")
    lam, mu = params.lam_abs, params.mu_abs
    xs = _turning(profiles, lam, mu)
    _guard(xs, x_end)
    xs_mode = _mode_xstar(xs, x_end)
    if abscissae is None:
        xa = graded_abscissae(x_end, xs, n)
    else:
        xa = np.asarray(abscissae, dtype=float)
        if xa[0] != 0 or np.any(np.diff(xa) <= 0) or xa[-1] > x_end:
            raise DomainError("abscissae must start at 0 and increase up to x_end")
    acc = np.zeros((xa.size, 3))
    for i in range(1, xa.size):
        acc[i] = _moments(profiles, lam, mu, xa[i - 1], xa[i], xs_mode, cfg)[:3]
    acc = np.cumsum(acc, axis=0)
    xyz = np.column_stack([params.sign_x * xa, params.sign_y * acc[:, 1],
                           params.sign_z * acc[:, 2]])
    return SampledCurve(acc[:, 0], xyz)


# -- shooting -------------------------------------------------------------------

class _Shot:
    """y, z and the fixed-x Jacobian at one (lam, mu), all in the octant."""

    def __init__(self, profiles, x_t, lam, mu, cfg):
        xs = _turning(profiles, lam, mu)
        if xs is not None and x_t >= xs:
            self.ok = False
            return
        self.ok = True
        r, y, z, A, B, C = _moments(profiles, lam, mu, 0.0, x_t, _mode_xstar(xs, x_t),
                                    cfg, nc=6)
        self.r, self.y, self.z = r, y, z
        self.jac = np.array([[A - mu * mu * C, lam * mu * C],
                             [lam * mu * C, B - lam * lam * C]])


def _seed(profiles, x_t, y_t, z_t, cfg):
    # exact as the momenta tend to zero: y ~ lam * int f^2, z ~ mu * int g^2
    A, B = _moments(profiles, 0.0, 0.0, 0.0, x_t, -1.0, cfg, nc=6)[3:5]
    lam0 = y_t / A if A > 0 else 0.0
    mu0 = z_t / B if B > 0 else 0.0
    return lam0, mu0


def _newton(profiles, x_t, y_t, z_t, f_t, g_t, tol, cfg):
    """Damped Newton in scaled momenta (p, q) = (lam f_t, mu g_t).

    Returns ``("ok", (lam, mu, r))``, ``("pinned", None)`` when the iterates
    are driven onto the chart boundary (the convex potential has no interior
    minimizer, so the target is outside the chart image) or
    ``("stalled", None)``.  A zero target component has zero momentum
    exactly (y is odd in lam) and is left out of the solve.
    """
    active = np.array([y_t > 0, z_t > 0])
    prof = np.where(active, [f_t, g_t], 1.0)
    scale_r = 1.0 / (x_t * prof)   # residuals in units of x_t f_t, x_t g_t
    target = np.array([y_t, z_t])
    lam, mu = _seed(profiles, x_t, y_t, z_t, cfg)
    pq = np.array([lam, mu]) * prof * active
    rho = math.hypot(*pq)
    if rho > 0.95:
        pq *= 0.95 / rho

    def evaluate(pq):
        lam, mu = pq / prof
        shot = _Shot(profiles, x_t, lam, mu, cfg)
        if not shot.ok:
            return None, None
        return shot, (np.array([shot.y, shot.z]) - target) * scale_r

    shot, res = evaluate(pq)
    if shot is None:
        return "stalled", None
    for _ in range(SHOOT_MAX_ITER):
        if abs(shot.y - y_t) <= tol[0] and abs(shot.z - z_t) <= tol[1]:
            lam, mu = pq / prof
            return "ok", (lam, mu, shot.r)
        rho = math.hypot(*pq)
        if 1.0 - rho < SHOOT_BOUNDARY:
            return "pinned", None
        J = shot.jac * scale_r[:, None] / prof[None, :]
        step = np.zeros(2)
        try:
            step[active] = -np.linalg.solve(J[np.ix_(active, active)], res[active])
        except np.linalg.LinAlgError:
            return "stalled", None
        # at most 90% of the remaining way to the unit circle
        alpha = 1.0
        limit = 1.0 - 0.1 * (1.0 - rho)
        if math.hypot(*(pq + step)) > limit:
            alpha = _ray_fraction(pq, step, limit)
        norm0 = float(np.linalg.norm(res))
        for _ in range(40):
            cand = pq + alpha * step
            shot_n, res_n = evaluate(cand)
            if shot_n is not None and np.linalg.norm(res_n) <= (1.0 - 1e-4 * alpha) * norm0:
                break
            alpha *= 0.5
        else:
            return "stalled", None
        pq, shot, res = cand, shot_n, res_n
    return "stalled", None


def _ray_fraction(x0, d, radius):
    # largest alpha with |x0 + alpha d| = radius (x0 inside the circle)
    a = float(d @ d)
    b = 2.0 * float(x0 @ d)
    c = float(x0 @ x0) - radius * radius
    return (-b + math.sqrt(b * b - 4.0 * a * c)) / (2.0 * a)


def _bisect_shoot(profiles, x_t, y_t, z_t, f_t, g_t, tol, cfg):
    """Nested bisection: inner solve of y in p for fixed q, outer z in q.

    y is increasing in p at fixed q and, along the curve y = y_t, z is
    increasing in q, so both levels are monotone scalar root problems.
    Returns ``(lam, mu, r)`` or ``None``.
    """
    edge = 1.0 - 1e-13

    def shot_at(p, q):
        return _Shot(profiles, x_t, p / f_t if y_t > 0 else 0.0,
                     q / g_t if z_t > 0 else 0.0, cfg)

    def inner(q):
        # p solving y = y_t at this q, or None if y_t is out of reach
        if y_t == 0:
            return 0.0
        p_max = math.sqrt(max(1.0 - q * q, 0.0)) * edge
        top = shot_at(p_max, q)
        if not top.ok or top.y < y_t:
            return None
        return find_root(lambda p: shot_at(p, q).y - y_t, 0.0, p_max, x_tol=1e-15)

    def solve_at(q):
        p = inner(q)
        if p is None:
            return None
        shot = shot_at(p, q)
        return (p, shot) if shot.ok else None

    if z_t == 0:
        candidates = [0.0]
    else:
        # an unreachable inner solve means q is too large
        lo, hi = 0.0, edge
        while hi - lo > 1e-15:
            mid = 0.5 * (lo + hi)
            sol = solve_at(mid)
            if sol is None or sol[1].z > z_t:
                hi = mid
            else:
                lo = mid
        candidates = [lo, hi]
    for q in candidates:
        sol = solve_at(q)
        if sol is None:
            continue
        p, shot = sol
        if abs(shot.y - y_t) <= tol[0] and abs(shot.z - z_t) <= tol[1]:
            return (p / f_t if y_t > 0 else 0.0, q / g_t if z_t > 0 else 0.0, shot.r)
    return None


def shoot(target: Point3, profiles: ProfilePair, cfg: QuadConfig = GEODESIC_CFG):
    """Momenta of the x-monotone geodesic from the origin ending at ``target``.

    Returns ``(params, r)`` where r is the arc length to the target.  The
    residual tolerance per component is min(1e-8, 1e-10 * x f(x)) for y and
    likewise with g for z.  Raises ``UnreachableTargetError`` when the
    target lies outside the image of the pre-turning-point chart.
    """
    if not isinstance(target, Point3):
        target = Point3(*target)
    x_t, y_t, z_t = abs(target.x), abs(target.y), abs(target.z)
    if x_t == 0:
        raise DomainError("shoot needs target.x != 0")
    _check_x(profiles, x_t)
    sx, sy, sz = _sign(target.x), _sign(target.y), _sign(target.z)
    if y_t == 0 and z_t == 0:
        return GeodesicParams(0.0, 0.0, sx, sy, sz), x_t
    f_t = float(profiles.f.value(x_t))
    g_t = float(profiles.g.value(x_t))
    if (y_t > 0 and f_t == 0) or (z_t > 0 and g_t == 0):
        raise UnreachableTargetError(f"profile vanishes at x={x_t}; target {target} unreachable")
    if (y_t > 0 and f_t * f_t < _TINY) or (z_t > 0 and g_t * g_t < _TINY):
        # f^2 or g^2 subnormal: the integrals lose their relative precision
        raise DomainError(f"profile values at x={x_t} are below double-precision range")
    tol = (min(1e-8, 1e-10 * x_t * f_t), min(1e-8, 1e-10 * x_t * g_t))
    status, sol = _newton(profiles, x_t, y_t, z_t, f_t, g_t, tol, cfg)
    if status == "stalled":
        sol = _bisect_shoot(profiles, x_t, y_t, z_t, f_t, g_t, tol, cfg)
    if sol is None:
        raise UnreachableTargetError(
            f"target {target} is outside the image of the pre-turning-point chart")
    lam, mu, r = sol
    return GeodesicParams(sy * lam, sz * mu, sx, sy, sz), r


def distance(target: Point3, profiles: ProfilePair, cfg: QuadConfig = GEODESIC_CFG) -> float:
    """Arc length of the stationary geodesic from the origin to ``target``."""
    return shoot(target, profiles, cfg)[1]


def distance_2d(profile: Profile, x: float, y: float,
                cfg: QuadConfig = GEODESIC_CFG) -> float:
    """Distance from the origin to (x, y) for the planar metric dx^2 + dy^2/f^2."""
    x_t, y_t = abs(x), abs(y)
    if x_t == 0:
        raise DomainError("distance_2d needs x != 0")
    pair = ProfilePair(profile, profile)
    _check_x(pair, x_t)
    if y_t == 0:
        return x_t
    f_t = float(profile.value(x_t))
    if f_t == 0:
        raise UnreachableTargetError(f"profile vanishes at x={x_t}")

    def resid(p):
        lam = p / f_t
        xs = x_t if p >= 1.0 else _turning(pair, lam, 0.0)
        return _moments(pair, lam, 0.0, 0.0, x_t, _mode_xstar(xs, x_t), cfg)[1] - y_t

    try:
        p = find_root(resid, 0.0, 1.0, x_tol=1e-16)
    except NoBracketError:
        raise UnreachableTargetError(
            f"({x}, {y}) is outside the image of the planar chart") from None
    if p >= 1.0:
        raise UnreachableTargetError(f"({x}, {y}) lies on the planar chart boundary")
    lam = p / f_t
    xs = _turning(pair, lam, 0.0)
    return _moments(pair, lam, 0.0, 0.0, x_t, _mode_xstar(xs, x_t), cfg)[0]


def distance_2d_xz(profile_g: Profile, x: float, z: float,
                   cfg: QuadConfig = GEODESIC_CFG) -> float:
    """Planar distance for the metric dx^2 + dz^2/g^2."""
    return distance_2d(profile_g, x, z, cfg)


# -- admissibility --------------------------------------------------------------

def _quad_form(d, x_at, profiles):
    f = profiles.f.value(x_at)
    g = profiles.g.value(x_at)
    with np.errstate(divide="ignore", invalid="ignore"):
        # (d / f)^2 rather than d^2 / f^2: both underflow for tiny f
        ty = np.where(d[:, 1] == 0, 0.0, np.square(d[:, 1] / f))
        tz = np.where(d[:, 2] == 0, 0.0, np.square(d[:, 2] / g))
    return np.square(d[:, 0]) + ty + tz


def is_subunit(curve: SampledCurve, profiles: ProfilePair, tol: float = 1e-9) -> bool:
    """Whether every sampled velocity satisfies x'^2 + y'^2/f^2 + z'^2/g^2 <= 1.

    Uses consecutive differences with f, g frozen at the segment endpoint of
    larger |x|, where the nondecreasing profiles are largest; any subunit
    curve then satisfies the discrete inequality.  It is relaxed to
    (1 + tol) dt^2.
    """
    if len(curve) < 2:
        raise DomainError("is_subunit needs at least two samples")
    dt = np.diff(curve.t)
    if np.any(dt <= 0):
        raise DomainError("degenerate curve: nonpositive parameter step")
    d = np.diff(curve.xyz, axis=0)
    # samples are only known to within their float spacing, which matters
    # once coordinates are subnormal
    slack = np.spacing(np.abs(curve.xyz[:-1])) + np.spacing(np.abs(curve.xyz[1:]))
    d = np.sign(d) * np.maximum(np.abs(d) - slack, 0.0)
    x_far = np.maximum(np.abs(curve.xyz[:-1, 0]), np.abs(curve.xyz[1:, 0]))
    q = _quad_form(d, x_far, profiles)
    return bool(np.all(q <= (1.0 + tol) * np.square(dt)))
