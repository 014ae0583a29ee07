"""Geodesic coordinates (r, lam, mu) and their Jacobian.

For fixed momenta the map r -> (x, y, z) runs along one geodesic; varying
(lam, mu) sweeps the family.  With D = 1 - lam^2 f^2 - mu^2 g^2 and

    A = int_0^x f^2 D^(-3/2),  B = int_0^x g^2 D^(-3/2),
    C = int_0^x f^2 g^2 D^(-3/2),

the nine partials at fixed r are closed-form in A, B, C and

    det d(x, y, z)/d(r, lam, mu) = sqrt(D) (AB - lam^2 AC - mu^2 BC).

The bracket equals the determinant of the Hessian of the strictly convex
function (lam, mu) -> -int_0^x sqrt(D), so it is positive whenever x > 0.
Momenta enter the formulas signed; ``sign_x`` flips the x row.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._core import kernels
from .errors import DomainError
from .geodesics import (GEODESIC_CFG, GeodesicParams, _check_x, _guard, _mode_xstar,
                        _moments, _turning, geodesic_map)
from .profiles import ProfilePair
from .quadrature import QuadConfig

FD_STEP = 1e-5


@dataclass(frozen=True)
class AbcIntegrals:
    A: float
    B: float
    C: float

    def bracket(self, lam, mu):
        """AB - lam^2 AC - mu^2 BC."""
        return self.A * self.B - lam * lam * self.A * self.C - mu * mu * self.B * self.C


@dataclass(frozen=True)
class JacobianMatrix:
    """Rows (x, y, z), columns (r, lam, mu)."""

    values: np.ndarray

    def det(self):
        return float(np.linalg.det(self.values))

    def __getitem__(self, idx):
        return self.values[idx]


def abc_integrals(params: GeodesicParams, profiles: ProfilePair, x: float,
                  cfg: QuadConfig = GEODESIC_CFG) -> AbcIntegrals:
    """A, B, C on [0, |x|]; requires |x| strictly before the turning point."""
    x = abs(x)
    _check_x(profiles, x)
    lam, mu = params.lam_abs, params.mu_abs
    xs = _turning(profiles, lam, mu)
    _guard(xs, x)
    if x == 0:
        return AbcIntegrals(0.0, 0.0, 0.0)
    A, B, C = _moments(profiles, lam, mu, 0.0, x, _mode_xstar(xs, x), cfg, nc=6)[3:]
    return AbcIntegrals(A, B, C)


def _partials(lam, mu, f2, g2, D, abc):
    A, B, C = abc.A, abc.B, abc.C
    sD = math.sqrt(D)
    return np.array([
        [sD, -lam * sD * A, -mu * sD * B],
        [lam * f2, (1.0 - lam * lam * f2) * A - mu * mu * C, -lam * mu * f2 * B + lam * mu * C],
        [mu * g2, -lam * mu * g2 * A + lam * mu * C, (1.0 - mu * mu * g2) * B - lam * lam * C],
    ])


def _local(params, profiles, x):
    f2 = float(profiles.f.value(abs(x))) ** 2
    g2 = float(profiles.g.value(abs(x))) ** 2
    D = 1.0 - params.lam ** 2 * f2 - params.mu ** 2 * g2
    return f2, g2, D


def jacobian_partials(params: GeodesicParams, profiles: ProfilePair, x: float,
                      cfg: QuadConfig = GEODESIC_CFG) -> JacobianMatrix:
    """All nine partials of (x, y, z) w.r.t. (r, lam, mu) at abscissa |x|."""
    abc = abc_integrals(params, profiles, x, cfg)
    f2, g2, D = _local(params, profiles, x)
    m = _partials(params.lam, params.mu, f2, g2, D, abc)
    m[0] *= params.sign_x
    return JacobianMatrix(m)


def jacobian_det(params: GeodesicParams, profiles: ProfilePair, x: float,
                 cfg: QuadConfig = GEODESIC_CFG) -> float:
    """sqrt(D) (AB - lam^2 AC - mu^2 BC), times sign_x."""
    abc = abc_integrals(params, profiles, x, cfg)
    _, _, D = _local(params, profiles, x)
    return params.sign_x * math.sqrt(D) * abc.bracket(params.lam, params.mu)


def x_of_r(params: GeodesicParams, profiles: ProfilePair, r: float,
           cfg: QuadConfig = GEODESIC_CFG, x_tol: float = 1e-12) -> float:
    """Abscissa |x| reached after arc length r (inverse of r(x)).

    Raises ``DomainError`` when r is negative, not below the arc length at
    the turning point, or not reached inside the profile domain.
    """
    if r < 0:
        raise DomainError(f"arc length must be nonnegative, got {r}")
    if r == 0:
        return 0.0
    lam, mu = params.lam_abs, params.mu_abs
    xs = _turning(profiles, lam, mu)
    fc, gc = profiles.codes
    x = kernels.x_of_r(fc, gc, lam, mu, r, xs if xs is not None else -1.0,
                       profiles.domain_max, cfg.abs_tol, cfg.rel_tol, cfg.max_depth, x_tol)
    if xs is not None and x > xs * (1.0 - 1e-12):
        raise DomainError(f"arc length {r} reaches the turning point x*={xs!r}")
    return x


def arc_length_at_turning(params: GeodesicParams, profiles: ProfilePair,
                          cfg: QuadConfig = GEODESIC_CFG) -> float:
    """r(x*), or +inf when D stays positive on the profile domain."""
    lam, mu = params.lam_abs, params.mu_abs
    xs = _turning(profiles, lam, mu)
    if xs is None:
        return math.inf
    return _moments(profiles, lam, mu, 0.0, xs, xs, cfg)[0]


def forward_map(profiles: ProfilePair, r: float, lam: float, mu: float,
                cfg: QuadConfig = GEODESIC_CFG, x_tol: float = 1e-14):
    """(x, y, z) after arc length r along the geodesic with momenta (lam, mu)."""
    params = GeodesicParams(lam, mu)
    x = x_of_r(params, profiles, r, cfg, x_tol)
    gp = geodesic_map(params, profiles, x, cfg)
    return np.array([gp.x, gp.y, gp.z])


def fd_jacobian(params: GeodesicParams, profiles: ProfilePair, x: float,
                h: float = FD_STEP, cfg: QuadConfig = GEODESIC_CFG) -> JacobianMatrix:
    """Central finite differences of ``forward_map`` at the point over |x|.

    Steps are h times max(|v|, s) with natural scales s = r, 1/f(x), 1/g(x)
    for r, lam, mu, so zero momenta still get a meaningful step.
    """
    x = abs(x)
    r = geodesic_map(params, profiles, x, cfg).r
    base = np.array([r, params.lam, params.mu])
    scales = np.array([r, 1.0 / float(profiles.f.value(x)), 1.0 / float(profiles.g.value(x))])
    steps = h * np.maximum(np.abs(base), scales)
    cols = []
    for k in range(3):
        plus, minus = base.copy(), base.copy()
        plus[k] += steps[k]
        minus[k] -= steps[k]
        cols.append((forward_map(profiles, *plus, cfg=cfg)
                     - forward_map(profiles, *minus, cfg=cfg)) / (2.0 * steps[k]))
    m = np.column_stack(cols)
    m[0] *= params.sign_x
    return JacobianMatrix(m)
