"""Geodesics, distances and ball volumes for dx^2 + dy^2/f(x)^2 + dz^2/g(x)^2."""
from ._core import BACKEND
from .errors import (CCBallError, ConvergenceError, DomainError, NoBracketError,
                     TurningPointError, UnreachableTargetError)
from .geodesics import (GEODESIC_CFG, GeodesicParams, GeodesicPoint, Point3, SampledCurve,
                        denominator, distance, distance_2d, distance_2d_xz, geodesic_curve,
                        geodesic_map, is_subunit, shoot, turning_point)
from .jacobian import (AbcIntegrals, JacobianMatrix, abc_integrals, fd_jacobian, forward_map,
                       jacobian_det, jacobian_partials, x_of_r)
from .measure import (BallReport, StaircaseParams, ball_volume, bound_ratio_scan,
                      chain_lower_bound, lower_bound, lower_bound_exact_integral,
                      staircase_curve, staircase_reach, upper_bound)
from .profiles import ExpInverse, PowerLaw, Profile, ProfilePair
from .quadrature import QuadConfig, QuadResult, find_root, integrate, integrate_singular_sqrt

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CCBallError",
    "ConvergenceError",
    "DomainError",
    "NoBracketError",
    "TurningPointError",
    "UnreachableTargetError",
    "GEODESIC_CFG",
    "GeodesicParams",
    "GeodesicPoint",
    "Point3",
    "SampledCurve",
    "denominator",
    "distance",
    "distance_2d",
    "distance_2d_xz",
    "geodesic_curve",
    "geodesic_map",
    "is_subunit",
    "shoot",
    "turning_point",
    "AbcIntegrals",
    "JacobianMatrix",
    "abc_integrals",
    "fd_jacobian",
    "forward_map",
    "jacobian_det",
    "jacobian_partials",
    "x_of_r",
    "BallReport",
    "StaircaseParams",
    "ball_volume",
    "bound_ratio_scan",
    "chain_lower_bound",
    "lower_bound",
    "lower_bound_exact_integral",
    "staircase_curve",
    "staircase_reach",
    "upper_bound",
    "ExpInverse",
    "PowerLaw",
    "Profile",
    "ProfilePair",
    "QuadConfig",
    "QuadResult",
    "find_root",
    "integrate",
    "integrate_singular_sqrt",
]
