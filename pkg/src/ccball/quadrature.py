"""One-dimensional quadrature and bracketed root finding.

``integrate`` is a globally adaptive 7/15-point Gauss-Kronrod rule with
QUADPACK-style error estimates.  ``integrate_singular_sqrt`` removes an
inverse-square-root endpoint singularity by the substitution t = b - u**2
before integrating.  ``find_root`` is Brent's method.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DomainError, NoBracketError

# Kronrod abscissae on [0, 1]; even indices 1, 3, 5, 7 are the Gauss nodes
XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full 15-point node set on [-1, 1] and matching weights
NODES15 = np.concatenate([-XGK[:-1], XGK[::-1]])
WEIGHTS_K15 = np.concatenate([WGK[:-1], WGK[::-1]])
_wg_full = np.zeros(15)
_wg_full[[1, 3, 5]] = WG[:3]
_wg_full[[13, 11, 9]] = WG[:3]
_wg_full[7] = WG[3]
WEIGHTS_G7 = _wg_full

EPS = np.finfo(float).eps
MAX_EVALS = 15 * 40000


@dataclass(frozen=True)
class QuadConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_depth: int = 40

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise DomainError("max_depth must be at least 1")

    def target(self, value):
        return max(self.abs_tol, self.rel_tol * abs(value))


@dataclass(frozen=True)
class QuadResult:
    value: float
    err_estimate: float
    n_evals: int
    converged: bool = True


def gk15_error(fk, resk, resg, half):
    """QUADPACK error heuristic for one panel.

    ``fk`` holds integrand values at the 15 Kronrod nodes (last axis),
    ``resk``/``resg`` the Kronrod and Gauss panel sums, ``half`` the half
    width.  Works elementwise on stacked panels.
    """
    reskh = resk / (2.0 * half)
    resasc = np.sum(WEIGHTS_K15 * np.abs(fk - reskh[..., None]), axis=-1) * half
    resabs = np.sum(WEIGHTS_K15 * np.abs(fk), axis=-1) * half
    err = np.abs(resk - resg)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    return np.maximum(err, 50.0 * EPS * resabs)


def _panel(fn, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fk = np.array([fn(mid + half * t) for t in NODES15], dtype=float)
    resk = float(np.dot(WEIGHTS_K15, fk)) * half
    resg = float(np.dot(WEIGHTS_G7, fk)) * half
    err = float(gk15_error(fk, np.float64(resk), np.float64(resg), half))
    return resk, err


def integrate(fn: Callable[[float], float], a: float, b: float,
              cfg: QuadConfig = QuadConfig()) -> QuadResult:
    """Adaptive estimate of the integral of ``fn`` over [a, b].

    Panels are bisected largest-error first until the summed error estimate
    meets ``cfg``.  A panel already bisected ``cfg.max_depth`` times is not
    split again; if the tolerance cannot be met the best estimate is
    returned with ``converged=False``.
    """
    if b < a:
        raise DomainError(f"integrate requires a <= b, got [{a}, {b}]")
    if 0.5 * (b - a) == 0.0:
        # empty, or so narrow that the half width underflows
        return QuadResult(0.0, 0.0, 0, True)

    val, err = _panel(fn, a, b)
    n_evals = 15
    # splittable panels keyed by -err; panels at max_depth are frozen
    heap = [(-err, a, b, val, err, 0)]
    frozen = []
    total, total_err = val, err
    while heap and total_err > cfg.target(total) and n_evals < MAX_EVALS:
        _, lo, hi, v, e, depth = heapq.heappop(heap)
        if depth >= cfg.max_depth:
            frozen.append((v, e))
            continue
        mid = 0.5 * (lo + hi)
        v1, e1 = _panel(fn, lo, mid)
        v2, e2 = _panel(fn, mid, hi)
        n_evals += 30
        total += v1 + v2 - v
        total_err += e1 + e2 - e
        heapq.heappush(heap, (-e1, lo, mid, v1, e1, depth + 1))
        heapq.heappush(heap, (-e2, mid, hi, v2, e2, depth + 1))
    values = [item[3] for item in heap] + [v for v, _ in frozen]
    errors = [item[4] for item in heap] + [e for _, e in frozen]
    total = math.fsum(values)
    total_err = math.fsum(errors)
    return QuadResult(total, total_err, n_evals, total_err <= cfg.target(total))


def integrate_singular_sqrt(fn_regular: Callable[[float], float], a: float, b: float,
                            cfg: QuadConfig = QuadConfig(), upper: float | None = None
                            ) -> QuadResult:
    """Integral of fn_regular(t) / sqrt(b - t) over [a, upper].

    ``upper`` defaults to ``b``, the singular endpoint.  With t = b - u**2
    the integrand becomes the bounded 2 * fn_regular(b - u**2) on
    u in [sqrt(b - upper), sqrt(b - a)].
    """
    if upper is None:
        upper = b
    if not a <= upper <= b:
        raise DomainError(f"need a <= upper <= b, got a={a}, upper={upper}, b={b}")
    u_lo = math.sqrt(b - upper)
    u_hi = math.sqrt(b - a)
    return integrate(lambda u: 2.0 * fn_regular(b - u * u), u_lo, u_hi, cfg)


def find_root(fn: Callable[[float], float], lo: float, hi: float,
              x_tol: float = 1e-12, max_iter: int = 200) -> float:
    """Brent's method on a bracket [lo, hi] with fn(lo) * fn(hi) <= 0.

    Returns the endpoint of the final bracket with the smaller |fn|; the
    bracket width is at most ``x_tol`` (or a few ulps when ``x_tol`` is
    below machine resolution).
    """
    a, b = float(lo), float(hi)
    fa, fb = fn(a), fn(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        raise NoBracketError(f"fn has the same sign at {lo} ({fa}) and {hi} ({fb})")
    c, fc = a, fa
    d = e = b - a
    for _ in range(max_iter):
        if (fb > 0) == (fc > 0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = max(0.5 * x_tol, 2.0 * EPS * abs(b))
        xm = 0.5 * (c - b)
        if abs(xm) <= tol1 or fb == 0.0:
            return b
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = xm
        else:
            d = e = xm
        a, fa = b, fb
        if abs(d) > tol1:
            b += d
        else:
            b += math.copysign(tol1, xm)
        fb = fn(b)
    raise ConvergenceError(f"find_root did not converge in {max_iter} iterations")
