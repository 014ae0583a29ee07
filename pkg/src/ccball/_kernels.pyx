# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled geodesic kernels.

Same functions and semantics as ``_kernels_py``: vector adaptive
Gauss-Kronrod integration of the geodesic integrands, the turning point,
the inverse arc-length map and the per-momentum volume column.
"""
from libc.math cimport sqrt, exp, expm1, log1p, pow, fabs, copysign, isnan, NAN
from libc.stdlib cimport malloc, free

from .errors import DomainError, NoBracketError

NAME = "cython"

cdef enum:
    NC_MAX = 6
    MAX_PANELS = 4000
    MAX_EVALS = 600000

cdef double EPS = 2.220446049250313e-16

cdef double XGK[8]
cdef double WGK[8]
cdef double WG[4]
XGK[:] = [0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
          0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
          0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
          0.207784955007898467600689403773245, 0.0]
WGK[:] = [0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
          0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
          0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
          0.204432940075298892414161999234649, 0.209482141084727828012999174891714]
WG[:] = [0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
         0.381830050505118944950369775488975, 0.417959183673469387755102040816327]


cdef struct Prof:
    int kind
    double a
    double b


cdef struct Geo:
    Prof f
    Prof g
    double lam
    double mu
    double lam2
    double mu2
    double xs
    double fs2
    double gs2
    double lfs2
    double mgs2
    int nc


cdef inline double pval(const Prof* p, double t) noexcept nogil:
    if t <= 0.0:
        return 0.0
    if p.kind == 0:
        return pow(t, p.a)
    return exp(-p.a / pow(t, p.b))


cdef inline double log_ratio(const Prof* p, double xs, double delta) noexcept nogil:
    # ln(f(xs - delta*xs) / f(xs))
    if p.kind == 0:
        return p.a * log1p(-delta)
    return -p.a * pow(xs, -p.b) * expm1(-p.b * log1p(-delta))


cdef void integrand(const Geo* G, double v, double* out) noexcept nogil:
    cdef double f, g, f2, g2, D, s, s3, jac, lrf, lrg, delta
    cdef int i
    if G.xs > 0.0:
        delta = v * v / G.xs
        if delta > 1.0:
            delta = 1.0
        lrf = log_ratio(&G.f, G.xs, delta)
        lrg = log_ratio(&G.g, G.xs, delta)
        f2 = G.fs2 * exp(2.0 * lrf)
        g2 = G.gs2 * exp(2.0 * lrg)
        D = -(G.lfs2 * expm1(2.0 * lrf) + G.mgs2 * expm1(2.0 * lrg))
        jac = 2.0 * v
    else:
        f = pval(&G.f, v)
        g = pval(&G.g, v)
        f2 = f * f
        g2 = g * g
        # (lam f)^2 rather than lam^2 f^2: huge momenta meet tiny profiles
        D = 1.0 - (G.lam * f) * (G.lam * f) - (G.mu * g) * (G.mu * g)
        jac = 1.0
    if not D > 0.0:
        for i in range(G.nc):
            out[i] = NAN
        return
    s = jac / sqrt(D)
    out[0] = s
    out[1] = G.lam * f2 * s
    out[2] = G.mu * g2 * s
    if G.nc > 3:
        s3 = s / D
        out[3] = f2 * s3
        out[4] = g2 * s3
        out[5] = f2 * g2 * s3


cdef void gk15(const Geo* G, double a, double b, double* res, double* err) noexcept nogil:
    cdef double half = 0.5 * (b - a)
    cdef double mid = 0.5 * (a + b)
    cdef double fv[15][NC_MAX]
    cdef double resk, resg, reskh, resasc, resabs, e
    cdef int j, c, nc = G.nc
    for j in range(7):
        integrand(G, mid - half * XGK[j], fv[j])
        integrand(G, mid + half * XGK[j], fv[14 - j])
    integrand(G, mid, fv[7])
    for c in range(nc):
        resk = WGK[7] * fv[7][c]
        resg = WG[3] * fv[7][c]
        for j in range(7):
            resk += WGK[j] * (fv[j][c] + fv[14 - j][c])
        for j in range(3):
            resg += WG[j] * (fv[2 * j + 1][c] + fv[13 - 2 * j][c])
        reskh = 0.5 * resk
        resasc = WGK[7] * fabs(fv[7][c] - reskh)
        resabs = WGK[7] * fabs(fv[7][c])
        for j in range(7):
            resasc += WGK[j] * (fabs(fv[j][c] - reskh) + fabs(fv[14 - j][c] - reskh))
            resabs += WGK[j] * (fabs(fv[j][c]) + fabs(fv[14 - j][c]))
        resk *= half
        resg *= half
        resasc *= fabs(half)
        resabs *= fabs(half)
        e = fabs(resk - resg)
        if resasc != 0.0 and e != 0.0:
            e = resasc * min(1.0, pow(200.0 * e / resasc, 1.5))
        if e < 50.0 * EPS * resabs:
            e = 50.0 * EPS * resabs
        res[c] = resk
        err[c] = e


cdef int adaptive(const Geo* G, double a, double b, double abs_tol, double rel_tol,
                  int max_depth, double* total, double* total_err, long* n_evals) noexcept nogil:
    """Global adaptive integration; returns 1 on convergence, 0 otherwise."""
    cdef int nc = G.nc
    cdef int n, i, c, worst_i, status
    cdef double tau[NC_MAX]
    cdef double scaled, worst, mid
    cdef double* lo
    cdef double* hi
    cdef int* depth
    cdef double* vals
    cdef double* errs
    for c in range(nc):
        total[c] = 0.0
        total_err[c] = 0.0
    if not b > a:
        return 1
    lo = <double*> malloc(MAX_PANELS * sizeof(double))
    hi = <double*> malloc(MAX_PANELS * sizeof(double))
    depth = <int*> malloc(MAX_PANELS * sizeof(int))
    vals = <double*> malloc(MAX_PANELS * NC_MAX * sizeof(double))
    errs = <double*> malloc(MAX_PANELS * NC_MAX * sizeof(double))
    lo[0] = a
    hi[0] = b
    depth[0] = 0
    gk15(G, a, b, vals, errs)
    n = 1
    n_evals[0] += 15
    status = 0
    while True:
        for c in range(nc):
            total[c] = 0.0
            total_err[c] = 0.0
        for i in range(n):
            for c in range(nc):
                total[c] += vals[i * NC_MAX + c]
                total_err[c] += errs[i * NC_MAX + c]
        if isnan(total[0]):
            status = 0
            break
        status = 1
        for c in range(nc):
            tau[c] = max(abs_tol, rel_tol * fabs(total[c]))
            if total_err[c] > tau[c]:
                status = 0
        if status:
            break
        worst = 0.0
        worst_i = -1
        for i in range(n):
            if depth[i] >= max_depth:
                continue
            for c in range(nc):
                scaled = errs[i * NC_MAX + c] / tau[c]
                if scaled > worst:
                    worst = scaled
                    worst_i = i
        if worst_i < 0 or n >= MAX_PANELS or n_evals[0] > MAX_EVALS:
            break
        i = worst_i
        mid = 0.5 * (lo[i] + hi[i])
        lo[n] = mid
        hi[n] = hi[i]
        hi[i] = mid
        depth[i] += 1
        depth[n] = depth[i]
        gk15(G, lo[i], hi[i], &vals[i * NC_MAX], &errs[i * NC_MAX])
        gk15(G, lo[n], hi[n], &vals[n * NC_MAX], &errs[n * NC_MAX])
        n += 1
        n_evals[0] += 30
    free(lo)
    free(hi)
    free(depth)
    free(vals)
    free(errs)
    return status


cdef void setup(Geo* G, fcode, gcode, double lam, double mu, double xstar, int nc):
    G.f.kind = fcode[0]
    G.f.a = fcode[1]
    G.f.b = fcode[2]
    G.g.kind = gcode[0]
    G.g.a = gcode[1]
    G.g.b = gcode[2]
    G.lam = lam
    G.mu = mu
    G.lam2 = lam * lam
    G.mu2 = mu * mu
    G.nc = nc
    G.xs = xstar if xstar > 0.0 else 0.0
    if G.xs > 0.0:
        G.fs2 = pval(&G.f, xstar) ** 2
        G.gs2 = pval(&G.g, xstar) ** 2
        G.lfs2 = (lam * pval(&G.f, xstar)) ** 2
        G.mgs2 = (mu * pval(&G.g, xstar)) ** 2
    else:
        G.fs2 = 0.0
        G.gs2 = 0.0
        G.lfs2 = 0.0
        G.mgs2 = 0.0


def profile_value(code, double t):
    cdef Prof p
    p.kind = code[0]
    p.a = code[1]
    p.b = code[2]
    return pval(&p, t)


cdef inline double denom(const Geo* G, double x) noexcept nogil:
    cdef double f = pval(&G.f, x)
    cdef double g = pval(&G.g, x)
    return 1.0 - (G.lam * f) * (G.lam * f) - (G.mu * g) * (G.mu * g)


def denominator(fcode, gcode, double lam, double mu, double x):
    cdef Geo G
    setup(&G, fcode, gcode, lam, mu, -1.0, 3)
    return denom(&G, x)


def moments(fcode, gcode, double lam, double mu, double a, double b, double xstar,
            double abs_tol, double rel_tol, int max_depth, int nc=6):
    """Integrals of the geodesic integrand vector over x in [a, b].

    Returns ``(values, errors, n_evals, converged)`` with six-tuples of
    values (r, y, z, A, B, C); entries past ``nc`` are zero.
    """
    cdef Geo G
    cdef double tot[NC_MAX]
    cdef double err[NC_MAX]
    cdef long nev = 0
    cdef double lo_v, hi_v
    cdef int ok, c
    setup(&G, fcode, gcode, lam, mu, xstar, nc)
    if G.xs > 0.0:
        if b > xstar:
            raise DomainError(f"upper limit {b} beyond turning point {xstar}")
        lo_v = sqrt(max(xstar - b, 0.0))
        hi_v = sqrt(max(xstar - a, 0.0))
    else:
        lo_v = a
        hi_v = b
    with nogil:
        ok = adaptive(&G, lo_v, hi_v, abs_tol, rel_tol, max_depth, tot, err, &nev)
    for c in range(nc, NC_MAX):
        tot[c] = 0.0
        err[c] = 0.0
    return ((tot[0], tot[1], tot[2], tot[3], tot[4], tot[5]),
            (err[0], err[1], err[2], err[3], err[4], err[5]), nev, bool(ok))


# -- Brent ------------------------------------------------------------------

ctypedef double (*scalar_fn)(double, void*) noexcept nogil


cdef double brent(scalar_fn fn, void* ctx, double a, double b, double x_tol,
                  int* status) noexcept nogil:
    """Brent's method; status 0 ok, 1 no bracket, 2 no convergence."""
    cdef double fa = fn(a, ctx)
    cdef double fb = fn(b, ctx)
    cdef double c, fc, d, e, tol1, xm, s, p, q, r
    cdef int it
    status[0] = 0
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0.0) == (fb > 0.0):
        status[0] = 1
        return NAN
    c = a
    fc = fa
    d = b - a
    e = d
    for it in range(200):
        if (fb > 0.0) == (fc > 0.0):
            c = a
            fc = fa
            d = b - a
            e = d
        if fabs(fc) < fabs(fb):
            a = b
            b = c
            c = a
            fa = fb
            fb = fc
            fc = fa
        tol1 = max(0.5 * x_tol, 2.0 * EPS * fabs(b))
        xm = 0.5 * (c - b)
        if fabs(xm) <= tol1 or fb == 0.0:
            return b
        if fabs(e) >= tol1 and fabs(fa) > fabs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            p = fabs(p)
            if 2.0 * p < min(3.0 * xm * q - fabs(tol1 * q), fabs(e * q)):
                e = d
                d = p / q
            else:
                d = xm
                e = d
        else:
            d = xm
            e = d
        a = b
        fa = fb
        if fabs(d) > tol1:
            b += d
        else:
            b += copysign(tol1, xm)
        fb = fn(b, ctx)
    status[0] = 2
    return b


cdef double denom_cb(double x, void* ctx) noexcept nogil:
    return denom(<Geo*> ctx, x)


def turning_point(fcode, gcode, double lam, double mu, double x_max):
    """Smallest x in (0, x_max] with D(x) = 0, or -1.0 when D > 0 throughout."""
    cdef Geo G
    cdef int status
    cdef double x, d_hi
    if lam == 0.0 and mu == 0.0:
        return -1.0
    setup(&G, fcode, gcode, lam, mu, -1.0, 3)
    d_hi = denom(&G, x_max)
    if d_hi > 0.0:
        return -1.0
    if d_hi == 0.0:
        return x_max
    with nogil:
        x = brent(denom_cb, &G, 0.0, x_max, 0.0, &status)
    if status != 0:
        raise NoBracketError("turning point not bracketed")
    return x


cdef struct ArcCtx:
    Geo* G
    double target
    double top
    double abs_tol
    double rel_tol
    int max_depth
    int failed


cdef double arc_u_cb(double u, void* ctx) noexcept nogil:
    cdef ArcCtx* C = <ArcCtx*> ctx
    cdef double tot[NC_MAX]
    cdef double err[NC_MAX]
    cdef long nev = 0
    if not adaptive(C.G, u, C.top, C.abs_tol, C.rel_tol, C.max_depth, tot, err, &nev):
        C.failed = 1
    return tot[0] - C.target


cdef double arc_x_cb(double x, void* ctx) noexcept nogil:
    cdef ArcCtx* C = <ArcCtx*> ctx
    cdef double tot[NC_MAX]
    cdef double err[NC_MAX]
    cdef long nev = 0
    if not adaptive(C.G, 0.0, x, C.abs_tol, C.rel_tol, C.max_depth, tot, err, &nev):
        C.failed = 1
    return tot[0] - C.target


def x_of_r(fcode, gcode, double lam, double mu, double r, double xstar, double x_hi,
           double abs_tol, double rel_tol, int max_depth, double x_tol):
    """Invert r(x) = integral of D^(-1/2) from 0 to x.

    With ``xstar`` > 0 the search runs over u in [0, sqrt(xstar)] where
    x = xstar - u^2; otherwise over x in [0, x_hi].
    """
    cdef Geo G
    cdef ArcCtx C
    cdef int status
    cdef double u, x
    if r <= 0.0:
        return 0.0
    setup(&G, fcode, gcode, lam, mu, xstar, 3)
    C.G = &G
    C.target = r
    C.abs_tol = abs_tol
    C.rel_tol = rel_tol
    C.max_depth = max_depth
    C.failed = 0
    if G.xs > 0.0:
        C.top = sqrt(xstar)
        with nogil:
            u = brent(arc_u_cb, &C, 0.0, C.top, x_tol / (2.0 * C.top), &status)
        if status == 1:
            raise DomainError(f"arc length {r} not below the turning-point arc length")
        return xstar - u * u
    with nogil:
        x = brent(arc_x_cb, &C, 0.0, x_hi, x_tol, &status)
    if status == 1:
        raise DomainError(f"arc length {r} not reached for x <= {x_hi}")
    return x


def volume_column(fcode, gcode, double lam, double mu, double x_max, double xstar,
                  double[::1] nodes, double[::1] weights,
                  double abs_tol, double rel_tol, int max_depth):
    """Integral over x in [0, x_max] of |AB - lam^2 AC - mu^2 BC|.

    Outer Gauss-Legendre ``nodes``/``weights`` on [-1, 1] (ascending);
    A, B, C accumulated between consecutive nodes.
    """
    cdef Geo G
    cdef double tot[NC_MAX]
    cdef double err[NC_MAX]
    cdef long nev = 0
    cdef int n = nodes.shape[0]
    cdef int k, idx
    cdef double v_lo, v_hi, half, mid, v, prev, A = 0.0, B = 0.0, C = 0.0
    cdef double bracket, total = 0.0
    cdef bint umode
    setup(&G, fcode, gcode, lam, mu, xstar, 6)
    umode = G.xs > 0.0
    if umode:
        v_lo = sqrt(max(xstar - x_max, 0.0))
        v_hi = sqrt(xstar)
        prev = v_hi
    else:
        v_lo = 0.0
        v_hi = x_max
        prev = 0.0
    half = 0.5 * (v_hi - v_lo)
    mid = 0.5 * (v_hi + v_lo)
    with nogil:
        for k in range(n):
            # ascending x: descending u in u-mode
            idx = n - 1 - k if umode else k
            v = mid + half * nodes[idx]
            if umode:
                adaptive(&G, v, prev, abs_tol, rel_tol, max_depth, tot, err, &nev)
            else:
                adaptive(&G, prev, v, abs_tol, rel_tol, max_depth, tot, err, &nev)
            A += tot[3]
            B += tot[4]
            C += tot[5]
            bracket = A * B - G.lam2 * A * C - G.mu2 * B * C
            total += weights[idx] * fabs(bracket) * (2.0 * v if umode else 1.0)
            prev = v
    return total * half
