import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ccball import (DomainError, GeodesicParams, Profile, ProfilePair, abc_integrals,
                    fd_jacobian, forward_map, geodesic_map, jacobian_det, jacobian_partials,
                    x_of_r)
from ccball.jacobian import arc_length_at_turning

EPS = np.finfo(float).eps


def test_abc_zero_momentum(lin):
    abc = abc_integrals(GeodesicParams(0, 0), lin, 1.0)
    assert (abc.A, abc.B, abc.C) == pytest.approx((1 / 3, 1 / 3, 1 / 5), rel=1e-13)
    assert abc_integrals(GeodesicParams(2, 1), lin, 0.0) == abc_integrals(GeodesicParams(0, 0), lin, 0.0)
    assert abc_integrals(GeodesicParams(2, 1), lin, 0.0).A == 0.0


def test_abc_matches_graded_oracle(ee):
    # midpoint sums in x on a mesh uniform in w = 1/x, fine where f g vanish
    lam, mu, x_end = 0.5, 0.5, 0.8
    n = 10 ** 6
    w = np.linspace(1.0 / x_end, 40.0, n + 1)
    wm = 0.5 * (w[:-1] + w[1:])
    xm = 1.0 / wm
    dx = np.abs(np.diff(1.0 / w))
    f2 = np.exp(-2.0 / xm ** 2)
    g2 = np.exp(-4.0 / xm ** 2)
    D = 1.0 - lam ** 2 * f2 - mu ** 2 * g2
    oracle = [math.fsum(v * dx) for v in (f2 * D ** -1.5, g2 * D ** -1.5, f2 * g2 * D ** -1.5)]
    abc = abc_integrals(GeodesicParams(lam, mu), ee, x_end)
    assert (abc.A, abc.B, abc.C) == pytest.approx(oracle, abs=1e-7)


def test_det_examples(lin):
    assert jacobian_det(GeodesicParams(0, 0), lin, 1.0) == pytest.approx(1 / 9, rel=1e-13)
    assert jacobian_det(GeodesicParams(1, 1), lin, 0.0) == 0.0


def test_x_of_r_examples(lin, ee):
    assert x_of_r(GeodesicParams(0, 0), ee, 0.3) == pytest.approx(0.3, abs=1e-12)
    assert x_of_r(GeodesicParams(1, 0), lin, math.pi / 6) == pytest.approx(0.5, abs=1e-12)
    assert x_of_r(GeodesicParams(1, 1), ee, 0.0) == 0.0
    with pytest.raises(DomainError):
        x_of_r(GeodesicParams(0, 0), ee, -0.1)
    # f = x, lam = 2: r(x*) = pi / 4
    assert arc_length_at_turning(GeodesicParams(2, 0), lin) == pytest.approx(math.pi / 4, rel=1e-10)
    with pytest.raises(DomainError):
        x_of_r(GeodesicParams(2, 0), lin, 0.8)
    assert arc_length_at_turning(GeodesicParams(0, 0), lin) == math.inf


def test_forward_map_inverts_x_of_r(ee):
    gp = geodesic_map(GeodesicParams(1.0, 2.0), ee, 0.9)
    np.testing.assert_allclose(forward_map(ee, gp.r, 1.0, 2.0), [gp.x, gp.y, gp.z],
                               rtol=1e-11)


def _resolution(ee, params, x):
    """Per-entry floor set by double-precision resolution of the FD outputs."""
    gp = geodesic_map(params, ee, x)
    f, g = ee.f.value(x), ee.g.value(x)
    D = 1 - (params.lam * f) ** 2 - (params.mu * g) ** 2
    r = gp.r
    steps = 1e-5 * np.maximum(np.abs([r, params.lam, params.mu]), [r, 1 / f, 1 / g])
    # noise in x of size eps x also moves y, z through dy/dx and dz/dx
    noise = 32 * EPS * np.array([x, abs(gp.y) + params.lam * f * f * x / math.sqrt(D),
                                 abs(gp.z) + params.mu * g * g * x / math.sqrt(D)])
    return noise[:, None] / (2 * steps[None, :])


@pytest.mark.parametrize("lam, mu, x", [(0.0, 0.0, 0.8), (1.0, 0.0, 1.0), (0.5, 3.0, 0.7),
                                        (2.0, 4.0, 1.0), (1.2, 1.5, 0.6)])
def test_partials_match_finite_differences(ee, lam, mu, x):
    params = GeodesicParams(lam, mu)
    m = jacobian_partials(params, ee, x).values
    fd = fd_jacobian(params, ee, x).values
    floor = _resolution(ee, params, x)
    assert np.all(np.abs(m - fd) <= 1e-4 * np.abs(m) + floor)
    assert fd_jacobian(params, ee, x).det() == pytest.approx(np.linalg.det(m), rel=1e-4)


def test_matrix_det_matches_closed_form(ee):
    params = GeodesicParams(1.5, 4.0)
    assert jacobian_partials(params, ee, 1.0).det() == pytest.approx(
        jacobian_det(params, ee, 1.0), rel=1e-10)


def test_negative_branch_flips_det(ee):
    up = jacobian_det(GeodesicParams(1.0, 2.0), ee, 0.9)
    assert jacobian_det(GeodesicParams(1.0, 2.0, sign_x=-1), ee, -0.9) == pytest.approx(-up)


admissible = st.tuples(st.floats(0.2, 1.6), st.floats(0.0, 0.97), st.floats(0.0, math.pi / 2))


@given(admissible)
def test_cauchy_schwarz_and_positive_bracket(args):
    x, rho, theta = args
    ee = ProfilePair(Profile.exp_inverse(1, 2), Profile.exp_inverse(2, 2))
    lam = rho * math.cos(theta) / ee.f.value(x)
    mu = rho * math.sin(theta) / ee.g.value(x)
    abc = abc_integrals(GeodesicParams(lam, mu), ee, x)
    assert abc.C ** 2 <= abc.A * abc.B * (1 + 1e-12)
    assert abc.bracket(lam, mu) > 0
    assert jacobian_det(GeodesicParams(lam, mu), ee, x) > 0
