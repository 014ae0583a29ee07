import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ccball import (DomainError, Point3, Profile, ProfilePair, StaircaseParams, ball_volume,
                    bound_ratio_scan, chain_lower_bound, distance, is_subunit,
                    lower_bound, lower_bound_exact_integral, staircase_curve,
                    staircase_reach, upper_bound)

E3 = math.exp(-3)


def test_upper_examples(ee, ff, lin):
    assert upper_bound(ee, 1.0) == pytest.approx(E3 / 32, rel=1e-14)
    assert upper_bound(lin, 1.0) == pytest.approx(1.0)
    f = ff.f
    assert upper_bound(ff, 0.7) == pytest.approx(f.value(0.7) ** 2 / f.log_deriv_mag(0.7) ** 3)


def test_lower_examples(ee, ff, lin):
    assert lower_bound(ee, 1.0) == pytest.approx(E3 / 64, rel=1e-14)
    assert lower_bound(lin, 1.0) == pytest.approx(1.0)
    for R in (0.3, 0.6, 1.0):
        assert lower_bound(ff, R) == pytest.approx(upper_bound(ff, R), rel=1e-15)


def test_bounds_reject_bad_radius(ee):
    for R in (0.0, -1.0, 11.0):
        with pytest.raises(DomainError):
            upper_bound(ee, R)


@pytest.mark.parametrize("R", [0.2, 0.5, 1.0, 2.0])
def test_exact_integral_polynomial(lin, R):
    assert lower_bound_exact_integral(lin, R) == pytest.approx(R ** 5 / 60, rel=1e-12)


def test_exact_integral_zero_radius(ee):
    assert lower_bound_exact_integral(ee, 0.0) == 0.0


def test_exact_integral_matches_midpoint_oracle(ee):
    n = 10 ** 6
    x = (np.arange(n) + 0.5) / n
    oracle = math.fsum(0.5 * (1 - x) ** 2 * np.exp(-3.0 / x ** 2)) / n
    assert abs(lower_bound_exact_integral(ee, 1.0) - oracle) <= 1e-8


@pytest.mark.parametrize("pair", ["ee", "ff", "lin", "pw12"])
def test_chain_below_exact_integral(pair, request):
    profiles = request.getfixturevalue(pair)
    for R in np.linspace(0.3, 2.0, 8):
        assert lower_bound_exact_integral(profiles, R) >= chain_lower_bound(profiles, R)


# -- staircases -----------------------------------------------------------------

def test_staircase_endpoints(ee):
    assert staircase_curve(StaircaseParams(0.8, 0.8, 0.8), ee, 10).end == Point3(0.8, 0, 0)
    assert staircase_curve(StaircaseParams(0.0, 0.3, 0.8), ee, 10).end == Point3(0, 0, 0)
    c = staircase_curve(StaircaseParams(0.5, 0.7, 1.0), ee, 7)
    fa, ga = ee.f.value(0.5), ee.g.value(0.5)
    np.testing.assert_allclose(c.end.as_array(), [0.5, 0.2 * fa, 0.3 * ga], rtol=1e-14)
    assert {0.5, 0.7} <= set(c.t)


def test_staircase_params_validated():
    with pytest.raises(DomainError):
        StaircaseParams(0.6, 0.5, 1.0)
    with pytest.raises(DomainError):
        StaircaseParams(0.0, 0.0, 0.0)


@given(st.floats(0.05, 2.0), st.floats(0, 1), st.floats(0, 1))
def test_staircase_subunit(R, u, v):
    ee = ProfilePair(Profile.exp_inverse(1, 2), Profile.exp_inverse(2, 2))
    a, b = sorted((u * R, v * R))
    assert is_subunit(staircase_curve(StaircaseParams(a, b, R), ee, 40), ee)


def test_staircase_reach_examples(lin, ee):
    assert staircase_reach(lin, 0.5, 0.25, 1.0) == 0.0
    assert staircase_reach(ee, 1.0, 0.0, 1.0) == 0.0
    f = ee.f.value(0.4)
    assert staircase_reach(ee, 0.4, 0.6 * f, 1.0) == pytest.approx(0.0, abs=1e-17)
    with pytest.raises(DomainError):
        staircase_reach(lin, 0.5, 0.3, 1.0)


@pytest.mark.parametrize("a, b", [(0.8, 0.85), (0.85, 0.88), (0.88, 0.89)])
def test_staircase_endpoint_within_ball(ee, a, b):
    sp = StaircaseParams(a, b, 0.9)
    assert distance(staircase_curve(sp, ee, 20).end, ee) <= sp.R + 1e-6


# -- volume ---------------------------------------------------------------------

def test_volume_vanishes_with_radius(lin):
    assert ball_volume(lin, 0.0) == (0.0, 0.0)
    v1, _ = ball_volume(lin, 1e-2, n=12)
    v2, _ = ball_volume(lin, 2e-2, n=12)
    assert 0 < v1 < 1e-8
    # f = g = x: the ball scales as R^5
    assert v2 / v1 == pytest.approx(32.0, rel=1e-6)
    assert ball_volume(lin, 0.0, "grid") == (0.0, 0.0)


def test_volume_rejects(ee):
    with pytest.raises(DomainError):
        ball_volume(ee, 0.8, method="monte-carlo")
    with pytest.raises(DomainError):
        ball_volume(ee, 0.05)


def test_coarse_grid_brackets_pushforward(ff):
    v, err = ball_volume(ff, 0.8, "grid", cells=10)
    vp, _ = ball_volume(ff, 0.8)
    assert abs(v - vp) <= err
    assert ball_volume(ff, 0.8, "grid", cells=6, n_jobs=2) == ball_volume(ff, 0.8, "grid", cells=6)


def test_volume_between_bounds(ee):
    v, err = ball_volume(ee, 0.8)
    assert err < 1e-2 * v
    assert lower_bound_exact_integral(ee, 0.8) <= v
    # recorded sandwich constants at R = 0.8
    assert 0.1 < lower_bound(ee, 0.8) / v < 1
    assert 0.1 < v / upper_bound(ee, 0.8) < 1


# -- scans ----------------------------------------------------------------------

def test_scan_ratios(ee, ff, pw12):
    Rs = [0.4, 0.7, 1.0]
    assert [r.bound_ratio for r in bound_ratio_scan(ff, Rs, n=8)] == pytest.approx([1, 1, 1])
    assert [r.bound_ratio for r in bound_ratio_scan(ee, Rs, n=8)] == pytest.approx([2, 2, 2], rel=1e-12)
    pw = [r.bound_ratio for r in bound_ratio_scan(pw12, Rs, n=8)]
    assert pw == pytest.approx([pw[0]] * 3, rel=1e-12)


def test_scan_records_failures_and_keeps_order(ee):
    reps = bound_ratio_scan(ee, [0.6, 0.05, 0.3], n=8)
    assert [r.R for r in reps] == [0.6, 0.05, 0.3]
    assert reps[1].volume is None and "double-precision" in reps[1].error
    assert reps[1].ratio_lv is None and reps[1].bound_ratio is None
    assert reps[0].volume > 0 and reps[2].volume > 0


def test_scan_parallel_matches_serial(ee):
    Rs = [0.4, 0.6, 0.8]
    serial = bound_ratio_scan(ee, Rs, n=8)
    parallel = bound_ratio_scan(ee, Rs, n=8, n_jobs=2)
    assert [r.row() for r in serial] == [r.row() for r in parallel]
