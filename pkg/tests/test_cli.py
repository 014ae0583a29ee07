import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ccball import Profile, ProfilePair, SampledCurve, is_subunit
from ccball.cli import main

EE = ProfilePair(Profile.exp_inverse(1, 2), Profile.exp_inverse(2, 2))


def run(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out.read_text() if out.exists() else None


def rows(text):
    return list(csv.DictReader(text.splitlines()))


def test_geodesic_straight(tmp_path):
    code, text = run(tmp_path, "geodesic", "--x-end", "1", "--n", "2")
    assert code == 0
    assert text == "t,x,y,z\n0,0,0,0\n1,1,0,0\n"


def test_geodesic_figure_curve_round_trip(tmp_path):
    code, text = run(tmp_path, "geodesic", "--lambda", "1", "--mu", "0.5", "--r-end", "1",
                     "--n", "200")
    assert code == 0
    data = np.array([[float(r[c]) for c in "txyz"] for r in rows(text)])
    assert np.all(np.diff(data[:, 1:], axis=0) >= 0)
    assert data[-1, 0] == pytest.approx(1.0, abs=1e-12)
    assert is_subunit(SampledCurve(data[:, 0], data[:, 1:]), EE)


def test_geodesic_marker_row(tmp_path):
    code, text = run(tmp_path, "geodesic", "--lambda", "1", "--mu", "0.5", "--r-end", "1.3",
                     "--n", "50")
    assert code == 0
    t = [float(r["t"]) for r in rows(text)]
    assert min(abs(v - 1.0) for v in t) <= 1e-13
    assert len(t) == 51


def test_geodesic_turning_point_reported(tmp_path, capsys):
    code, _ = run(tmp_path, "geodesic", "--f", "power:k=1", "--g", "power:k=1",
                  "--lambda", "2", "--x-end", "0.6")
    assert code == 2
    assert "x*=0.5" in capsys.readouterr().err


def test_geodesic_needs_one_endpoint(tmp_path):
    assert run(tmp_path, "geodesic", "--lambda", "1")[0] == 2


def test_sphere_schema_and_zero_radius(tmp_path):
    code, text = run(tmp_path, "sphere", "--R", "0", "--n-lambda", "3", "--n-mu", "2")
    assert code == 0
    table = rows(text)
    assert list(table[0]) == ["lambda", "mu", "x", "y", "z"]
    assert len(table) == 6
    assert all(float(r[c]) == 0 for r in table for c in "xyz")


def test_sphere_truncated_points(tmp_path):
    code, text = run(tmp_path, "sphere", "--R", "0.8", "--n-lambda", "4", "--n-mu", "4")
    table = rows(text)
    assert code == 0
    assert any(r["x"] == "nan" for r in table)
    assert any(r["x"] != "nan" for r in table)


def test_sphere_rotational_symmetry(tmp_path):
    # f = g: with lam^2 + mu^2 fixed the geodesics are rotations of each other
    code, text = run(tmp_path, "sphere", "--f", "exp-inverse:sigma=1,p=2",
                     "--g", "exp-inverse:sigma=1,p=2", "--R", "0.8",
                     "--n-lambda", "7", "--n-mu", "7", "--lambda-max", "3", "--mu-max", "3")
    assert code == 0
    pts = [(float(r["lambda"]), float(r["mu"]), float(r["x"]), float(r["y"]), float(r["z"]))
           for r in rows(text) if r["x"] != "nan"]
    by_norm = {}
    for lam, mu, x, y, z in pts:
        by_norm.setdefault(round(math.hypot(lam, mu), 9), []).append((x, math.hypot(y, z)))
    checked = 0
    for group in by_norm.values():
        for x, rho in group[1:]:
            assert x == pytest.approx(group[0][0], abs=1e-9)
            assert rho == pytest.approx(group[0][1], abs=1e-5)
            checked += 1
    assert checked > 0


def test_bounds_csv_json_agree(tmp_path):
    argv = ["bounds", "--R", "0.4,0.8", "--nodes", "8"]
    code_c, text_c = run(tmp_path, *argv, "--format", "csv", name="b.csv")
    code_j, text_j = run(tmp_path, *argv, "--format", "json", name="b.json")
    assert code_c == code_j == 0
    table, objs = rows(text_c), json.loads(text_j)
    assert list(table[0]) == ["R", "lower", "volume", "vol_err", "upper", "ratio_lv", "ratio_vu"]
    for r, o in zip(table, objs):
        assert {k: float(v) for k, v in r.items()} == o
        assert o["upper"] / o["lower"] == pytest.approx(2.0, rel=1e-12)


def test_bounds_matching_case(tmp_path):
    code, text = run(tmp_path, "bounds", "--g", "exp-inverse:sigma=1,p=2",
                     "--R", "0.3:1:3", "--nodes", "6")
    assert code == 0
    for r in rows(text):
        assert float(r["upper"]) == pytest.approx(float(r["lower"]), rel=1e-14)


def test_bounds_failed_entry_is_nan(tmp_path, capsys):
    code, text = run(tmp_path, "bounds", "--R", "0.05,0.5", "--nodes", "6")
    assert code == 0
    table = rows(text)
    assert table[0]["volume"] == "nan" and table[1]["volume"] != "nan"
    assert "R=0.05" in capsys.readouterr().err


def test_rerun_is_byte_identical(tmp_path):
    argv = ["jacobian-check", "--random", "4", "--seed", "7", "--lambdas", "0:1:2",
            "--mus", "0:2:2", "--xs", "0.6,1.0"]
    a = run(tmp_path, *argv, name="a.csv")
    b = run(tmp_path, *argv, name="b.csv")
    assert a == b and a[0] == 0
    c = run(tmp_path, *argv[:-6], "--seed", "8", "--lambdas", "0:1:2", "--mus", "0:2:2",
            "--xs", "0.6,1.0", name="c.csv")
    assert c[1] != a[1]


def test_jacobian_check_zero_row_and_exit_codes(tmp_path):
    code, text = run(tmp_path, "jacobian-check", "--lambdas", "0", "--mus", "0", "--xs", "0.8")
    assert code == 0
    (r,) = rows(text)
    assert float(r["det_closed"]) == pytest.approx(float(r["det_matrix"]), rel=1e-14)
    assert float(r["det_closed"]) == pytest.approx(float(r["det_fd"]), rel=1e-8)
    strict = run(tmp_path, "jacobian-check", "--lambdas", "1", "--mus", "2", "--xs", "0.8",
                 "--tol", "1e-20")
    assert strict[0] == 1


def test_jacobian_check_empty_grid(tmp_path):
    code, text = run(tmp_path, "jacobian-check", "--lambdas", "", "--mus", "0", "--xs", "0.5")
    assert code == 0
    assert text == "lambda,mu,x,det_closed,det_matrix,det_fd,max_rel_err\n"


def test_jacobian_check_skips_turning_region(tmp_path, capsys):
    code, text = run(tmp_path, "jacobian-check", "--lambdas", "3", "--mus", "0",
                     "--xs", "0.5,2.0")
    assert code == 0
    assert len(rows(text)) == 1
    assert "skipped 1" in capsys.readouterr().err


def test_config_file_and_override(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# profile table\nf = power:k=2\nx = 0.5, 2\nformat = json\n")
    code, text = run(tmp_path, "profile-info", "--config", str(conf), name="p.json")
    assert code == 0
    objs = json.loads(text)
    assert [o["f"] for o in objs] == [0.25, 4.0]
    assert objs[0]["logd_g"] == pytest.approx(32.0)
    code, text = run(tmp_path, "profile-info", "--config", str(conf), "--f", "power:k=1",
                     "--format", "csv", name="p.csv")
    assert [float(r["f"]) for r in rows(text)] == [0.5, 2.0]


def test_volume_command(tmp_path):
    code, text = run(tmp_path, "volume", "--R", "0.5", "--f", "power:k=1", "--g", "power:k=1",
                     "--nodes", "12")
    assert code == 0
    (r,) = rows(text)
    assert r["method"] == "pushforward" and float(r["volume"]) > 0


def test_errors_exit_2(tmp_path, capsys):
    assert run(tmp_path, "volume")[0] == 2
    assert run(tmp_path, "profile-info", "--f", "cosh:k=1")[0] == 2
    assert "error:" in capsys.readouterr().err
    assert main([]) == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "ccball", "--version"],
                         capture_output=True, text=True, check=True).stdout
    assert out.startswith("ccball 0.1.0")
