import json
import subprocess
import sys

import numpy as np
import pytest

from multicoin_walk import cli, moments
from multicoin_walk.errors import NumericError
from multicoin_walk.factorized import multicoin_distribution


def run(args, tmp_path, name="out"):
    path = tmp_path / name
    rc = cli.main(list(args) + ["-o", str(path)])
    return rc, path.read_text(encoding="utf-8") if path.exists() else None


def csv_rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def csv_meta(text):
    out = {}
    for ln in text.splitlines():
        if ln.startswith("# ") and ": " in ln:
            k, v = ln[2:].split(": ", 1)
            out[k] = v
    return out


def test_parse_range():
    assert cli.parse_range("1..5") == [1, 2, 3, 4, 5]
    assert cli.parse_range("1,2,4") == [1, 2, 4]
    assert cli.parse_range("3") == [3]


def test_distribution_combinatorial_moments(tmp_path):
    rc, text = run(["distribution", "--coins", "1", "--time", "500", "--method", "combinatorial"], tmp_path)
    assert rc == 0
    meta = csv_meta(text)
    assert meta["method"] == "combinatorial" and meta["time"] == "500" and meta["start"] == "R"
    header, rows = csv_rows(text)
    assert header == ["x", "p"]
    x = np.array([int(r[0]) for r in rows])
    p = np.array([float(r[1]) for r in rows])
    assert np.all(x % 2 == 0)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    # drift magnitude matches the closed form (sign: see the moments tests)
    assert abs(np.dot(x, p) / 500 + moments.closed_form_multicoin(1).c1) < 0.01


def test_distribution_twenty_coins_json_round_trip(tmp_path):
    rc, _ = run(["distribution", "--coins", "20", "--time", "200", "--method", "factorized", "--format", "json"], tmp_path, "d.json")
    assert rc == 0
    dist = cli.load_distribution_json(str(tmp_path / "d.json"))
    assert dist.max_abs_diff(multicoin_distribution(20, 10)) == 0.0


def test_distribution_asymptotic(tmp_path):
    rc, text = run(["distribution", "--coins", "2", "--time", "500", "--method", "asymptotic"], tmp_path)
    assert rc == 0
    _, rows = csv_rows(text)
    assert len(rows) == 501


def test_all_positions(tmp_path):
    rc, text = run(["distribution", "--time", "10", "--all-positions"], tmp_path)
    assert rc == 0
    _, rows = csv_rows(text)
    assert len(rows) == 21
    assert all(float(r[1]) == 0.0 for r in rows[1::2])


def test_moments_five_series(tmp_path):
    rc, _ = run(["moments", "--coins", "1..5", "--time", "400", "--format", "json"], tmp_path, "m.json")
    assert rc == 0
    payload = json.loads((tmp_path / "m.json").read_text())
    assert len(payload["data"]) == 5
    for m in range(1, 6):
        fit = payload["footer"][str(m)]["fitted"]["var_coeff"]
        assert fit == pytest.approx(moments.closed_form_multicoin(m).var_coeff, rel=0.05)
    series = cli.load_moments_json(str(tmp_path / "m.json"))
    assert sorted(series) == [1, 2, 3, 4, 5]
    ref = moments.direct_moment_series(3, 400)
    assert np.array_equal(series[3].second, ref.second)


def test_moments_time_zero(tmp_path):
    rc, text = run(["moments", "--coins", "1", "--time", "0"], tmp_path)
    assert rc == 0
    header, rows = csv_rows(text)
    assert header == ["coins", "t", "mean", "second", "variance"]
    assert rows == [["1", "0", "0", "0", "0"]]


def test_moments_reset(tmp_path):
    rc, _ = run(["moments", "--reset-every", "2", "--time", "800", "--format", "json"], tmp_path, "r.json")
    assert rc == 0
    payload = json.loads((tmp_path / "r.json").read_text())
    assert payload["footer"]["2"]["fitted"]["c2"] == pytest.approx(1 / 8, rel=0.02)
    assert payload["footer"]["2"]["reset-quadrature"]["c2"] == pytest.approx(1 / 8, abs=1e-12)


def test_compare(tmp_path):
    rc, text = run(["compare", "--coins", "3", "--time", "24", "--method", "direct,factorized"], tmp_path)
    assert rc == 0
    _, rows = csv_rows(text)
    assert float(rows[0][2]) < 1e-10
    rc, text = run(["compare", "--coins", "1", "--time", "20", "--method", "direct,combinatorial"], tmp_path)
    _, rows = csv_rows(text)
    assert float(rows[0][2]) < 1e-12
    assert "# seconds:" in text


def test_compare_asymptotic_informational(tmp_path):
    rc, _ = run(["compare", "--coins", "2", "--time", "500", "--method", "factorized,asymptotic", "--format", "json"], tmp_path, "c.json")
    assert rc == 0
    pair = json.loads((tmp_path / "c.json").read_text())["data"]["pairs"][0]
    assert pair["l1"] > 0


def test_coefficients(tmp_path):
    rc, text = run(["coefficients", "--coins", "1..5"], tmp_path)
    assert rc == 0
    assert csv_meta(text)["sources"] == "closed,spectral"
    _, rows = csv_rows(text)
    by = {}
    for r in rows:
        by.setdefault(int(r[0]), {})[r[4]] = np.array([float(v) for v in r[1:4]])
    for m in range(1, 6):
        assert np.max(np.abs(by[m]["closed"] - by[m]["spectral"])) < 1e-6

    rc, text = run(["coefficients", "--reset-every", "1,2,3,200"], tmp_path)
    _, rows = csv_rows(text)
    vals = {int(r[0]): (float(r[1]), float(r[2])) for r in rows}
    assert vals[1] == pytest.approx((0, 0), abs=1e-10)
    assert vals[2] == pytest.approx((0, 1 / 8), abs=1e-10)
    assert vals[3] == pytest.approx((-1 / 6, 7 / 72), abs=1e-10)
    assert vals[200] == pytest.approx((1 / np.sqrt(2) - 1, 1 - 5 / np.sqrt(32)), abs=1e-2)


@pytest.mark.parametrize(
    "args",
    [
        ["distribution", "--coins", "3", "--time", "10", "--method", "factorized"],
        ["distribution", "--coins", "2", "--time", "10", "--method", "combinatorial"],
        ["distribution", "--coins", "20", "--time", "40", "--method", "direct"],
        ["distribution", "--time", "-1"],
        ["distribution", "--start", "1,1"],
        ["distribution", "--method", "magic"],
        ["coefficients", "--coins", "11", "--source", "spectral"],
        ["coefficients", "--source", "reset-quadrature"],
        ["moments", "--reset-every", "3", "--time", "10"],
        ["moments", "--reset-every", "10", "--time", "20000"],
        ["compare", "--coins", "1", "--time", "10", "--method", "direct"],
        ["distribution", "--coins", "0"],
        ["bogus"],
    ],
)
def test_usage_errors(args, tmp_path, capsys):
    rc, _ = run(args, tmp_path)
    assert rc == cli.EXIT_USAGE


def test_numeric_failure_exit_code(tmp_path, monkeypatch):
    def broken(*args, **kwargs):
        raise NumericError("eigensolver failed at k node 3")

    monkeypatch.setattr(moments, "spectral_coefficients", broken)
    rc, _ = run(["coefficients", "--coins", "2", "--source", "spectral"], tmp_path)
    assert rc == cli.EXIT_NUMERIC


@pytest.mark.parametrize(
    "args",
    [
        ["distribution", "--coins", "4", "--time", "24", "--method", "direct", "--format", "json"],
        ["moments", "--coins", "1..3", "--time", "240"],
        ["coefficients", "--coins", "1..3", "--seed", "7"],
    ],
)
def test_byte_identical_reruns(args, tmp_path):
    _, a = run(args, tmp_path, "a")
    _, b = run(args, tmp_path, "b")
    assert a == b and a


def test_seventeen_digit_floats(tmp_path):
    _, text = run(["distribution", "--time", "3"], tmp_path)
    _, rows = csv_rows(text)
    dist = cli.compute_distribution("combinatorial", 1, 3, cli.RunConfig("distribution"))
    for x, p in rows:
        # printed values round-trip to the exact doubles
        assert float(p) == dist.prob(int(x))
    assert float(rows[-1][1]) == pytest.approx(0.125, abs=1e-16)


def test_module_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "multicoin_walk", "distribution", "--time", "2"],
        capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip().splitlines()[-3:] == ["-2,0.25", "0,0.5", "2,0.25"]
