import csv
import io
import json
import math
import subprocess
import sys

import jsonschema
import pytest

from fbmac.cli import OUTPUT_SCHEMA, SWEEP_HEADER, main


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


def run_json(*argv):
    code, out = run(*argv, "--json")
    assert code == 0
    rec = json.loads(out)
    jsonschema.validate(rec, OUTPUT_SCHEMA)
    return rec["results"]


def test_capacity():
    res = run_json("capacity", "--senders", "2", "--power", "1")
    assert res["phi"] == pytest.approx(1.3111, abs=1e-4)
    assert res["C_L"] == pytest.approx(0.5 * math.log(1 + 2 * res["phi"]), abs=1e-14)
    assert res["P_c"] == 0.0


def test_capacity_bits_and_zero_power():
    nats = run_json("capacity", "--senders", "3", "--power", "2")
    bits = run_json("capacity", "--senders", "3", "--power", "2", "--bits")
    assert bits["C_L"] == pytest.approx(nats["C_L"] / math.log(2))
    assert bits["phi"] == nats["phi"]
    assert run_json("capacity", "--senders", "3", "--power", "0")["C_L"] == 0.0


@pytest.mark.parametrize("argv", [
    ["capacity", "--senders", "1", "--power", "1"],
    ["capacity", "--senders", "2"],
    ["sweep", "--senders", "2", "--power-min", "10", "--power-max", "1"],
    ["dual", "--senders", "2", "--power", "1", "--gamma", "-1"],
    ["riccati", "--senders", "2", "--beta", "0.9"],
    ["simulate", "--senders", "2", "--beta", "1.25", "--rate", "0.2", "--blocklength", "64",
     "--trials", "0"],
    ["simulate", "--senders", "2", "--beta", "1.25", "--rate", "0.001", "--blocklength", "16",
     "--trials", "5"],
    ["nonsense"],
])
def test_usage_errors_exit_2(argv):
    assert run(*argv)[0] == 2


def test_sweep_csv():
    code, out = run("sweep", "--senders", "2", "--power-min", "1e-6", "--power-max", "1e6",
                    "--points", "3")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == SWEEP_HEADER
    data = [[float(v) for v in r] for r in rows[1:]]
    assert len(data) == 3
    assert abs(data[0][5]) < 1e-9          # low_gap at the left end
    assert abs(data[-1][6]) < 1e-3         # high_gap at the right end
    phis = [r[1] for r in data]
    assert phis == sorted(phis)
    # shortest round-trip formatting
    assert all(repr(float(v)) == v for v in rows[1])


def test_sweep_single_point_matches_capacity():
    code, out = run("sweep", "--senders", "3", "--power-min", "2", "--power-max", "2",
                    "--points", "1")
    row = [float(v) for v in out.splitlines()[1].split(",")]
    cap = run_json("capacity", "--senders", "3", "--power", "2")
    assert row[1] == cap["phi"] and row[2] == cap["C_L"]


def test_sweep_json():
    res = run_json("sweep", "--senders", "2", "--power-min", "0", "--power-max", "4",
                   "--points", "5", "--linear-grid")
    assert res["header"] == SWEEP_HEADER and len(res["rows"]) == 5


def test_dual_defaults_and_penalty():
    res = run_json("dual", "--senders", "2", "--power", "1")
    assert abs(res["gap"]) < 1e-6
    res = run_json("dual", "--senders", "2", "--power", "1", "--gamma", "0", "--lambda", "1000")
    assert res["J"] == pytest.approx(2000.0, rel=1e-6)
    assert res["gap"] > 1000


def test_dual_random_multipliers_weak_duality():
    for gam, lam in [(0.3, 0.5), (2.0, 0.05), (1.0, 3.0)]:
        res = run_json("dual", "--senders", "3", "--power", "2",
                       "--gamma", str(gam), "--lambda", str(lam))
        assert res["J"] >= res["C_L"] - 1e-9


def test_riccati():
    res = run_json("riccati", "--senders", "2", "--beta", "1.1", "--iterative")
    assert res["eigenvalues"][0] == pytest.approx((1.1 ** 4 - 1) / 2, rel=1e-12)
    assert res["dare_residual"] < 1e-9
    assert res["iterative_max_deviation"] < 1e-8
    assert res["lambeq_defect"] < 1e-8


def test_simulate():
    res = run_json("simulate", "--senders", "2", "--beta", "1.25", "--rate", "0.2",
                   "--blocklength", "64", "--trials", "2000", "--seed", "3")
    assert res["error_rate"] <= res["analytic_bound"]
    assert res["power_ok"] and res["warnings"] == []


def test_simulate_power_warning():
    res = run_json("simulate", "--senders", "2", "--beta", "1.25", "--rate", "0.25",
                   "--blocklength", "16", "--trials", "10", "--power", "0.1")
    assert not res["power_ok"] and res["warnings"]


def test_maxcorr_demo_and_file(tmp_path):
    res = run_json("maxcorr", "--demo-triple", "--samples", "20000", "--degree", "1")
    assert res["partial_correlation"] == pytest.approx(-0.5)
    assert res["linear_achieves"]
    f = tmp_path / "k.txt"
    f.write_text("3\n1 0 1\n0 1 1\n1 1 3\n")
    res2 = run_json("maxcorr", "--covariance", str(f), "--samples", "20000", "--degree", "1")
    assert res2 == res  # same matrix, same seed


def test_maxcorr_greedy():
    res = run_json("maxcorr", "--greedy-steps", "1", "--samples", "20000", "--degree", "2")
    assert res["linear_objective"] == pytest.approx(0.5 * math.log(4.0))


@pytest.mark.parametrize("text", ["2\n1 0\n", "x\n", "2\n1 2\n2 1\n", "2\n1 0 0\n0 1 0\n"])
def test_maxcorr_bad_file_exit_3(tmp_path, text):
    f = tmp_path / "bad.txt"
    f.write_text(text)
    assert run("maxcorr", "--covariance", str(f), "--samples", "100")[0] == 3


def test_missing_file_exit_3(tmp_path):
    assert run("maxcorr", "--covariance", str(tmp_path / "none.txt"))[0] == 3


def test_convergence_failure_exit_4():
    assert run("riccati", "--senders", "2", "--beta", "1.01", "--iterative",
               "--max-iters", "3")[0] == 4


def test_human_readable_output():
    code, out = run("capacity", "--senders", "2", "--power", "1")
    assert code == 0 and "C_L" in out and not out.startswith("{")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fbmac", "capacity", "--senders", "2",
                           "--power", "1", "--json"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "capacity"
