import csv
import io
import json
import subprocess
import sys
from math import comb

import numpy as np
import pytest

from orthomorse import cli, combinatorics as cb, linalg as la, quadratic as qd
from orthomorse.fileio import matrix_to_json


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def test_betti_n3(capsys):
    code, out, _ = run(capsys, "betti", "--n", 3)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["b_i"]) for r in rows] == [1, 1, 1, 1]
    assert [int(r["c_i"]) for r in rows] == [2, 2, 2, 2]
    assert all(r["frankel_ok"] == "true" for r in rows)
    assert list(rows[0]) == ["i", "b_i", "c_i", "frankel_ok", "seed"]


def test_betti_json(capsys):
    code, out, _ = run(capsys, "betti", "--n", 4, "--format", "json", "--seed", 5)
    obj = json.loads(out)
    assert code == 0 and obj["seed"] == 5
    assert [r["b_i"] for r in obj["rows"]] == list(cb.poincare_so(4).coeffs)


@pytest.mark.parametrize("iota", ["k", "complement"])
def test_frankel(capsys, iota):
    code, out, _ = run(capsys, "frankel", "--n", 6, "--iota", iota)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and all(r["equal"] == "true" for r in rows)
    assert sum(int(r["two_b_i"]) for r in rows) == 2 * 2**5


def test_fillings_all_ones(capsys, tmp_path):
    p = write(tmp_path, "m.json", {"m": [1, 1, 1], "n": [1, 1, 1]})
    code, out, _ = run(capsys, "fillings", "--margins", p)
    obj = json.loads(out)
    assert code == 0 and obj["count"] == 6 and len(obj["fillings"]) == 6
    assert sorted(f["index"] for f in obj["fillings"]) == [0, 1, 1, 2, 2, 3]
    assert all(f["component_dimension"] == 0 for f in obj["fillings"])


def test_critical_report(capsys, tmp_path):
    p = write(tmp_path, "s.json", {"a": {"values": [3, 1, 2], "mults": [1, 1, 1]},
                                   "b": {"values": [2, 1], "mults": [1, 2]}})
    code, out, _ = run(capsys, "critical", "--spectra", p, "--all-spms")
    obj = json.loads(out)
    assert code == 0
    assert obj["a"] == {"values": [1.0, 2.0, 3.0], "mults": [1, 1, 1]}
    assert obj["b"] == {"values": [1.0, 2.0], "mults": [2, 1]}
    assert obj["reduction"]["a"]["permutation"] == [1, 2, 0]
    assert len(obj["components"]) == 3
    assert len(obj["spms"]) == 48
    assert all(r["index"] == r["filling_index"] and r["nullity"] == r["component_dimension"]
               for r in obj["spms"])


def test_critical_decompose(capsys, tmp_path):
    rng = np.random.default_rng(0)
    prob = qd.QuadraticProblem(qd.Spectrum((1.0, 2.0), (2, 1)), qd.Spectrum((-1.0, 0.5), (1, 2)))
    f = cb.enumerate_fillings(prob.margins)[0]
    X = qd.construct_critical(prob, qd.random_decomposition(prob, f, rng))
    p = write(tmp_path, "s.json", {"a": {"values": [1, 2], "mults": [2, 1]},
                                   "b": {"values": [-1, 0.5], "mults": [1, 2]}})
    xp = write(tmp_path, "x.json", matrix_to_json(X))
    code, out, _ = run(capsys, "critical", "--spectra", p, "--decompose", xp)
    obj = json.loads(out)["decomposition"]
    assert code == 0
    assert obj["filling"]["eps"] == [list(r) for r in f.eps]
    assert obj["reconstruction_error"] <= 1e-8


def test_critical_symmetric_matrices(capsys, tmp_path):
    rng = np.random.default_rng(1)
    Qa, Qb = la.random_orthogonal(3, rng), la.random_orthogonal(3, rng)
    A = Qa @ np.diag([1.0, 1.0, 4.0]) @ Qa.T
    B = Qb @ np.diag([2.0, 3.0, 5.0]) @ Qb.T
    p = write(tmp_path, "s.json", {"A": matrix_to_json((A + A.T) / 2), "B": matrix_to_json((B + B.T) / 2)})
    # Qa X Qb^T is critical for (A, B) when X is an SPM for the diagonal problem
    X = Qa @ la.spm_matrix(la.SignedPermutation((1, -1, 1), (2, 3, 1))) @ Qb.T
    xp = write(tmp_path, "x.json", matrix_to_json(X))
    code, out, _ = run(capsys, "critical", "--spectra", p, "--decompose", xp)
    obj = json.loads(out)
    assert code == 0
    assert obj["a"]["mults"] == [2, 1] and obj["b"]["mults"] == [1, 1, 1]
    assert obj["decomposition"]["reconstruction_error"] <= 1e-8


def test_critical_non_critical_point_exits_2(capsys, tmp_path):
    p = write(tmp_path, "s.json", {"a": {"values": [1, 2], "mults": [1, 1]},
                                   "b": {"values": [1, 2], "mults": [1, 1]}})
    c, s = np.cos(0.3), np.sin(0.3)
    xp = write(tmp_path, "x.json", matrix_to_json([[c, -s], [s, c]]))
    code, _, err = run(capsys, "critical", "--spectra", p, "--decompose", xp)
    assert code == 2 and "numerical validation" in err
    xp = write(tmp_path, "y.json", matrix_to_json([[2.0, 0.0], [0.0, 1.0]]))
    assert run(capsys, "critical", "--spectra", p, "--decompose", xp)[0] == 2


def test_linear(capsys, tmp_path):
    ap = write(tmp_path, "a.json", matrix_to_json(np.eye(4)))
    code, out, _ = run(capsys, "linear", "--A", ap, "--grassmann", 1, "--morse-report", 3)
    obj = json.loads(out)
    assert code == 0
    pt = obj["point"]
    assert pt["critical"] and pt["index"] == 3 and pt["nullity"] == 3 and pt["grassmann_k"] == 1
    assert pt["formula_index"] == 3
    assert obj["morse_report"]["ok"]
    assert [r["b_i"] for r in obj["morse_report"]["rows"]] == [1, 1, 1, 1]
    xp = write(tmp_path, "x.json", matrix_to_json(la.random_orthogonal(4, 0)))
    code, out, _ = run(capsys, "linear", "--A", ap, "--X", xp)
    assert code == 0 and json.loads(out)["point"]["critical"] is False


def test_linear_usage_errors(capsys, tmp_path):
    assert run(capsys, "linear")[0] == 1
    ap = write(tmp_path, "a.json", matrix_to_json(np.eye(2)))
    assert run(capsys, "linear", "--A", ap, "--grassmann", 3)[0] == 1
    assert run(capsys, "linear", "--morse-report", 4)[0] == 0


@pytest.mark.parametrize("f,extra", [("nn", ["--n", 4]), ("trace", ["--n", 3])])
def test_flow(capsys, f, extra):
    code, out, _ = run(capsys, "flow", "--f", f, "--seed", 2, "--count", 2, *extra)
    obj = json.loads(out)
    assert code == 0 and obj["seed"] == 2 and len(obj["trajectories"]) == 2
    for t in obj["trajectories"]:
        assert t["converged"] and t["grad_norm"] <= 1e-10
        if f == "nn":
            assert t["classification"]["component"] == "max"
            assert t["closed_form_deviation"] <= 1e-5
        else:
            start = np.array(t["start"]["entries"]).reshape(3, 3)
            k = t["classification"]["grassmann_k"]
            assert k == (0 if np.linalg.det(start) > 0 else 1)
            assert t["index"] == comb(3 - k, 2)


def test_flow_quad_backward(capsys, tmp_path):
    p = write(tmp_path, "s.json", {"a": {"values": [1, 2, 3], "mults": [1, 1, 1]},
                                   "b": {"values": [0, 1, 5], "mults": [1, 1, 1]}})
    code, out, _ = run(capsys, "flow", "--f", "quad", "--spectra", p, "--seed", 1,
                       "--direction", "backward")
    t = json.loads(out)["trajectories"][0]
    assert code == 0 and t["converged"]
    assert t["index"] == t["classification"]["filling"]["index"]
    assert t["nullity"] == 0


def test_flow_usage_errors(capsys, tmp_path):
    assert run(capsys, "flow", "--f", "nn", "--n", 4)[0] == 1  # no seed
    assert run(capsys, "flow", "--f", "quad", "--seed", 1)[0] == 1
    assert run(capsys, "flow", "--f", "nn", "--n", 2, "--seed", 1)[0] == 1
    p = write(tmp_path, "s.json", {"a": {"values": [1, 2], "mults": [1, 1]},
                                   "b": {"values": [1, 2], "mults": [1, 1]}})
    assert run(capsys, "flow", "--f", "quad", "--spectra", p, "--n", 3, "--seed", 1)[0] == 1


def test_prop_main(capsys):
    code, out, _ = run(capsys, "prop-main", "--n", 5, "--samples", 30, "--seed", 4)
    obj = json.loads(out)
    assert code == 0 and obj["passed"] == 30 and obj["failed"] == 0
    assert obj["max_deviation"] <= 1e-9


def test_prop_main_failures_exit_2(capsys):
    code, out, _ = run(capsys, "prop-main", "--n", 4, "--samples", 20, "--seed", 4, "--tol", 0)
    obj = json.loads(out)
    assert obj["failed"] > 0 and code == 2


def test_parse_and_file_errors(capsys, tmp_path):
    assert run(capsys)[0] == 1
    assert run(capsys, "betti")[0] == 1
    assert run(capsys, "betti", "--n", "zero")[0] == 1
    assert run(capsys, "betti", "--help")[0] == 0
    assert run(capsys, "fillings", "--margins", tmp_path / "missing.json")[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "fillings", "--margins", bad)[0] == 1
    p = write(tmp_path, "m.json", {"m": [1, 2], "n": [1]})
    assert run(capsys, "fillings", "--margins", p)[0] == 1
    p = write(tmp_path, "s.json", {"a": {"values": [1], "mults": [2]}})
    assert run(capsys, "critical", "--spectra", p)[0] == 1


def test_help_documents_every_flag():
    parser = cli.build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    for name, sp in sub.choices.items():
        for action in sp._actions:
            if action.option_strings and action.dest != "help":
                assert action.help, (name, action.dest)


def test_output_is_deterministic(capsys):
    argv = ["flow", "--f", "nn", "--n", 5, "--seed", 9, "--count", 2]
    first = run(capsys, *argv)[1]
    assert first == run(capsys, *argv)[1]


def test_module_entry_point_byte_identical():
    cmd = [sys.executable, "-m", "orthomorse", "prop-main", "--n", "4", "--samples", "5", "--seed", "1"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["seed"] == 1


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--seed", 0)
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == "seed 0"
    assert all(line.startswith("PASS") for line in lines[1:-1])
    assert lines[-1].endswith("properties passed")
