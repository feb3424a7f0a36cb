import json
import subprocess
import sys

import numpy as np
import pytest

from spreal import enumeration
from spreal.boundary import normalize_pair, plant_pair
from spreal.cli import EXIT, main, run
from spreal.linalg import int_matrix


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def call(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    doc = json.loads(out)
    assert set(doc) == {"status", "payload", "residuals", "seed"}
    assert EXIT[doc["status"]] == code
    return code, doc, out


def test_snf_roundtrip(tmp_path, capsys):
    M = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
    code, doc, _ = call(capsys, ["snf", "--input", write(tmp_path, "m.json", M)])
    assert code == 0 and doc["payload"]["diagonal"] == [2, 6, 12]
    U, D, V = (int_matrix(doc["payload"][k]) for k in "UDV")
    assert np.array_equal(U @ int_matrix(M) @ V, D)


def test_snf_encoded_entries(tmp_path, capsys):
    big = str(3 * 2**70)
    obj = {"rows": 1, "cols": 2, "entries": [[big, "0"]]}
    code, doc, _ = call(capsys, ["snf", "--input", write(tmp_path, "m.json", obj)])
    assert code == 0 and doc["payload"]["diagonal"] == [3 * 2**70]


def test_sp_check_tau_twist(tmp_path, capsys):
    J = [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]]
    path = write(tmp_path, "j.json", J)
    assert call(capsys, ["sp-check", "--input", path])[1]["payload"]["symplectic"]
    assert call(capsys, ["tau", "--input", path])[1]["payload"]["tau"] == (-np.array(J)).tolist()
    assert call(capsys, ["twist", "--input", path])[1]["payload"]["twist"] == (-np.eye(4, dtype=int)).tolist()
    bad = write(tmp_path, "bad.json", [[1, 1], [1, 1]])
    assert not call(capsys, ["sp-check", "--input", bad])[1]["payload"]["symplectic"]
    assert call(capsys, ["tau", "--input", bad])[0] == EXIT["hypothesis_failed"]


def test_factor_and_cocycle(tmp_path, capsys):
    path = write(tmp_path, "g.json", [[1, 2], [0, 1]])
    code, doc, _ = call(capsys, ["factor", "--input", path])
    assert code == 0
    assert np.array_equal(int_matrix(doc["payload"]["beta"]) @ int_matrix(doc["payload"]["u"]),
                          int_matrix([[1, 2], [0, 1]]))
    code, doc, _ = call(capsys, ["cocycle-check", "--input", path])
    assert doc["payload"]["is_cocycle"]


def test_trivialize_and_real_locus(tmp_path, capsys):
    gamma = [[0, -0.5], [2, 0]]
    path = write(tmp_path, "c.json", gamma)
    code, doc, _ = call(capsys, ["trivialize", "--input", path])
    assert code == 0 and doc["residuals"]["coboundary"] <= 1e-8
    code, doc, _ = call(capsys, ["real-locus", "--input", path, "--seed", "5"])
    assert code == 0 and doc["seed"] == 5 and doc["residuals"]["locus"] <= 1e-8
    bad = write(tmp_path, "nc.json", [[2, 0], [0, 0.5]])
    assert call(capsys, ["trivialize", "--input", bad])[0] == EXIT["hypothesis_failed"]


def test_normalize_involution(tmp_path, capsys):
    path = write(tmp_path, "a.json", [[-1, 0], [2, 1]])
    code, doc, _ = call(capsys, ["normalize-involution", "--input", path, "--k", "2"])
    assert code == 0 and sorted(doc["payload"]["signs"]) == [-1, 1]
    path = write(tmp_path, "b.json", [[1, 0], [4, -1]])
    code, doc, _ = call(capsys, ["normalize-involution", "--input", path, "--k", "2", "--q", "1"])
    assert code == 0 and doc["payload"]["signs"] == [1, -1]
    bad = write(tmp_path, "c.json", [[0, 1], [1, 0]])
    assert call(capsys, ["normalize-involution", "--input", bad, "--k", "2"])[0] == EXIT["hypothesis_failed"]


def test_boundary(tmp_path, capsys):
    obj = {"q": 1, "a": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
           "gamma": np.eye(4, dtype=int).tolist(), "m": 1}
    code, doc, _ = call(capsys, ["boundary", "--input", write(tmp_path, "p.json", obj), "--k", "2"])
    assert code == 0 and all(doc["payload"]["checks"].values())
    assert doc["payload"]["two_power"]["r"] == 2
    obj["gamma"] = [[1, 0, 0, 0], [0, 1, 0, 0], [1, 0, 1, 0], [0, 0, 0, 1]]
    assert call(capsys, ["boundary", "--input", write(tmp_path, "q.json", obj)])[0] == EXIT["hypothesis_failed"]
    del obj["a"]
    assert call(capsys, ["boundary", "--input", write(tmp_path, "r.json", obj)])[0] == EXIT["malformed"]


def test_kappa_and_level_check(tmp_path, capsys):
    gamma = write(tmp_path, "g.json", [[1, -2], [0, 1]])
    Z = write(tmp_path, "z.json", {"re": [[1.0]], "im": [[1.5]]})
    code, doc, _ = call(capsys, ["kappa", "--gamma", gamma, "--Z", Z])
    assert code == 0 and doc["residuals"]["diagram"] <= 1e-7
    code, doc, _ = call(capsys, ["level-check", "--gamma", gamma, "--Z", Z, "--N", "4"])
    assert doc["payload"] == {"in_gamma_N": False, "level_compatible": False, "agree": True, "N": 4}
    code, doc, _ = call(capsys, ["level-check", "--gamma", gamma, "--Z", Z, "--N", "2"])
    assert doc["payload"]["in_gamma_N"] and doc["payload"]["level_compatible"]
    far = write(tmp_path, "w.json", {"re": [[0.3]], "im": [[1.5]]})
    assert call(capsys, ["kappa", "--gamma", gamma, "--Z", far])[0] == EXIT["hypothesis_failed"]


def test_h1_count_and_components(tmp_path, capsys):
    code, doc, _ = call(capsys, ["h1-count", "--n", "1", "--m", "1", "--cache", str(tmp_path)])
    assert code == 0 and doc["payload"]["cardinality"] == 4
    assert call(capsys, ["sl2-components"])[1]["payload"]["count"] == 3


def test_budget_exceeded(capsys, monkeypatch):
    real = enumeration.h1_double_cosets
    monkeypatch.setattr(enumeration, "h1_double_cosets", lambda n, m, cache_dir=None: real(n, m, cap=100))
    assert call(capsys, ["h1-count", "--n", "2", "--m", "1"])[0] == EXIT["budget_exceeded"]


def test_not_found(tmp_path, capsys, rng):
    for _ in range(10):
        bp, _ = plant_pair(2, 1, 1, rng)
        if normalize_pair(bp).word:
            break
    obj = {"q": 1, "a": bp.a.tolist(), "gamma": bp.gamma.tolist(), "m": 1}
    path = write(tmp_path, "p.json", json.loads(json.dumps(obj, default=int)))
    assert call(capsys, ["boundary", "--input", path, "--bound", "0"])[0] == EXIT["not_found"]
    assert call(capsys, ["boundary", "--input", path])[0] == EXIT["ok"]


def test_malformed(tmp_path, capsys):
    assert call(capsys, [])[0] == EXIT["malformed"]
    assert call(capsys, ["no-such-command"])[0] == EXIT["malformed"]
    assert call(capsys, ["snf"])[0] == EXIT["malformed"]
    assert call(capsys, ["snf", "--input", str(tmp_path / "missing.json")])[0] == EXIT["malformed"]
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert call(capsys, ["snf", "--input", str(bad)])[0] == EXIT["malformed"]
    assert call(capsys, ["h1-count", "--n", "x"])[0] == EXIT["malformed"]


def test_determinism(tmp_path, capsys):
    gamma = write(tmp_path, "g.json", [[1, -2], [0, 1]])
    Z = write(tmp_path, "z.json", {"re": [[1.0]], "im": [[1.5]]})
    outs = {call(capsys, ["kappa", "--gamma", gamma, "--Z", Z, "--seed", "7"])[2] for _ in range(2)}
    assert len(outs) == 1
    outs = {call(capsys, ["verify-suite", "smoke", "--only", "twist_closed_form", "sp_trivialize"])[2]
            for _ in range(2)}
    assert len(outs) == 1


def test_verify_suite_canary(capsys):
    code, doc, _ = call(capsys, ["verify-suite", "smoke", "--only", "twist_closed_form", "--canary"])
    assert code == EXIT["hypothesis_failed"]
    failed = [r for r in doc["payload"]["properties"] if not r["passed"]]
    assert failed and failed[0]["name"] == "twist_closed_form" and "seed" in failed[0]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "spreal", "sl2-components"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["payload"]["count"] == 3
