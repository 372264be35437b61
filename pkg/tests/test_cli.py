import json
import subprocess
import sys

import numpy as np
import pytest

from clockgap.circuit import circuit_to_dict
from clockgap.cli import main

from _fixtures import circ_hh, circ_id, circ_x


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, factory in {"x": circ_x, "id": circ_id, "hh": circ_hh}.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(circuit_to_dict(factory())))
        paths[name] = str(p)
    t = tmp_path / "and.json"
    t.write_text(json.dumps({"arity": 2, "values": [0, 0, 0, 1]}))
    paths["and"] = str(t)
    paths["dir"] = tmp_path
    return paths


def run_json(capsys, argv):
    code = main([*argv, "--format", "structured"])
    out = capsys.readouterr().out
    return code, json.loads(out), out


def test_build(capsys, files):
    code, doc, _ = run_json(capsys, ["build", "-c", files["x"], "-x", "0"])
    assert code == 0 and doc["schema"] == 1 and doc["command"] == "build"
    assert [t["tag"] for t in doc["terms"]] == ["Prop", "In", "Out"]
    assert doc["dims"] == {"S": 1, "T": 1, "n": 1, "K": 1, "dim": 4}


def test_build_dense_matrices(capsys, files):
    code, doc, _ = run_json(capsys, ["build", "-c", files["id"], "-x", "0", "--dense"])
    m = np.array(doc["terms"][0]["matrix"])
    assert code == 0 and m.shape == (4, 4, 2)


def test_spectrum(capsys, files):
    code, doc, _ = run_json(capsys, ["spectrum", "-c", files["id"], "-x", "0"])
    assert code == 0
    assert doc["lambda_min"] == pytest.approx(1 - np.sqrt(2) / 2, abs=1e-10)
    assert doc["verdict"] == "soundness_like" and doc["bound"] == 0.0625
    code, doc, _ = run_json(capsys, ["spectrum", "-c", files["x"], "-x", "0", "--method", "iterative"])
    assert code == 0 and doc["verdict"] == "completeness_like" and doc["method"] == "iterative"


def test_spectrum_paper_literal(capsys, files):
    code, doc, _ = run_json(capsys, ["spectrum", "-c", files["hh"], "-x", "1", "--paper-literal"])
    assert code == 0 and doc["include_ancilla_checks"] is False


def test_verify(capsys, files):
    argv = ["verify", "-c", files["id"], "-x", "0", "--proof", "zero", "--samples", "100000", "--seed", "7"]
    code, doc, out1 = run_json(capsys, argv)
    assert code == 0
    assert doc["exact_reject_probability"] == pytest.approx(0.125, abs=1e-15)
    assert doc["slot_sum_reject_probability"] == pytest.approx(0.125, abs=1e-12)
    assert abs(doc["empirical_reject_rate"] - 0.125) <= 3 * np.sqrt(0.125 * 0.875 / 1e5)
    _, _, out2 = run_json(capsys, argv)
    assert out1 == out2


def test_verify_history_never_rejects(capsys, files):
    code, doc, _ = run_json(capsys, ["verify", "-c", files["hh"], "-x", "1", "--samples", "5000"])
    assert code == 0 and doc["rejections"] == 0


def test_verify_proof_file(capsys, files):
    psi = np.zeros(4, dtype=complex)
    psi[1] = 1j
    p = files["dir"] / "proof.json"
    p.write_text(json.dumps([[z.real, z.imag] for z in psi]))
    code, doc, _ = run_json(capsys, ["verify", "-c", files["id"], "-x", "0", "--proof", str(p)])
    # |1> at clock 0 on input 0: Prop contributes 1/2 and In contributes 1
    assert code == 0 and doc["energy"] == pytest.approx(1.5, abs=1e-15)


def test_verify_proof_dimension_mismatch(capsys, files):
    p = files["dir"] / "short.json"
    p.write_text(json.dumps([[1, 0], [0, 0]]))
    assert main(["verify", "-c", files["id"], "-x", "0", "--proof", str(p)]) == 2
    assert "proof has shape (2,), expected (4,)" in capsys.readouterr().err


def test_verify_proof_not_normalized(capsys, files):
    p = files["dir"] / "big.json"
    p.write_text(json.dumps([[1, 0], [1, 0], [0, 0], [0, 0]]))
    assert main(["verify", "-c", files["id"], "-x", "0", "--proof", str(p)]) == 2
    assert "error" in capsys.readouterr().err


def test_demo_revcomp(capsys, files):
    code, doc, _ = run_json(capsys, ["demo-revcomp", "-t", files["and"]])
    assert code == 0
    assert [r["verdict"] for r in doc["rows"]] == ["soundness_like"] * 3 + ["completeness_like"]
    assert all(r["ok"] for r in doc["rows"])
    assert doc["layout"]["output"] == 1


def test_human_output(capsys, files):
    assert main(["spectrum", "-c", files["id"], "-x", "0"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("[spectrum]") and "lambda_min" in out
    assert main(["demo-revcomp", "-t", files["and"]]) == 0
    assert "completeness_like" in capsys.readouterr().out


def test_structured_output_is_byte_stable(files):
    argv = [sys.executable, "-m", "clockgap", "spectrum", "-c", files["hh"], "-x", "0", "--format", "structured"]
    a = subprocess.run(argv, capture_output=True, text=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, text=True, check=True).stdout
    assert a == b and json.loads(a)["command"] == "spectrum"


@pytest.mark.parametrize(
    "argv, message",
    [
        (["spectrum", "-c", "missing.json", "-x", "0"], "missing.json"),
        (["spectrum", "-c", "{x}", "-x", "01"], "length"),
        (["spectrum", "-c", "{x}", "-x", "2"], "0"),
        (["verify", "-c", "{x}", "-x", "0", "--samples", "0"], "--samples"),
        (["spectrum", "-c", "{x}", "-x", "0", "--tol", "0"], "--tol"),
        (["demo-revcomp", "-t", "{x}"], "unknown field"),
    ],
)
def test_input_errors_exit_2(capsys, files, argv, message):
    argv = [a.replace("{x}", files["x"]) for a in argv]
    assert main(argv) == 2
    assert message in capsys.readouterr().err


def test_bad_circuit_file_exit_2(capsys, files):
    p = files["dir"] / "bad.json"
    p.write_text(json.dumps({"qubits": 1, "input_bits": 1, "gates": [{"name": "X", "targets": [0]}]}))
    assert main(["build", "-c", str(p), "-x", "0"]) == 2
    assert "target index must be >= 1" in capsys.readouterr().err


def test_unknown_flag_exit_2(files):
    with pytest.raises(SystemExit) as info:
        main(["spectrum", "-c", files["x"], "-x", "0", "--bogus"])
    assert info.value.code == 2


def test_solver_failure_exit_2(capsys, files):
    assert main(["spectrum", "-c", files["hh"], "-x", "0", "--method", "iterative", "--max-iter", "1"]) == 2
    assert "solver error" in capsys.readouterr().err
