import json
import subprocess
import sys

import numpy as np
import pytest

from isomono.cli import main


def _preset(tmp_path, *args, name="cfg.json"):
    path = tmp_path / name
    assert main(["preset", *args, "--out", str(path)]) == 0
    return path


def test_preset_document(tmp_path):
    path = _preset(tmp_path, "P2", "--theta", "0.3", "--t", "1.2")
    doc = json.loads(path.read_text())
    assert doc["schema"] == 1 and doc["structure"]["r_inf"] == 4
    assert doc["preset"]["id"] == "P2" and doc["state"]["q"]


def test_outputs_are_byte_identical(tmp_path):
    a = _preset(tmp_path, "P6", "--theta1", "0.2+0.1j", name="a.json")
    b = _preset(tmp_path, "P6", "--theta1", "0.2+0.1j", name="b.json")
    assert a.read_bytes() == b.read_bytes()
    outs = []
    for name in ("x.json", "y.json"):
        assert main(["build", "--config", str(a), "--lambda", "0.5+0.5j,2", "--out", str(tmp_path / name)]) == 0
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]


def test_build_and_spectral(tmp_path):
    path = _preset(tmp_path, "P4", "--theta-inf", "0.3", "--theta1", "0.1")
    out = tmp_path / "b.json"
    assert main(["build", "--config", str(path), "--grid=-1,1,3", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["L_tilde"]) == 3 and "A_tilde" in doc
    assert main(["spectral", "--config", str(path), "--out", str(out)]) == 0
    assert "P2" in json.loads(out.read_text())


def test_evolve_csv(tmp_path):
    path = _preset(tmp_path, "P2", "--theta", "0.3")
    out = tmp_path / "t.csv"
    assert main(["evolve", "--config", str(path), "--span", "1,1.05", "--step", "0.01", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "time_re,time_im,q1_re,q1_im,p1_re,p1_im,ham_re,ham_im" and len(lines) == 7


def test_evolve_generic_time(tmp_path):
    path = _preset(tmp_path, "P2H2", "--theta", "0.3")
    doc = json.loads(path.read_text())
    del doc["preset"]
    path.write_text(json.dumps(doc))
    out = tmp_path / "t.csv"
    assert main(["evolve", "--config", str(path), "--span", "0.5,0.52", "--step", "0.01",
                 "--time", "tau_inf_2", "--out", str(out)]) == 0
    assert "q2_re" in out.read_text().splitlines()[0]
    assert main(["evolve", "--config", str(path), "--span", "0,1", "--time", "nope"]) == 2


def test_check_config_and_suite(tmp_path):
    path = _preset(tmp_path, "P5", "--theta-inf", "0.2", "--theta1", "0.1", "--theta2", "0.3")
    out = tmp_path / "r.json"
    assert main(["check", "--config", str(path), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["passed"] is True
    assert main(["check", "--cases", "2", "--checks", "time_chart,det_V", "--out", str(out)]) == 0
    assert main(["check", "--cases", "2", "--checks", "time_chart", "--tol", "1e-30", "--out", str(out)]) == 1


def _write(tmp_path, doc):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    return path


def test_schema_errors(tmp_path, capsys):
    base = json.loads(_preset(tmp_path, "P2", "--theta", "0.3").read_text())
    doc = json.loads(json.dumps(base))
    doc["times"]["inf"] = doc["times"]["inf"][:1]
    assert main(["spectral", "--config", str(_write(tmp_path, doc))]) == 1
    err = capsys.readouterr().err
    assert err.startswith("schema error at /times/inf/1:") and "sheet-2 times missing" in err
    doc = json.loads(json.dumps(base))
    del doc["structure"]["r_inf"]
    assert main(["spectral", "--config", str(_write(tmp_path, doc))]) == 1
    assert "/structure/r_inf" in capsys.readouterr().err
    doc = json.loads(json.dumps(base))
    doc["schema"] = 7
    assert main(["spectral", "--config", str(_write(tmp_path, doc))]) == 1
    assert "/schema" in capsys.readouterr().err


def test_residue_sum_rejected(tmp_path, capsys):
    doc = json.loads(_preset(tmp_path, "P2", "--theta", "0.3").read_text())
    doc["times"]["inf"][0][0] = 0.5
    assert main(["spectral", "--config", str(_write(tmp_path, doc))]) == 1
    assert "SumResidues" in capsys.readouterr().err


def test_usage_errors(tmp_path):
    assert main([]) == 2
    assert main(["preset", "P9"]) == 2
    assert main(["spectral", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["preset", "P2H2", "--t", "1"]) == 2
    assert main(["check", "--checks", "bogus"]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "isomono", "preset", "P3", "--theta1", "0.2"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["preset"]["id"] == "P3"


@pytest.mark.parametrize("seed", ["3", "x"])
def test_seed_from_environment(monkeypatch, tmp_path, seed):
    monkeypatch.setenv("ISOMONO_SEED", seed)
    out = tmp_path / "r.json"
    code = main(["check", "--cases", "1", "--checks", "det_V", "--out", str(out)])
    if seed == "x":
        assert code == 2
    else:
        assert code == 0 and json.loads(out.read_text())["seed"] == 3


def test_decoded_values_round_trip(tmp_path):
    from isomono.cli import parse_config
    path = _preset(tmp_path, "P6", "--theta-inf", "0.1-0.2j", "--t", "0.3+0.4j")
    pc = parse_config(str(path))
    assert pc.config.X[2] == pytest.approx(0.3 + 0.4j)
    assert np.allclose(pc.state.q, [0.3 + 0.7j])
