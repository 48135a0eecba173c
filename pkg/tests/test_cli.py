import json

import numpy as np
import pytest

from stabres.cli import main
from stabres.io import read_csv


def run(tmp_path, *args, name="out.csv"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def test_spectrum_free_box(tmp_path):
    code, out = run(tmp_path, "spectrum", "--G", "0", "--c", "4", "--levels", "3")
    assert code == 0
    header, rows = read_csv(out)
    assert header == ["N", "q", "E"]
    assert np.allclose([r[1] for r in rows], np.arange(1, 4) * np.pi / 5, rtol=1e-5)
    assert out.read_text().startswith("# units:")


def test_spectrum_verify_and_bound_state(tmp_path):
    code, out = run(tmp_path, "spectrum", "--G", "-20", "--c", "5", "--levels", "10", "--verify", "--bound-state")
    assert code == 0
    text = out.read_text()
    assert "bound state: kappa=" in text
    header, rows = read_csv(out)
    assert header[-1] == "residual" and len(rows) == 10


def test_spectrum_json(tmp_path):
    code, out = run(tmp_path, "spectrum", "--G", "20", "--c", "5", "--levels", "2", "--format", "json", name="s.json")
    doc = json.loads(out.read_text())
    assert code == 0 and doc["units"] and doc["levels"][0]["N"] == 1


def test_config_errors(tmp_path):
    assert main(["spectrum", "--c", "-1"]) == 2
    assert main(["diagram", "--c-min", "5", "--c-max", "2"]) == 2
    assert main(["extract", "--method", "fit,magic"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"nonsense": 1}')
    assert main(["poles", "--config", str(bad)]) == 2
    assert main(["poles", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["poles", "--G", "0"]) == 3


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"G": 10.0, "n_poles": 3}))
    code, out = run(tmp_path, "poles", "--config", str(cfg))
    assert code == 0 and "G=10" in out.read_text() and len(read_csv(out)[1]) == 3
    code, out = run(tmp_path, "poles", "--config", str(cfg), "--G", "-5", "--n-poles", "2")
    _, rows = read_csv(out)
    assert "G=-5" in out.read_text() and len(rows) == 2
    assert rows[0][3] == pytest.approx(12.8, abs=0.05)


def test_diagram_is_deterministic(tmp_path):
    args = ["diagram", "--G", "20", "--c-min", "2", "--c-max", "12", "--c-steps", "101", "--levels", "10"]
    code1, a = run(tmp_path, *args, name="a.csv")
    code2, b = run(tmp_path, *args, name="b.csv")
    assert code1 == code2 == 0
    assert a.read_bytes() == b.read_bytes()
    header, rows = read_csv(a)
    assert header[0] == "c" and header[-1] == "E_10" and len(rows) == 101


def test_extract_reports_failures_as_results(tmp_path):
    code, out = run(tmp_path, "extract", "--G", "5", "--c-steps", "5801", name="e.json")
    assert code == 0
    doc = json.loads(out.read_text())
    by = {r["method"]: r for r in doc["results"]}
    assert by["fit"]["status"] == "failed" and by["dos"]["status"] == "failed"
    assert by["qbp"]["E_r"] == pytest.approx(7.43, abs=0.02)
    assert by["qbp"]["Gamma"] == pytest.approx(1.90, abs=0.02)


def test_extract_with_energy_target(tmp_path):
    code, out = run(tmp_path, "extract", "--G", "20", "--method", "dos", "--E-target", "9", name="e.json")
    res = json.loads(out.read_text())["results"][0]
    assert code == 0 and res["level_indices"] == [8, 9, 10]
    assert res["E_r"] == pytest.approx(8.97, abs=0.01)


def test_toy_outputs(tmp_path):
    code, out = run(tmp_path, "toy", "--verify")
    header, rows = read_csv(out)
    assert code == 0 and header == ["L", "lambda1", "lambda2", "lambda3"]
    code, out = run(tmp_path, "toy", "--delta", "0,0", "--L-min", "0.5", "--L-max", "3", name="t0.csv")
    rows = np.array(read_csv(out)[1])
    L = rows[:, 0]
    bare = np.sort(np.column_stack([np.full_like(L, np.pi ** 2), (np.pi / L) ** 2, (2 * np.pi / L) ** 2]), axis=1)
    assert np.allclose(rows[:, 1:], bare, rtol=1e-5)
    assert main(["toy", "--delta", "1"]) == 2


def test_poles_stdout(capsys):
    assert main(["poles", "--G", "10", "--n-poles", "2", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["poles"][1]["E_r"] == pytest.approx(34.1, abs=0.05)


def test_reproduce_writes_summary(tmp_path, monkeypatch, capsys):
    from stabres import benchmarks

    monkeypatch.setattr(benchmarks, "run_all", lambda settings=None: [benchmarks.Check("a", True, "x"),
                                                                     benchmarks.Check("b", False, "y")])
    code, out = run(tmp_path, "reproduce-paper", "--format", "json", name="r.json")
    doc = json.loads(out.read_text())
    assert code == 0 and doc["summary"] == "1/2 checks passed" and doc["units"]
    assert "FAIL  b: y" in capsys.readouterr().out
