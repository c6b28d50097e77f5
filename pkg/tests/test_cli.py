import json
import subprocess
import sys

import pytest

from unibw.cli import main

SMALL_CFG = """
study.n = [300, 3000]
study.replications = 4
grid.rho = 1.3
conc.n = 2000
conc.levels = 4
poisson.n = 2000
poisson.h = 0.02
"""


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_grid_csv(capsys):
    code, out, _ = run(capsys, "grid", "--hlo", "0.01", "--hhi", "0.05", "--rho", "2")
    assert code == 0
    assert out.splitlines() == ["h", "0.01", "0.02", "0.04", "0.05"]


def test_unknown_flag_exits_2(capsys):
    code, _, err = run(capsys, "--no-such-flag")
    assert code == 2 and "usage:" in err


def test_runtime_error_exits_1(capsys):
    code, _, err = run(capsys, "grid", "--hlo", "0.5", "--hhi", "0.1", "--rho", "2")
    assert code == 1 and "error" in err


def test_chernoff_json(capsys):
    code, out, _ = run(capsys, "verify", "chernoff", "--n", "1,10")
    rows = json.loads(out)["rows"]
    assert code == 0
    assert rows[0]["exact"] == pytest.approx(0.08030, abs=1e-5)
    assert rows[1]["exact"] == pytest.approx(0.00159, abs=1e-5)


def test_gn_kde_band_selectors(capsys, tmp_path):
    data = tmp_path / "d.csv"
    data.write_text("x1\n0.1\n0.5\n0.9\n")
    code, out, _ = run(capsys, "gn", "--data", str(data), "--h", "0.25", "--z", "0", "--config", str(_unit_cfg(tmp_path)))
    assert code == 0 and json.loads(out)["rows"][0]["G_n"] == pytest.approx(0.25)
    code, out, _ = run(capsys, "kde", "--data", str(data), "--h", "0.5", "--z", "0.25")
    assert json.loads(out)["rows"][0]["f_n"] == pytest.approx(2 / 3)
    code, out, _ = run(capsys, "band", "--h", "0.01", "--z", "1.0", "--n", "10000", "--fz", "1")
    row = json.loads(out)["rows"][0]
    assert row["half_width"] == pytest.approx(0.30349, abs=1e-5)
    code, out, _ = run(capsys, "selectors", "--n", "500")
    assert [r["method"] for r in json.loads(out)["rows"]] == ["silverman", "sheather-jones"]


def _unit_cfg(tmp_path):
    p = tmp_path / "u.cfg"
    p.write_text("density.kind = uniform\ndensity.lo = [0.0]\ndensity.hi = [1.0]\nregion.lo = [0.2]\nregion.hi = [0.8]\n")
    return p


def test_band_real_data_uses_plugin(capsys, tmp_path):
    data = tmp_path / "d.csv"
    import numpy as np
    x = np.random.default_rng(0).normal(size=400)
    data.write_text("x1\n" + "\n".join(repr(float(v)) for v in x) + "\n")
    code, out, _ = run(capsys, "band", "--data", str(data), "--h", "0.1", "--z", "0.0")
    row = json.loads(out)["rows"][0]
    assert code == 0 and row["f_source"] == "sheather-jones" and row["lower"] < row["f_n"] < row["upper"]


def test_missing_data_file(capsys, tmp_path):
    code, _, err = run(capsys, "kde", "--data", str(tmp_path / "none.csv"), "--h", "0.1", "--z", "0")
    assert code == 1 and "no such file" in err


def test_verify_out_writes_envelope(capsys, tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(SMALL_CFG)
    out = tmp_path / "r" / "cor.json"
    code, _, _ = run(capsys, "verify", "cor11", "--config", str(cfg), "--out", str(out))
    assert code == 0
    env = json.loads(out.read_text())
    assert env["payload"]["study"] == "cor11" and (tmp_path / "r" / "cor_summary.csv").exists()


@pytest.mark.parametrize("study", ["thm1-i", "thm1-ii", "cor11", "conc", "poissonize", "covering"])
def test_verify_studies_run(capsys, tmp_path, study):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(SMALL_CFG)
    code, out, err = run(capsys, "verify", study, "--config", str(cfg))
    assert code == 0, err
    assert isinstance(json.loads(out), dict)


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "unibw.cli", "grid", "--hlo", "0.01", "--hhi", "0.03", "--rho", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.split() == ["h", "0.01", "0.02", "0.03"]
