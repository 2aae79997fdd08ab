import json
import os
import subprocess
import sys
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from magneto_spectra.cli import main
from magneto_spectra.config import ConfigError, RunConfig, load_config

ROOT = Path(__file__).resolve().parents[1]
VAR = ROOT / "configs" / "disk_variable.toml"
CONST = ROOT / "configs" / "disk_const.toml"


def _write(tmp_path, text, name="c.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


BASE = '[domain]\ntype = "disk"\n[field]\nexpr = "2 - x"\n'


def test_shipped_configs_parse():
    for p in (VAR, CONST):
        cfg = load_config(p)
        assert len(cfg.B_list()) == 5


def test_geometric_range(tmp_path):
    cfg = load_config(_write(tmp_path, BASE + "[sweep]\nstart = 100\nstop = 1600\nnum = 5\n"))
    assert cfg.B_list() == pytest.approx([100, 200, 400, 800, 1600])


@pytest.mark.parametrize("extra", [
    "[strip]\nbogus = 1\n",
    "[nonsense]\n",
    "[solver]\ntol = \"small\"\n",
    "[solver]\nnev = 12\n",
    "[sweep]\nB = [1, 2]\nstart = 1.0\n",
    "[strip]\nfloquet = \"random\"\n",
    "[strip]\nt0_cap = 1.5\n",
])
def test_schema_violations(tmp_path, extra):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, BASE + extra))


def test_missing_sections():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"domain": {"type": "disk"}})


def test_bad_field_is_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, '[domain]\ntype = "disk"\n[field]\nexpr = "-1"\n'))


def test_selftest_exit_zero(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    for name in ("M0-1", "M1", "M2-theta0/2", "M3-C1/2", "mu2/2-3C1*sqrt(theta0)"):
        assert name in out
    assert "FAIL" not in out


def test_selftest_detects_failure(monkeypatch):
    import magneto_spectra.cli as cli

    monkeypatch.setattr(cli, "degennes_identities", lambda c: {"M0-1": 1.0})
    monkeypatch.setitem(cli.DEGENNES_TOLERANCES, "M0-1", 1e-8)
    assert cli.main(["selftest"]) == 1


def test_sweep_fit_plot_pipeline(tmp_path):
    out = tmp_path / "o"
    assert main(["sweep", "--config", str(VAR), "--out", str(out), "--jobs", "1"]) == 0
    rows = (out / "sweep.csv").read_text().strip().splitlines()
    assert len(rows) == 6
    man = json.loads((out / "manifest-sweep.json").read_text())
    assert man["config"]["field"]["expr"] == "2 - x" and man["version"]
    assert main(["fit", "--config", str(VAR), "--out", str(out), "--csv", str(out / "sweep.csv")]) == 0
    fitdoc = json.loads((out / "fit.json").read_text())
    assert fitdoc["model"]["model"] == "two_term"
    assert main(["plot", "--csv", str(out / "sweep.csv")]) == 0
    root = ET.parse(out / "sweep.svg").getroot()
    assert root.tag.endswith("svg")
    assert (out / "sweep.dat").read_text().startswith("# B lambda1")


def test_sweep_bitwise_reproducible(tmp_path):
    for d in ("a", "b"):
        assert main(["sweep", "--config", str(CONST), "--out", str(tmp_path / d), "--jobs", "2"]) == 0
    assert (tmp_path / "a" / "sweep.csv").read_bytes() == (tmp_path / "b" / "sweep.csv").read_bytes()
    assert (tmp_path / "a" / "sweep.json").read_bytes() == (tmp_path / "b" / "sweep.json").read_bytes()


def test_triplet_export(tmp_path):
    from magneto_spectra.strip import read_triplets

    cfg = _write(tmp_path, BASE + "[sweep]\nB = [20, 40, 80, 160, 320]\n[strip]\nns = 16\nnt = 6\n")
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path), "--export-triplets"]) == 0
    K, M = read_triplets(tmp_path / "triplets_B20.txt")
    assert K.shape == (96, 96)


def test_predict_quasimode_agmon_hc3(tmp_path, capsys):
    assert main(["predict", "--config", str(VAR), "--out", str(tmp_path)]) == 0
    assert main(["quasimode", "--config", str(VAR), "--out", str(tmp_path), "--B", "100"]) == 0
    q = json.loads((tmp_path / "quasimode.json").read_text())
    assert q["rows"][0]["upper_bound_ok"] is True
    assert main(["agmon", "--config", str(VAR), "--out", str(tmp_path)]) == 0
    assert main(["hc3", "--config", str(VAR), "--out", str(tmp_path), "--formula-only"]) == 0
    assert (tmp_path / "hc3.csv").read_text().startswith("kappa,h_formula,h_root,gap")


def test_degennes(tmp_path, capsys):
    assert main(["degennes", "--out", str(tmp_path)]) == 0
    d = json.loads((tmp_path / "degennes.json").read_text())
    assert d["theta0"] == pytest.approx(0.5901061, abs=1e-7)


def test_exit_codes(tmp_path):
    assert main(["sweep", "--config", str(tmp_path / "missing.toml")]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["sweep"]) == 2
    bad = _write(tmp_path, BASE + "[sweep]\nB = [100, 100, 200, 400, 800]\n")
    assert main(["sweep", "--config", str(bad)]) == 2
    # hc3 on a degenerate field: the formula does not exist -> solver-level failure
    deg = _write(tmp_path, '[domain]\ntype = "disk"\n[field]\nexpr = "1"\n', "deg.toml")
    assert main(["hc3", "--config", str(deg), "--out", str(tmp_path)]) == 3


def test_solver_failure_exit_code(tmp_path, monkeypatch):
    import magneto_spectra.sweep as sw

    monkeypatch.setattr(sw, "_one", lambda problem, B, nev, fc:
                        sw.SweepRecord(B=float(B), error="SolverError: no convergence"))
    assert main(["sweep", "--config", str(CONST), "--out", str(tmp_path)]) == 3
    man = json.loads((tmp_path / "manifest-sweep.json").read_text())
    assert len(man["failures"]) == 5


def test_console_script_entry_point(tmp_path):
    env = dict(os.environ, MAGNETO_SPECTRA_JOBS="1")
    r = subprocess.run([sys.executable, "-m", "magneto_spectra.cli", "--version"],
                       capture_output=True, text=True, env=env)
    assert r.returncode == 0 and "magneto-spectra" in r.stdout
