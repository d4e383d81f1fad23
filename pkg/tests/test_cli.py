import csv
import json

import numpy as np
import pytest
from click.testing import CliRunner

from esdlab import states
from esdlab.cli import main


@pytest.fixture
def run(tmp_path, monkeypatch):
    monkeypatch.setenv("ESDLAB_OUT_DIR", str(tmp_path))
    runner = CliRunner()

    def go(*args):
        return runner.invoke(main, list(args), catch_exceptions=False)

    go.dir = tmp_path
    return go


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_help_lists_commands(run):
    res = run("--help")
    for cmd in ("esd", "manipulate", "compare", "qutrit", "tomo", "optics"):
        assert cmd in res.output


def test_esd_double_not_report(run):
    res = run("esd", "--u", "0.2", "--v", "0.4", "--mode", "double-not")
    assert res.exit_code == 0
    assert "p0=0.5" in res.output and "pA=0.375" in res.output and "pB=0.166667" in res.output
    rows = read_csv(run.dir / "esd.csv")
    assert rows[0] == ["p_n", "p_end", "regime"]
    assert {r[2] for r in rows[1:]} == {"A", "D", "H"}


def test_esd_uninterrupted_table(run):
    res = run("esd", "--u", "0.2", "--v", "0.4", "--points", "11", "--out", "neg.csv")
    assert res.exit_code == 0 and "p0=0.5" in res.output
    rows = read_csv(run.dir / "neg.csv")
    assert len(rows) == 12
    assert float(rows[1][1]) == pytest.approx(0.4)
    assert float(rows[-1][1]) == 0.0


def test_manipulate_maps_luo_to_mode(run):
    a = run("manipulate", "--u", "0.2", "--v", "0.4", "--luo", "sx,i")
    b = run("esd", "--u", "0.2", "--v", "0.4", "--mode", "single-not")
    assert a.exit_code == 0
    assert a.output.splitlines()[:5] == b.output.splitlines()[:5]


def test_bad_input_exit_codes(run):
    assert run("esd", "--u", "0.2", "--v", "0.0", "--mode", "double-not").exit_code == 2
    assert run("esd", "--u", "0.2", "--v", "0.45").exit_code == 2
    assert run("manipulate", "--u", "0.2", "--v", "0.4", "--luo", "sx,f01").exit_code == 2
    assert run("esd", "--mode", "bogus").exit_code == 2
    assert run("tomo", "--state", "nonsense").exit_code == 2


def test_numeric_failure_exit_code(run, monkeypatch):
    from esdlab import tomography
    from esdlab.errors import ConvergenceError

    def boom(*a, **k):
        raise ConvergenceError("stalled")

    monkeypatch.setattr(tomography, "mle_fit", boom)
    res = run("tomo", "--noiseless")
    assert res.exit_code == 3 and "stalled" in res.output


def test_compare_table_and_optimum(run):
    res = run("compare", "--table", "3.1", "--optimize")
    assert res.exit_code == 0
    assert "0.4000 | 0.3666 | 0.7934 | 0.6343 | 26.68 | 20.66 | 36.57 | 6.02 | 15.91 | 9.89" in res.output
    assert "max dQNL = 8.61%" in res.output
    rows = read_csv(run.dir / "compare.csv")
    assert rows[0] == ["c0", "N", "LN", "EOF", "QN", "QL", "QE", "dQNL", "dQEL", "dQNE"]


def test_compare_qutrit_table(run):
    res = run("compare", "--table", "qutrit")
    assert res.exit_code == 0
    assert "89.81 | 79.20 | 75.69 | 10.61 | 14.12 | 3.51" in res.output
    assert run("compare", "--table", "3.2").exit_code == 2


def test_output_is_byte_identical(run):
    run("compare", "--grid", "21", "--out", "a.csv")
    run("compare", "--grid", "21", "--out", "b.csv", "--jobs", "3")
    assert (run.dir / "a.csv").read_bytes() == (run.dir / "b.csv").read_bytes()


def test_config_file(run, tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# reference state\nu = 0.2\nv = 0.4\nmode = single-not\n")
    res = run("esd", "--config", str(conf))
    assert res.exit_code == 0 and "pA=0.4" in res.output
    res = run("esd", "--config", str(conf), "--mode", "double-not")
    assert "pA=0.375" in res.output
    conf.write_text("colour = blue\n")
    assert run("esd", "--config", str(conf)).exit_code == 2


def test_tomo_noiseless_round_trip(run):
    res = run("tomo", "--state", "x:0.2,0.4", "--noiseless")
    assert res.exit_code == 0
    rep = json.loads((run.dir / "tomo_report.json").read_text())
    assert rep["fidelity_vs_target"] > 0.99999
    rho = states.DensityMatrix.from_dict(rep["density_matrix"])
    assert rho.mat[0, 3].real == pytest.approx(0.4, abs=1e-4)
    rows = read_csv(run.dir / "tomo_records.csv")
    assert rows[0] == ["arm1_qwp", "arm1_hwp", "arm2_qwp", "arm2_hwp", "counts", "duration_s"]
    assert len(rows) == 37


def test_tomo_decohered_corner(run):
    res = run("tomo", "--noiseless", "--decohere", "210:455")
    assert "corner=0.31515" in res.output


def test_tomo_seed_reproducible(run):
    run("tomo", "--seed", "3", "--records", "r1.csv", "--report", "j1.json")
    run("tomo", "--seed", "3", "--records", "r2.csv", "--report", "j2.json")
    assert (run.dir / "r1.csv").read_bytes() == (run.dir / "r2.csv").read_bytes()
    assert (run.dir / "j1.json").read_bytes() == (run.dir / "j2.json").read_bytes()


def test_optics(run):
    res = run("optics", "--out", "optics.json")
    assert res.exit_code == 0
    data = json.loads((run.dir / "optics.json").read_text())
    assert data["tau_c_fs"] == pytest.approx(455.94, abs=0.01)
    assert data["theta_pm_deg"] == pytest.approx(28.82, abs=0.01)
    assert np.isclose(data["corner"], 0.5 * np.exp(-210 / data["tau_c_fs"]))


def test_qutrit_nsd(run):
    res = run("qutrit")
    assert res.exit_code == 0 and "nsd=0.363636" in res.output
