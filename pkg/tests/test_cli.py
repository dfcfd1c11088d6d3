import json
import os
import subprocess
import sys

import pytest

from dpgfiber import cli


def _run(args, cwd=None):
    return subprocess.run([sys.executable, "-m", "dpgfiber.cli"] + args,
                          capture_output=True, text=True, cwd=cwd)


def test_version_flag():
    out = _run(["--version"])
    assert out.returncode == 0
    assert "dpgfiber" in out.stdout


def test_print_defaults_roundtrips_through_configparser(tmp_path):
    out = _run(["--print-defaults"])
    assert out.returncode == 0
    path = tmp_path / "defaults.ini"
    path.write_text(out.stdout)
    cfg = cli.load_config(str(path))
    assert cfg == cli.default_config()


def test_missing_config_names_path():
    out = _run(["run", "/no/such/config.ini"])
    assert out.returncode == 1
    assert "/no/such/config.ini" in out.stderr


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[run]\nstudy = oracle_only\nbogus_key = 1\n")
    with pytest.raises(KeyError):
        cli.load_config(str(path))
    out = _run(["run", str(path)])
    assert out.returncode == 1
    assert "bogus_key" in out.stderr


def test_unknown_study_rejected(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[run]\nstudy = warp_drive\n")
    out = _run(["run", str(path)])
    assert out.returncode == 1
    assert "warp_drive" in out.stderr


def _oracle_ini(tmp_path, outname):
    path = tmp_path / "oracle.ini"
    path.write_text(f"""[run]
study = oracle_only
output_dir = {tmp_path / outname}

[oracle]
g_over_a = 2.0
p_pump = 5.0
p_signal = 0.5
steps = 100
""")
    return path


def test_oracle_run_writes_artifacts(tmp_path):
    path = _oracle_ini(tmp_path, "out")
    assert cli.main(["run", str(path)]) == 0
    outdir = tmp_path / "out"
    assert (outdir / "power.csv").is_file()
    manifest = json.loads((outdir / "run.json").read_text())
    assert manifest["study"] == "oracle_only"
    assert manifest["summary"]["photon_flux_drift"] < 1e-8
    assert manifest["summary"]["closed_form_deviation"] < 1e-6
    lines = (outdir / "power.csv").read_text().strip().split("\n")
    assert len(lines) == 102  # header + 101 stations


def test_runs_are_deterministic(tmp_path):
    p1 = _oracle_ini(tmp_path, "out1")
    cli.main(["run", str(p1)])
    csv1 = (tmp_path / "out1" / "power.csv").read_bytes()
    p2 = _oracle_ini(tmp_path, "out2")
    cli.main(["run", str(p2)])
    csv2 = (tmp_path / "out2" / "power.csv").read_bytes()
    assert csv1 == csv2


def test_mms_study_row_count(tmp_path):
    path = tmp_path / "mms.ini"
    path.write_text(f"""[run]
study = mms
output_dir = {tmp_path / "out"}

[mms]
p_values = (1,)
levels = 2
""")
    assert cli.main(["run", str(path)]) == 0
    lines = (tmp_path / "out" / "convergence.csv").read_text().strip()
    rows = lines.split("\n")
    assert rows[0].startswith("p,level")
    assert len(rows) == 3
    manifest = json.loads((tmp_path / "out" / "run.json").read_text())
    assert "1" in manifest["summary"]["slopes"]
