import json
import subprocess
import sys
from dataclasses import replace

import pytest

from sirdelay.workbench import get_builtin
from sirdelay.workbench.cli import main
from sirdelay.workbench.scenario import dump_scenario


def _config(tmp_path, name, **params):
    sc = get_builtin("tamilnadu")
    sc = replace(sc, params=sc.params.with_(**params))
    path = tmp_path / f"{name}.toml"
    path.write_text(dump_scenario(sc), encoding="utf-8")
    return str(path)


def test_scenarios_lists_three(capsys):
    assert main(["scenarios"]) == 0
    assert capsys.readouterr().out.split() == ["tamilnadu", "india", "usa"]


def test_analyze_india_compat(capsys):
    assert main(["analyze", "--scenario", "india", "--compat"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["r0"]["value"] == pytest.approx(11.4545, rel=1e-3)


def test_analyze_strict_mode_recorded(capsys):
    assert main(["analyze", "--scenario", "usa", "--strict-paper"]) == 0
    assert json.loads(capsys.readouterr().out)["delay_ranges"]["mode"] == "strict_paper"


@pytest.mark.parametrize("argv", [
    ["simulate", "--scenario", "usa", "--t-end", "-1"],
    ["simulate", "--scenario", "usa", "--eta", "-2"],
    ["simulate", "--scenario", "nowhere"],
    ["simulate", "--config", "/nonexistent/path.toml"],
    ["simulate", "--scenario", "usa", "--plot"],
    ["simulate", "--scenario", "usa", "--preset", "7"],
    ["sweep", "--scenario", "usa", "--axis", "kappa", "--grid", "1"],
    ["sweep", "--scenario", "usa", "--axis", "tau", "--grid", "1,x"],
    ["analyze"],
    ["frobnicate"],
])
def test_invalid_input_exit_2(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err


def test_numerical_failure_exit_3(tmp_path, capsys):
    path = _config(tmp_path, "blowup", a=1e306, b=1e10)
    assert main(["simulate", "--config", path, "--t-end", "50"]) == 3
    assert "numerical failure at t =" in capsys.readouterr().err
    assert main(["sweep", "--config", path, "--axis", "tau", "--grid", "1", "--t-end", "50"]) == 3
    out = capsys.readouterr().out
    assert "# error:" in out


def test_nonconvergence_exit_4(tmp_path, capsys):
    path = _config(tmp_path, "huge", a=1e15)
    out = tmp_path / "report.json"
    assert main(["analyze", "--config", path, "--out", str(out)]) == 4
    doc = json.loads(out.read_text())
    assert doc["endemic"]["failed"] is True
    assert "endemic_solver_nonconvergence" in doc["flags"]
    assert "did not converge" in capsys.readouterr().err


def test_simulate_writes_csv_and_plot(tmp_path):
    out = tmp_path / "run.csv"
    assert main(["simulate", "--scenario", "tamilnadu", "--preset", "1", "--t-end", "30",
                 "--out", str(out), "--plot"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,x,y,z" and len(lines) == 32
    gp = (tmp_path / "run.gp").read_text()
    assert "run.csv" in gp and "using 1:3" in gp


def test_sweep_cli(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--scenario", "tamilnadu", "--axis", "tau", "--grid", "1.5,1.9,6",
                 "--workers", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "value,peak_y,t_peak,final_y,final_z" and len(lines) == 4


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "sirdelay", "scenarios"], capture_output=True,
                         text=True)
    assert res.returncode == 0 and res.stdout.split() == ["tamilnadu", "india", "usa"]
    res = subprocess.run([sys.executable, "-m", "sirdelay", "simulate", "--scenario", "usa",
                          "--t-end", "-1"], capture_output=True, text=True)
    assert res.returncode == 2 and res.stdout == ""
