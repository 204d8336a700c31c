import json
import math
from importlib import resources

import jsonschema
import numpy as np
import pytest

from sirdelay.dde import History
from sirdelay.errors import ScenarioError
from sirdelay.workbench import builtin_names, builtin_scenarios, get_builtin
from sirdelay.workbench.runs import (SWEEP_HEADER, SweepSpec, output_grid, run_analyze,
                                     run_simulate, run_sweep, summarize, sweep_csv)
from sirdelay.workbench.scenario import (dump_scenario, load_scenario, load_scenario_file,
                                         scenario_to_dict)
from sirdelay.model import simulate

SCHEMA = json.loads(resources.files("sirdelay.workbench").joinpath("report_schema.json")
                    .read_text(encoding="utf-8"))


def test_builtin_facts():
    assert builtin_names() == ["tamilnadu", "india", "usa"]
    assert get_builtin("tamilnadu").params.r == 0.1087
    assert get_builtin("india").initial.as_array().tolist() == [0.994, 0.0003813, 0.005569]
    assert get_builtin("usa").params.b1 == 0.462
    assert get_builtin("tamilnadu").incidence.kind == "mass_action"
    assert get_builtin("india").incidence.kind == "saturated_in_y"
    assert get_builtin("usa").incidence.kind == "saturated_in_x"
    assert all(sc.treatment.kind == "saturating" for sc in builtin_scenarios()[1:])
    with pytest.raises(ScenarioError):
        get_builtin("mars")


@pytest.mark.parametrize("sc", builtin_scenarios(), ids=lambda s: s.name)
def test_round_trip(sc):
    assert load_scenario(dump_scenario(sc)) == sc


@pytest.mark.parametrize("name", ["tamilnadu", "india", "usa"])
def test_shipped_config_equals_builtin(name):
    path = resources.files("sirdelay.workbench").joinpath(f"scenarios/{name}.toml")
    assert load_scenario_file(str(path)) == get_builtin(name)


def test_round_trip_with_tabulated_history():
    sc = get_builtin("tamilnadu").with_overrides(
        history=History.tabulated([-10.0, 0.0], [[290.0, 30.0, 50.0], [300.0, 35.0, 51.0]]))
    assert load_scenario(dump_scenario(sc)) == sc


def _doc():
    return dump_scenario(get_builtin("tamilnadu"))


def test_negative_delay_names_field():
    text = _doc().replace("eta = 5.0", "eta = -1.0")
    with pytest.raises(ScenarioError) as info:
        load_scenario(text)
    assert info.value.field == "delays"


def test_unknown_keys_rejected():
    with pytest.raises(ScenarioError) as info:
        load_scenario(_doc() + "\n[extras]\nfoo = 1\n")
    assert info.value.field == "extras"
    with pytest.raises(ScenarioError):
        load_scenario(_doc().replace("[delays]\n", "[delays]\nkappa = 1.0\n"))


def test_constant_kind_needs_flag():
    text = _doc().replace('[treatment]\nkind = "linear"', '[treatment]\nkind = "constant"\nk = 0.5')
    with pytest.raises(ScenarioError) as info:
        load_scenario(text)
    assert info.value.field == "treatment"
    ok = load_scenario(text.replace("allow_constant = false", "allow_constant = true"))
    assert ok.treatment.kind == "constant"


def test_parse_error_and_version():
    with pytest.raises(ScenarioError):
        load_scenario("name = ")
    with pytest.raises(ScenarioError) as info:
        load_scenario(_doc().replace("format_version = 1", "format_version = 2"))
    assert info.value.field == "format_version"


def test_t_end_must_be_positive():
    with pytest.raises(ScenarioError):
        get_builtin("usa").with_overrides(t_end=0.0)
    with pytest.raises(ScenarioError):
        load_scenario(_doc().replace("t_end = 500.0", "t_end = 0.0"))


def test_csv_schema_rows_and_determinism():
    sc = get_builtin("tamilnadu")
    a = run_simulate(sc)
    b = run_simulate(sc)
    assert a == b
    lines = a.splitlines()
    assert lines[0] == "t,x,y,z"
    assert len(lines) - 1 == math.floor(sc.t_end / 1.0) + 1
    y = np.array([float(l.split(",")[2]) for l in lines[1:]])
    assert np.all(np.diff(y[-100:]) < 0)
    half = run_simulate(sc, {"t_end": 10.0}, output_step=0.3)
    assert len(half.splitlines()) - 1 == math.floor(10.0 / 0.3) + 1
    with pytest.raises(ScenarioError):
        output_grid(10.0, 0.0)


def test_overrides_apply():
    sc = get_builtin("tamilnadu")
    moved = sc.with_overrides(eta=2.0, r=0.2, c=0.0, tau=None)
    assert moved.delays.eta == 2.0 and moved.delays.tau == sc.delays.tau
    assert moved.params.r == 0.2 and moved.params.c == 0.0
    with pytest.raises(ScenarioError):
        sc.with_overrides(delta=-0.1)


@pytest.mark.parametrize("sc", builtin_scenarios(), ids=lambda s: s.name)
def test_report_validates_against_schema(sc):
    for mode in ("full_dfe", "paper_compat"):
        text, complete = run_analyze(sc.with_overrides(dfe_mode=mode))
        doc = json.loads(text)
        jsonschema.validate(doc, SCHEMA)
        assert complete
        assert list(doc) == ["r0", "dfe", "endemic", "contraction", "local_dfe",
                             "local_endemic", "global_independent", "delay_ranges", "flags"]


def test_report_values():
    doc = json.loads(run_analyze(get_builtin("india").with_overrides(dfe_mode="paper_compat"))[0])
    assert doc["r0"]["value"] == pytest.approx(11.455, abs=1e-3)
    ex1 = json.loads(run_analyze(get_builtin("tamilnadu"))[0])
    cmp = ex1["delay_ranges"]["comparison"]
    assert cmp["ranges"]["tau"]["reference"] == [124.2974]
    assert cmp["ranges"]["eta"]["matches"] and not cmp["r0_matches"]
    from dataclasses import replace

    sc = get_builtin("tamilnadu")
    zero = json.loads(run_analyze(replace(sc, params=sc.params.with_(b1=0.0)))[0])
    assert zero["r0"]["value"] == 0.0


def test_report_deterministic():
    sc = get_builtin("usa")
    assert run_analyze(sc)[0] == run_analyze(sc)[0]


def test_sweep_tau_peaks_nondecreasing():
    rows = run_sweep(get_builtin("tamilnadu"), SweepSpec("tau", (1.5, 1.9, 6.0)), workers=3)
    peaks = [r.peak_y for r in rows]
    assert [r.value for r in rows] == [1.5, 1.9, 6.0]
    assert peaks == sorted(peaks)


def test_sweep_treatment_off_prevails():
    rows = run_sweep(get_builtin("usa"), SweepSpec("r", (0.0, 0.0686)))
    assert rows[0].final_y > rows[1].final_y


def test_singleton_sweep_matches_direct_run():
    sc = get_builtin("india").with_overrides(t_end=200.0)
    rows = run_sweep(sc, SweepSpec("eta", (0.5,)))
    assert len(rows) == 1
    csv = run_simulate(sc, {"eta": 0.5}).splitlines()[1:]
    vals = np.array([[float(v) for v in l.split(",")] for l in csv])
    k = int(np.argmax(vals[:, 2]))
    want = (vals[k, 2], vals[k, 0], vals[-1, 2], vals[-1, 3])
    got = (rows[0].peak_y, rows[0].t_peak, rows[0].final_y, rows[0].final_z)
    np.testing.assert_allclose(got, want, rtol=1e-8)


def test_sweep_rows_match_independent_runs_and_workers():
    sc = get_builtin("tamilnadu").with_overrides(t_end=100.0)
    spec = SweepSpec("delta", (0.0, 1.0, 3.0))
    serial = run_sweep(sc, spec)
    parallel = run_sweep(sc, spec, workers=3)
    assert sweep_csv(serial) == sweep_csv(parallel)
    for row in serial:
        traj = simulate(sc, delta=row.value)
        assert summarize(traj, sc.t_end) == (row.peak_y, row.t_peak, row.final_y, row.final_z)
    assert sweep_csv(serial).splitlines()[0] == SWEEP_HEADER


def test_sweep_error_rows_keep_columns():
    sc = get_builtin("tamilnadu").with_overrides(t_end=50.0)
    from dataclasses import replace

    bad = replace(sc, params=sc.params.with_(a=1e306, b=1e10))
    rows = run_sweep(bad, SweepSpec("tau", (1.0,)))
    assert rows[0].error
    line = sweep_csv(rows).splitlines()[1]
    assert line.startswith("1,nan,nan,nan,nan # error:")


def test_sweep_spec_validation():
    with pytest.raises(ScenarioError):
        SweepSpec("kappa", (1.0,))
    with pytest.raises(ScenarioError):
        SweepSpec("tau", ())
    with pytest.raises(ScenarioError):
        SweepSpec("tau", (-1.0,))


def test_scenario_to_dict_has_version():
    assert scenario_to_dict(get_builtin("usa"))["format_version"] == 1
