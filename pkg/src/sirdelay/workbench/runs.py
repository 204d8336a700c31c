"""Simulation, analysis and sweep drivers producing text artifacts."""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..analysis import full_report, report_to_dict
from ..errors import NumericalBlowup, ScenarioError, SirDelayError
from ..model import simulate
from .scenario import Scenario

SWEEP_AXES = ("eta", "tau", "delta", "r", "c")
SWEEP_HEADER = "value,peak_y,t_peak,final_y,final_z"
CSV_HEADER = "t,x,y,z"


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def output_grid(t_end: float, step: float = 1.0) -> np.ndarray:
    if not (step > 0 and math.isfinite(step)):
        raise ScenarioError(f"output step must be positive, got {step}", "output_step")
    n = int(math.floor(t_end / step + 1e-9))
    return np.arange(n + 1) * step


def trajectory_csv(traj, t_end: float, step: float = 1.0) -> str:
    times = output_grid(t_end, step)
    values = traj.sample(times)
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for t, row in zip(times, values):
        buf.write(",".join(_fmt(v) for v in (t, *row)) + "\n")
    return buf.getvalue()


def plot_script(csv_name: str, title: str) -> str:
    """gnuplot commands rendering x, y, z against t from ``csv_name``."""
    return "\n".join([
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{title}'",
        "set xlabel 't (days)'",
        "set ylabel 'population'",
        "set grid",
        f"plot '{csv_name}' using 1:2 with lines title 'x (susceptible)', \\",
        f"     '{csv_name}' using 1:3 with lines title 'y (infected)', \\",
        f"     '{csv_name}' using 1:4 with lines title 'z (recovered)'",
        "pause mouse close",
        "",
    ])


def run_simulate(scenario: Scenario, overrides: dict | None = None,
                 output_step: float = 1.0) -> str:
    """Trajectory CSV of the (overridden) scenario on a uniform output grid."""
    sc = scenario.with_overrides(**(overrides or {}))
    traj = simulate(sc)
    return trajectory_csv(traj, sc.t_end, output_step)


def run_analyze(scenario: Scenario) -> tuple[str, bool]:
    """JSON report text and whether every section completed."""
    rep = full_report(scenario)
    doc = report_to_dict(rep)
    return json.dumps(doc, indent=2, allow_nan=False) + "\n", not rep.failed_sections


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    grid: tuple[float, ...]

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ScenarioError(f"sweep axis must be one of {SWEEP_AXES}", "axis")
        if not self.grid:
            raise ScenarioError("sweep grid is empty", "grid")
        for v in self.grid:
            if not (math.isfinite(v) and v >= 0):
                raise ScenarioError(f"sweep values must be finite and >= 0, got {v}", "grid")


@dataclass(frozen=True)
class SweepRow:
    value: float
    peak_y: float
    t_peak: float
    final_y: float
    final_z: float
    error: str | None = None

    def csv(self) -> str:
        if self.error is not None:
            return f"{_fmt(self.value)},nan,nan,nan,nan # error: {self.error}"
        return ",".join(_fmt(v) for v in
                        (self.value, self.peak_y, self.t_peak, self.final_y, self.final_z))


def summarize(traj, t_end: float, step: float = 1.0):
    """(peak_y, t_peak, final_y, final_z) on the output grid."""
    times = output_grid(t_end, step)
    vals = traj.sample(times)
    k = int(np.argmax(vals[:, 1]))
    return float(vals[k, 1]), float(times[k]), float(vals[-1, 1]), float(vals[-1, 2])


def _sweep_one(scenario, axis, value, step):
    try:
        sc = scenario.with_overrides(**{axis: value})
        traj = simulate(sc)
    except (NumericalBlowup, SirDelayError) as exc:
        return SweepRow(value, math.nan, math.nan, math.nan, math.nan, str(exc).replace("\n", " "))
    return SweepRow(value, *summarize(traj, sc.t_end, step))


def run_sweep(scenario: Scenario, sweep: SweepSpec, workers: int = 1,
              output_step: float = 1.0) -> list[SweepRow]:
    """One simulation per grid value; rows keep grid order."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda v: _sweep_one(scenario, sweep.axis, v, output_step),
                                 sweep.grid))
    return [_sweep_one(scenario, sweep.axis, v, output_step) for v in sweep.grid]


def sweep_csv(rows: list[SweepRow]) -> str:
    return SWEEP_HEADER + "\n" + "".join(r.csv() + "\n" for r in rows)
