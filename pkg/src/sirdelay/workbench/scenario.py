"""Scenarios: a complete parameterization of one model run plus its analysis box.

Config files are TOML.  Layout (``format_version = 1``)::

    format_version = 1
    name = "tamilnadu"
    t_end = 500.0
    dfe_mode = "full_dfe"            # or "paper_compat"
    theorem_mode = "derivation"      # or "strict_paper"
    allow_constant = false           # permit constant v or p

    [params]      a, b, c, d, b1, r, d1, alpha
    [incidence]   kind = "mass_action" | "power" (c, p, q) | "saturated_in_x" (b)
                  | "saturated_in_y" (a)
    [vaccination] kind = "constant" (k) | "linear" | "saturating" (a) | "hyperbolic_sine"
    [treatment]   same kinds as vaccination plus "hyperbolic_tangent"
    [delays]      eta, tau, delta
    [initial]     x, y, z
    [history]     optional; kind = "constant" (x, y, z) or "tabulated" (t, x, y, z arrays)
    [integrator]  optional; h, depth, max_steps
    [box]         x_min, x_max, y_min, y_max
    [reference]   optional published values: r0, eta, tau, delta (lists of candidates)

Every table is closed: unknown keys are rejected.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields, replace

from ..dde import History, IntegratorConfig
from ..errors import ConfigurationError, DomainError, ScenarioError
from ..functions import DomainBox, IncidenceSpec, TreatmentSpec, VaccinationSpec
from ..model import DelaySpec, ModelParams, State

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

FORMAT_VERSION = 1
DELAY_FIELDS = ("eta", "tau", "delta")
RATE_FIELDS = ("r", "c")


@dataclass(frozen=True)
class Scenario:
    name: str
    params: ModelParams
    incidence: IncidenceSpec
    vaccination: VaccinationSpec
    treatment: TreatmentSpec
    delays: DelaySpec
    initial: State
    box: DomainBox
    t_end: float
    history: History | None = None
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    dfe_mode: str = "full_dfe"
    theorem_mode: str = "derivation"
    allow_constant: bool = False
    reference: dict | None = field(default=None, compare=True)

    def __post_init__(self):
        if not self.name:
            raise ScenarioError("scenario needs a name", "name")
        if not (isinstance(self.t_end, (int, float)) and math.isfinite(self.t_end) and self.t_end > 0):
            raise ScenarioError(f"t_end must be positive, got {self.t_end}", "t_end")
        if self.dfe_mode not in ("full_dfe", "paper_compat"):
            raise ScenarioError(f"unknown dfe_mode {self.dfe_mode!r}", "dfe_mode")
        if self.theorem_mode not in ("derivation", "strict_paper"):
            raise ScenarioError(f"unknown theorem_mode {self.theorem_mode!r}", "theorem_mode")
        if not self.initial.nonnegative:
            raise ScenarioError("initial state must be nonnegative", "initial")
        if self.history is not None:
            if self.history.dim != 3:
                raise ScenarioError("history must be three-dimensional", "history")
            if self.history.mode == "constant" and any(v < 0 for v in self.history.values):
                raise ScenarioError("history must be nonnegative", "history")
        for spec in (self.vaccination, self.treatment):
            if not spec.conforming and not self.allow_constant:
                raise ScenarioError(
                    f"constant {spec.LABEL} needs allow_constant = true", spec.LABEL)

    def with_overrides(self, **overrides) -> "Scenario":
        """Replace delays (eta, tau, delta), rates (r, c), t_end or modes."""
        delays, rates, top = {}, {}, {}
        for key, value in overrides.items():
            if value is None:
                continue
            if key in DELAY_FIELDS:
                delays[key] = float(value)
            elif key in RATE_FIELDS:
                rates[key] = float(value)
            elif key in ("t_end", "dfe_mode", "theorem_mode", "name", "integrator", "history"):
                top[key] = value
            else:
                raise ScenarioError(f"cannot override {key!r}", key)
        try:
            if delays:
                top["delays"] = replace(self.delays, **delays)
            if rates:
                top["params"] = self.params.with_(**rates)
        except DomainError as exc:
            raise ScenarioError(str(exc), next(iter(delays or rates))) from None
        return replace(self, **top)


def _table(doc, key, required=True):
    if key not in doc:
        if required:
            raise ScenarioError(f"missing table [{key}]", key)
        return None
    value = doc[key]
    if not isinstance(value, dict):
        raise ScenarioError(f"{key} must be a table", key)
    return value


def _numbers(table, label, names, optional=()):
    unknown = set(table) - set(names) - set(optional)
    if unknown:
        raise ScenarioError(f"unknown key(s) in [{label}]: {sorted(unknown)}",
                            f"{label}.{sorted(unknown)[0]}")
    out = {}
    for name in names:
        if name not in table:
            raise ScenarioError(f"missing key {label}.{name}", f"{label}.{name}")
    for name in list(names) + [o for o in optional if o in table]:
        value = table[name]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError(f"{label}.{name} must be a number", f"{label}.{name}")
        out[name] = float(value)
    return out


def _wrap(label, build):
    try:
        return build()
    except (DomainError, ConfigurationError) as exc:
        raise ScenarioError(f"[{label}] {exc}", label) from None


TOP_KEYS = {"format_version", "name", "t_end", "dfe_mode", "theorem_mode", "allow_constant",
            "params", "incidence", "vaccination", "treatment", "delays", "initial", "history",
            "integrator", "box", "reference"}


def scenario_from_dict(doc: dict) -> Scenario:
    unknown = set(doc) - TOP_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise ScenarioError(f"unknown key {key!r}", key)
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ScenarioError(f"format_version must be {FORMAT_VERSION}, got {version!r}",
                            "format_version")
    allow_constant = doc.get("allow_constant", False)
    if not isinstance(allow_constant, bool):
        raise ScenarioError("allow_constant must be a boolean", "allow_constant")

    p = _numbers(_table(doc, "params"), "params", [f.name for f in fields(ModelParams)])
    params = _wrap("params", lambda: ModelParams(**p))
    inc = _wrap("incidence", lambda: IncidenceSpec.from_record(_table(doc, "incidence")))
    vac = _wrap("vaccination", lambda: VaccinationSpec.from_record(
        _table(doc, "vaccination"), allow_constant=allow_constant))
    trt = _wrap("treatment", lambda: TreatmentSpec.from_record(
        _table(doc, "treatment"), allow_constant=allow_constant))
    dl = _numbers(_table(doc, "delays"), "delays", DELAY_FIELDS)
    delays = _wrap("delays", lambda: DelaySpec(**dl))
    ini = _numbers(_table(doc, "initial"), "initial", ("x", "y", "z"))
    initial = _wrap("initial", lambda: State(**ini))
    bx = _numbers(_table(doc, "box"), "box", ("x_min", "x_max", "y_min", "y_max"))
    box = _wrap("box", lambda: DomainBox(**bx))

    history = None
    hist = _table(doc, "history", required=False)
    if hist is not None:
        history = _parse_history(hist)
    integ = _table(doc, "integrator", required=False)
    if integ is not None:
        ic = _numbers(integ, "integrator", (), ("h", "depth", "max_steps"))
        for key in ("depth", "max_steps"):
            if key in ic:
                if ic[key] != int(ic[key]):
                    raise ScenarioError(f"integrator.{key} must be an integer", f"integrator.{key}")
                ic[key] = int(ic[key])
        integrator = _wrap("integrator", lambda: IntegratorConfig(**ic))
    else:
        integrator = IntegratorConfig()

    reference = None
    ref = _table(doc, "reference", required=False)
    if ref is not None:
        reference = _parse_reference(ref)

    name = doc.get("name")
    if not isinstance(name, str):
        raise ScenarioError("name must be a string", "name")
    t_end = doc.get("t_end")
    if isinstance(t_end, bool) or not isinstance(t_end, (int, float)):
        raise ScenarioError("t_end must be a number", "t_end")
    return Scenario(
        name=name, params=params, incidence=inc, vaccination=vac, treatment=trt,
        delays=delays, initial=initial, box=box, t_end=float(t_end), history=history,
        integrator=integrator, dfe_mode=doc.get("dfe_mode", "full_dfe"),
        theorem_mode=doc.get("theorem_mode", "derivation"), allow_constant=allow_constant,
        reference=reference)


def _parse_history(hist):
    kind = hist.get("kind")
    if kind == "constant":
        vals = _numbers({k: v for k, v in hist.items() if k != "kind"}, "history", ("x", "y", "z"))
        return _wrap("history", lambda: History.constant([vals["x"], vals["y"], vals["z"]]))
    if kind == "tabulated":
        unknown = set(hist) - {"kind", "t", "x", "y", "z"}
        if unknown:
            raise ScenarioError(f"unknown key(s) in [history]: {sorted(unknown)}", "history")
        cols = []
        for key in ("t", "x", "y", "z"):
            col = hist.get(key)
            if not isinstance(col, list) or not all(
                    isinstance(v, (int, float)) and not isinstance(v, bool) for v in col):
                raise ScenarioError(f"history.{key} must be a list of numbers", f"history.{key}")
            cols.append([float(v) for v in col])
        if len({len(c) for c in cols}) != 1:
            raise ScenarioError("history columns must have equal length", "history")
        t, x, y, z = cols
        return _wrap("history", lambda: History.tabulated(t, list(zip(x, y, z))))
    raise ScenarioError(f"history.kind must be 'constant' or 'tabulated', got {kind!r}",
                        "history.kind")


def _parse_reference(ref):
    out = {}
    for key, value in ref.items():
        if key == "r0":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ScenarioError("reference.r0 must be a number", "reference.r0")
            out["r0"] = float(value)
        elif key in DELAY_FIELDS:
            if not isinstance(value, list) or not value or not all(
                    isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
                raise ScenarioError(f"reference.{key} must be a list of numbers",
                                    f"reference.{key}")
            out[key] = tuple(float(v) for v in value)
        else:
            raise ScenarioError(f"unknown key in [reference]: {key!r}", f"reference.{key}")
    return out


def load_scenario(text: str) -> Scenario:
    """Parse and validate a TOML scenario document."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"config parse error: {exc}", "document") from None
    return scenario_from_dict(doc)


def load_scenario_file(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return load_scenario(fh.read())


def scenario_to_dict(sc: Scenario) -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "name": sc.name,
        "t_end": float(sc.t_end),
        "dfe_mode": sc.dfe_mode,
        "theorem_mode": sc.theorem_mode,
        "allow_constant": sc.allow_constant,
        "params": {f.name: getattr(sc.params, f.name) for f in fields(ModelParams)},
        "incidence": sc.incidence.to_record(),
        "vaccination": sc.vaccination.to_record(),
        "treatment": sc.treatment.to_record(),
        "delays": {k: getattr(sc.delays, k) for k in DELAY_FIELDS},
        "initial": {"x": sc.initial.x, "y": sc.initial.y, "z": sc.initial.z},
        "box": {k: getattr(sc.box, k) for k in ("x_min", "x_max", "y_min", "y_max")},
        "integrator": {"h": sc.integrator.h, "depth": sc.integrator.depth,
                       "max_steps": sc.integrator.max_steps},
    }
    if sc.history is not None:
        h = sc.history
        if h.mode == "constant":
            doc["history"] = {"kind": "constant", "x": float(h.values[0]),
                              "y": float(h.values[1]), "z": float(h.values[2])}
        else:
            doc["history"] = {"kind": "tabulated", "t": [float(v) for v in h.times]}
            for i, key in enumerate("xyz"):
                doc["history"][key] = [float(v) for v in h.values[:, i]]
    if sc.reference:
        doc["reference"] = {k: (list(v) if isinstance(v, tuple) else v)
                            for k, v in sc.reference.items()}
    return doc


def dump_scenario(sc: Scenario) -> str:
    """TOML text that ``load_scenario`` maps back to an equal Scenario."""
    return tomli_w.dumps(scenario_to_dict(sc))
