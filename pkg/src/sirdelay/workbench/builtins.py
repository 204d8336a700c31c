"""The three published COVID-19 parameter studies as ready-made scenarios."""

from __future__ import annotations

from ..functions import DomainBox, IncidenceSpec, TreatmentSpec, VaccinationSpec
from ..model import DelaySpec, ModelParams, State
from .scenario import Scenario

# (eta, tau, delta) triples shown in the figure captions, first one is the default
DELAY_PRESETS = {
    "tamilnadu": ((5.0, 1.5, 1.2), (7.5, 1.9, 5.0), (9.0, 6.0, 9.0)),
    "india": ((0.5, 0.5, 0.5), (0.5, 5.0, 7.0), (2.0, 6.0, 15.0)),
    "usa": ((0.5, 0.5, 0.5), (0.7, 7.0, 10.0), (0.8, 10.0, 12.0)),
}

# (r, c) pairs from the rate-variation figures
RATE_PRESETS = {
    "tamilnadu": ((0.1087, 0.0109), (0.002087, 0.001090), (0.1870, 0.9)),
    "india": ((0.0686, 0.02), (0.1, 0.02), (0.0686, 0.0514)),
    "usa": ((0.0686, 0.01), (0.0686, 0.0), (0.0, 0.01)),
}

_LINEAR_V = VaccinationSpec("linear")

# Analysis boxes cover the default-preset trajectory apart from the decaying
# tail of y; the first one is the documented box of the first study.


def _tamilnadu() -> Scenario:
    return Scenario(
        name="tamilnadu",
        params=ModelParams(a=5.0, b=0.0012, c=0.0109, d=0.065, b1=0.0012, r=0.1087,
                           d1=0.0006, alpha=0.0017),
        incidence=IncidenceSpec("mass_action"),
        vaccination=_LINEAR_V,
        treatment=TreatmentSpec("linear"),
        delays=DelaySpec(*DELAY_PRESETS["tamilnadu"][0]),
        initial=State(300.0, 35.0, 51.0),
        box=DomainBox(1.0, 300.0, 1.0, 50.0),
        t_end=500.0,
        reference={"r0": 0.8344, "eta": (13.6841,), "tau": (124.2974,), "delta": (0.050,)},
    )


def _india() -> Scenario:
    return Scenario(
        name="india",
        params=ModelParams(a=0.00004893, b=0.4, c=0.02, d=0.00001992, b1=0.32, r=0.0686,
                           d1=0.00002021, alpha=0.00017),
        incidence=IncidenceSpec("saturated_in_y", a_sat=1.0),
        vaccination=_LINEAR_V,
        treatment=TreatmentSpec("saturating", a_sat=1.0),
        delays=DelaySpec(*DELAY_PRESETS["india"][0]),
        initial=State(0.994, 0.0003813, 0.005569),
        box=DomainBox(0.004, 1.0, 0.0001, 0.1),
        t_end=1000.0,
        reference={"r0": 11.4545, "eta": (11.9066,), "tau": (0.6252,), "delta": (3.0016,)},
    )


def _usa() -> Scenario:
    return Scenario(
        name="usa",
        params=ModelParams(a=0.000031785, b=0.5, c=0.01, d=0.00002377, b1=0.462, r=0.0686,
                           d1=0.00002585, alpha=0.00017),
        incidence=IncidenceSpec("saturated_in_x", b_sat=1.0),
        vaccination=_LINEAR_V,
        treatment=TreatmentSpec("saturating", a_sat=1.0),
        delays=DelaySpec(*DELAY_PRESETS["usa"][0]),
        initial=State(0.97286, 0.00905, 0.01809),
        box=DomainBox(0.004, 1.0, 0.0001, 0.4),
        t_end=1000.0,
        # the printed eta bound "0.8.2307" is malformed; both readings are kept
        reference={"r0": 3.8517, "eta": (0.82307, 8.2307), "tau": (0.1646,), "delta": (1.0446,)},
    )


_BUILDERS = {"tamilnadu": _tamilnadu, "india": _india, "usa": _usa}


def builtin_names() -> list[str]:
    return list(_BUILDERS)


def builtin_scenarios() -> list[Scenario]:
    return [build() for build in _BUILDERS.values()]


def get_builtin(name: str) -> Scenario:
    from ..errors import ScenarioError

    try:
        return _BUILDERS[name]()
    except KeyError:
        raise ScenarioError(f"unknown scenario {name!r}; choose from {builtin_names()}",
                            "scenario") from None
