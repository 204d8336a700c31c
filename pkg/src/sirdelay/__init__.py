"""Delayed SIR epidemic model with vaccination and treatment.

Simulation (method of steps, RK4 with Hermite dense output), equilibrium and
stability analysis, and a small workbench of scenarios and CLI drivers.
"""

from ._core import BACKEND
from .analysis import (basic_reproduction_number, contraction_constants, delay_ranges,
                       disease_free_equilibrium, endemic_equilibrium, full_report,
                       global_delay_independent, local_stability_dfe, local_stability_endemic,
                       rightmost_real_root)
from .dde import History, IntegratorConfig, Trajectory, integrate
from .errors import (AnalysisError, ConfigurationError, DomainError, NoEndemicEquilibrium,
                     NonConvergence, NumericalBlowup, RangeError, ScenarioError, SirDelayError)
from .functions import (DomainBox, IncidenceSpec, LipschitzBounds, TreatmentSpec,
                        VaccinationSpec, lipschitz_bounds)
from .model import DelaySpec, ModelParams, State, simulate, simulate_system

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AnalysisError", "ConfigurationError", "DelaySpec", "DomainBox", "DomainError",
    "History", "IncidenceSpec", "IntegratorConfig", "LipschitzBounds", "ModelParams",
    "NoEndemicEquilibrium", "NonConvergence", "NumericalBlowup", "RangeError", "ScenarioError",
    "SirDelayError", "State", "Trajectory", "TreatmentSpec", "VaccinationSpec",
    "basic_reproduction_number", "contraction_constants", "delay_ranges",
    "disease_free_equilibrium", "endemic_equilibrium", "full_report", "global_delay_independent",
    "integrate", "lipschitz_bounds", "local_stability_dfe", "local_stability_endemic",
    "rightmost_real_root", "simulate", "simulate_system",
]
