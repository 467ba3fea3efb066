"""Radial cavitation in compressible nonlinear elasticity.

Punctured-ball equilibria by shooting, a gradient-flow predictor, the
critical boundary displacement and the incompressible limit.
"""

from .energy import EnergyReport, RadialField, energy_report, graded_mesh, modified_energy
from .errors import (BracketError, CavitationError, ConfigError, NumericalError,
                     StagnationError, StepSizeError, StrainDomainError)
from .material import (LawKind, MaterialLaw, VolumetricLaw, penalty_material,
                       power_law_material, stress_free_D)
from .solver import (CriticalResult, SolutionBundle, critical_lambda, eps_sweep,
                     gradient_flow_minimize, incompressible_energy, incompressible_profile,
                     shoot_punctured, solve_punctured)

__version__ = "0.1.0"

__all__ = [
    "BracketError", "CavitationError", "ConfigError", "CriticalResult", "EnergyReport",
    "LawKind", "MaterialLaw", "NumericalError", "RadialField", "SolutionBundle",
    "StagnationError", "StepSizeError", "StrainDomainError", "VolumetricLaw",
    "critical_lambda", "energy_report", "eps_sweep", "gradient_flow_minimize",
    "graded_mesh", "incompressible_energy", "incompressible_profile", "modified_energy",
    "penalty_material", "power_law_material", "shoot_punctured", "solve_punctured",
    "stress_free_D",
]
