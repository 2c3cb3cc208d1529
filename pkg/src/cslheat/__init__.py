"""Collapse-noise heating of crystals: rates, temperature profiles and
stochastic verification engines."""

__version__ = "0.1.0"

from .constants import CONSTANTS, PhysicalConstants
from .materials import Material, builtin_material, debye_frequency
from .noise import CslParams, NoiseSpectrum, ProbeGrid, synthesize_white_path
from .heating import HeatingRate, energy_growth_white, rate_nonwhite, rate_white
from .diffusion import Geometry, TemperatureProfile, core_temperature, profile, profile_sphere

__all__ = [
    "CONSTANTS",
    "PhysicalConstants",
    "Material",
    "builtin_material",
    "debye_frequency",
    "CslParams",
    "NoiseSpectrum",
    "ProbeGrid",
    "synthesize_white_path",
    "HeatingRate",
    "rate_white",
    "rate_nonwhite",
    "energy_growth_white",
    "Geometry",
    "TemperatureProfile",
    "profile",
    "profile_sphere",
    "core_temperature",
]
