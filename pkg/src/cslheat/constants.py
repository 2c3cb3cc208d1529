from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 values, SI units."""

    hbar: float = 1.054571817e-34  # J s
    m0: float = 1.66053906660e-27  # kg, one atomic mass unit
    boltzmann: float = 1.380649e-23  # J/K, reporting only


CONSTANTS = PhysicalConstants()

HBAR = CONSTANTS.hbar
AMU = CONSTANTS.m0
