"""Verification engines: lattice Monte Carlo, second-cumulant master
equation on small systems, and Stratonovich/Ito conversion."""

from .sde import LinearSde, ito_to_strat, strat_to_ito
from .montecarlo import McConfig, McResult, discrete_oracle, mc_energy_growth, oracle_convergence
from .cumulant import (
    ExponentialNoise,
    SmallSystem,
    WhiteNoise,
    cumulant_gap_scan,
    evolve_master_second_cumulant,
    evolve_trajectories,
    trace_distance,
)

__all__ = [
    "LinearSde",
    "strat_to_ito",
    "ito_to_strat",
    "McConfig",
    "McResult",
    "mc_energy_growth",
    "discrete_oracle",
    "oracle_convergence",
    "SmallSystem",
    "WhiteNoise",
    "ExponentialNoise",
    "cumulant_gap_scan",
    "evolve_master_second_cumulant",
    "evolve_trajectories",
    "trace_distance",
]
