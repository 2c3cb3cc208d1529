"""Monte-Carlo check of the white-noise heating rate on a finite crystal.

Each mode ``(k, s)`` of the linearised dynamics is driven additively, so the
solution is a closed-form stochastic integral.  Writing the mode energy as
``|beta_ks|^2`` with ``beta_ks = sqrt(hbar omega) * (a_ks(t) - exp(-i omega t) a_ks(0))``,::

    beta_ks(t) = sum_j g_ks,j  int_0^t exp(i omega_k t') dW_j(t')
    g_ks,j     = w exp(-r_c^2 q_j^2 / 2) (M/m0) hbar / sqrt(2 N M) (q_j . eps_ks) S(q_j + k)

with ``S(q) = sum_i exp(-i q . R_i)`` and ``w`` the probe-cell weight.  The
vacuum initial state contributes nothing to the normal-ordered energy.
``g`` stays finite as ``omega -> 0``; the three ``k = 0`` entries are the
rigid-translation (centre-of-mass kinetic energy) channel, which dominates
when the crystal is much smaller than ``r_c``.

The stochastic integral is discretised with the increment over each step
weighted by the phase at the step midpoint.  Because the increments are
independent with ``E|dW_j|^2 = gamma dt / w``, the ensemble slope of the
discretised model is exactly::

    sum_ks sum_j |g_ks,j|^2 gamma / w

which is the deterministic oracle.  Summing over the full Born-von Karman
grid gives ``sum_k |S(q + k)|^2 = N^2``, so the oracle equals the probe-grid
Riemann sum of the continuum integrand and tends to
``3 hbar^2 lambda M_tot / (4 m0^2 r_c^2)`` as the probe grid is refined.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..constants import AMU, HBAR
from ..errors import DomainError
from ..heating import MC_ESTIMATE, HeatingRate, energy_growth_white
from ..lattice import build_grid
from ..noise import ProbeGrid, _draw_path, white_increment_variance


@dataclass(frozen=True)
class McConfig:
    L: int = 4
    probe_extent: float = 4.0  # half-width of the probe cube in units of 1/r_c
    probe_points: int = 9  # per axis
    dt: float = None  # default 0.05 / max(omega)
    steps: int = 40
    trajectories: int = 1000
    seed: int = 0
    lattice_param: float = None  # override the material's value (model crystal)
    checkpoints: int = 10
    chunk: int = 64

    def __post_init__(self):
        if self.trajectories < 2:
            raise DomainError("trajectories must be >= 2")
        if self.steps < 2:
            raise DomainError("steps must be >= 2")
        if self.probe_extent <= 0:
            raise DomainError("probe_extent must be > 0")


class ModelViolationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class McResult:
    times: np.ndarray = field(repr=False)
    mean_energy: np.ndarray = field(repr=False)
    stderr_energy: np.ndarray = field(repr=False)
    slope: float  # W
    stderr: float  # W
    discrete_oracle: float  # W
    phonon_oracle: float  # W, k != 0 part of the oracle
    translation_oracle: float  # W, k = 0 part
    continuum_rate: float  # W, white-noise closed form for the same crystal mass
    chi2: float
    dof: int
    p_value: float
    model_violation: bool
    total_mass: float
    volume: float

    def as_heating_rate(self):
        return HeatingRate(q_dot=self.slope / self.volume, total_power_per_mass=self.slope / self.total_mass,
                           method=MC_ESTIMATE, error_estimate=self.stderr / self.volume)


def _setup(cfg, params, mat):
    if cfg.lattice_param is not None:
        mat = mat.with_overrides(lattice_param=cfg.lattice_param)
    grid = build_grid(cfg.L, mat)
    extent = cfg.probe_extent / params.r_c
    probe = ProbeGrid.cubic(extent, cfg.probe_points)
    M = mat.cell_mass
    N = grid.n_cells
    q = probe.points
    # (n_k, n_probe) lattice sums S(q + k)
    S = np.stack([grid.lattice_sum(q + k) for k in grid.k_points])
    qe = np.einsum("jc,kbc->kbj", q, grid.polarization)  # (n_k, 3, n_probe)
    envelope = probe.weight * np.exp(-0.5 * params.r_c**2 * np.sum(q * q, axis=1))
    amp = (M / AMU) * HBAR / math.sqrt(2.0 * N * M)
    G = amp * qe * (S * envelope)[:, None, :]  # (n_k, 3, n_probe)
    omega = np.repeat(grid.omega, 3)
    return grid, probe, G.reshape(-1, len(probe)), omega, mat


def discrete_oracle(cfg, params, mat):
    """Exact ensemble slope of the discretised model, split into phonon and translation parts."""
    grid, probe, G, omega, _ = _setup(cfg, params, mat)
    rate = np.sum(np.abs(G) ** 2, axis=1) * params.gamma / probe.weight
    translation = float(np.sum(rate[omega == 0.0]))
    phonon = float(np.sum(rate[omega > 0.0]))
    return phonon + translation, phonon, translation


def _trajectory_rng(seed, index):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _linearity(times, energies, checkpoints):
    """Generalised least squares through the origin on a subset of times."""
    n_traj = energies.shape[0]
    idx = np.unique(np.linspace(0, len(times) - 1, min(checkpoints, len(times))).round().astype(int))
    t = times[idx]
    e = energies[:, idx]
    scale = np.max(np.abs(e))
    if scale == 0.0:
        return 0.0, len(idx) - 1, 1.0
    e = e / scale
    mean = e.mean(axis=0)
    cov = np.cov(e, rowvar=False) / n_traj
    cinv = np.linalg.pinv(cov)
    slope = (t @ cinv @ mean) / (t @ cinv @ t)
    r = mean - slope * t
    chi2 = float(r @ cinv @ r)
    dof = len(idx) - 1
    return chi2, dof, float(stats.chi2.sf(chi2, dof))


def mc_energy_growth(cfg, params, mat):
    """Simulate ``cfg.trajectories`` noise realisations and fit the energy slope.

    Returns an :class:`McResult`; ``slope``, ``stderr`` and
    ``discrete_oracle`` are in watts for the whole model crystal.
    """
    grid, probe, G, omega, mat = _setup(cfg, params, mat)
    w_max = float(np.max(omega))
    dt = cfg.dt if cfg.dt is not None else 0.05 / w_max
    if dt * w_max >= 0.1:
        raise DomainError(f"dt * max(omega) = {dt * w_max:.3g} violates the 0.1 resolution guard")
    steps = cfg.steps
    times = dt * np.arange(1, steps + 1)
    phase = np.exp(1j * np.outer(dt * (np.arange(steps) + 0.5), omega))  # (steps, modes)
    Gt = G.T.copy()

    energies = np.empty((cfg.trajectories, steps))
    for start in range(0, cfg.trajectories, cfg.chunk):
        stop = min(start + cfg.chunk, cfg.trajectories)
        dW = np.stack([_draw_path(_trajectory_rng(cfg.seed, i), params, probe, dt, steps).increments
                       for i in range(start, stop)])
        drive = dW @ Gt  # (batch, steps, modes)
        beta = np.cumsum(drive * phase, axis=1)
        energies[start:stop] = np.sum(np.abs(beta) ** 2, axis=2)

    n = cfg.trajectories
    per_traj_slope = energies @ times / (times @ times)
    slope = float(per_traj_slope.mean())
    stderr = float(per_traj_slope.std(ddof=1) / math.sqrt(n))
    rate = np.sum(np.abs(G) ** 2, axis=1) * params.gamma / probe.weight
    chi2, dof, p = _linearity(times, energies, cfg.checkpoints)
    violation = p < stats.norm.sf(3.0) * 2.0
    if violation:
        warnings.warn(f"ensemble energy deviates from a line through the origin (p = {p:.2e})",
                      ModelViolationWarning, stacklevel=2)
    total_mass = grid.n_cells * mat.cell_mass
    return McResult(
        times=times,
        mean_energy=energies.mean(axis=0),
        stderr_energy=energies.std(axis=0, ddof=1) / math.sqrt(n),
        slope=slope,
        stderr=stderr,
        discrete_oracle=float(rate.sum()),
        phonon_oracle=float(rate[omega > 0].sum()),
        translation_oracle=float(rate[omega == 0].sum()),
        continuum_rate=energy_growth_white(params, total_mass, 1.0),
        chi2=chi2,
        dof=dof,
        p_value=p,
        model_violation=bool(violation),
        total_mass=total_mass,
        volume=grid.n_cells * grid.lattice_param**3,
    )


def oracle_convergence(params, mat, levels=(5, 9, 17), L=4, probe_extent=4.0):
    """Relative gap between the discrete oracle and the continuum rate per refinement level."""
    gaps = []
    for points in levels:
        cfg = McConfig(L=L, probe_extent=probe_extent, probe_points=points, trajectories=2)
        total, _, _ = discrete_oracle(cfg, params, mat)
        mass = L**3 * mat.cell_mass
        cont = energy_growth_white(params, mass, 1.0)
        gaps.append(abs(total - cont) / cont if cont else 0.0)
    return gaps
