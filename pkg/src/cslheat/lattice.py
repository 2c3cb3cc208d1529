"""Phonon modes of a mono-atomic simple-cubic crystal in the Debye model.

The wavevector grid is the usual ``L x L x L`` Born-von Karman set folded
into the first Brillouin zone,  ``k = 2 pi m / (L a)`` with integer
``m in (-L/2, L/2]``.  Every branch follows ``omega = v_eff |k|``.  The three
``k = 0`` modes are uniform translations; they stay in the grid but are
flagged non-dynamical.

Polarisations are real.  The longitudinal vector is ``s(k) * k_hat`` where
``s(k)`` is the sign of the first non-zero component of ``k``; the two
transverse vectors are built from the same signed direction by Gram-Schmidt
against the z axis (x axis when the direction is within 1e-8 of z).  This
makes ``eps(-k) = eps(k)``, the real form of ``eps(-k) = conj(eps(k))``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import HBAR
from .errors import DomainError

LA, TA1, TA2 = 0, 1, 2
BRANCHES = ("LA", "TA1", "TA2")


def _canonical_direction(k):
    nz = np.flatnonzero(np.abs(k) > 0)
    sign = 1.0 if k[nz[0]] > 0 else -1.0
    return sign * k / np.linalg.norm(k)


def polarizations(k):
    """Rows LA, TA1, TA2 of an orthonormal basis adapted to ``k``."""
    k = np.asarray(k, dtype=float)
    if not np.any(k):
        return np.eye(3)
    d = _canonical_direction(k)
    ref = np.array([0.0, 0.0, 1.0])
    if abs(abs(d @ ref) - 1.0) < 1e-8:
        ref = np.array([1.0, 0.0, 0.0])
    t1 = ref - (ref @ d) * d
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(d, t1)
    return np.stack([d, t1, t2])


@dataclass(frozen=True)
class ModeGrid:
    L: int
    lattice_param: float
    v_eff: float
    k_points: np.ndarray = field(repr=False)  # (N, 3)
    omega: np.ndarray = field(repr=False)  # (N,) per k; identical for all branches
    polarization: np.ndarray = field(repr=False)  # (N, 3 branches, 3 components)
    sites: np.ndarray = field(repr=False)  # (N, 3) lattice vectors R_i

    @property
    def n_cells(self):
        return self.L**3

    @property
    def n_modes(self):
        return 3 * self.n_cells

    @property
    def dynamical(self):
        """Boolean mask over k points, False at k = 0."""
        return self.omega > 0

    @property
    def n_dynamical(self):
        return 3 * int(np.count_nonzero(self.dynamical))

    def index_of(self, k, atol=None):
        """Index of the grid point equal to ``k`` modulo reciprocal lattice vectors."""
        g = 2.0 * math.pi / self.lattice_param
        m = np.asarray(k, dtype=float) / (g / self.L)
        m_int = np.round(m)
        if np.max(np.abs(m - m_int)) > 1e-6:
            raise DomainError(f"{k} is not commensurate with the grid")
        folded = _fold(m_int.astype(int), self.L)
        hits = np.flatnonzero(np.all(self._m == folded, axis=1))
        return int(hits[0])

    @property
    def _m(self):
        return np.round(self.k_points * self.L * self.lattice_param / (2.0 * math.pi)).astype(int)

    def mirror_index(self, idx):
        return self.index_of(-self.k_points[idx])

    def lattice_sum(self, q):
        """``sum_i exp(-i q . R_i)`` for one or many wavevectors ``q``."""
        q = np.atleast_2d(np.asarray(q, dtype=float))
        n = np.arange(self.L)
        out = np.ones(len(q), dtype=complex)
        for axis in range(3):
            phases = np.exp(-1j * np.outer(q[:, axis] * self.lattice_param, n))
            out *= phases.sum(axis=1)
        return out


def _fold(m, L):
    """Map integer grid indices into (-L/2, L/2]."""
    m = np.mod(np.asarray(m) + (L - 1) // 2, L) - (L - 1) // 2
    return m


def build_grid(L, mat):
    """``L^3`` cells, ``3 L^3`` modes; the three ``k = 0`` modes are non-dynamical."""
    if int(L) != L or L < 2:
        raise DomainError(f"grid size L must be an integer >= 2, got {L!r}")
    L = int(L)
    a = mat.lattice_param
    m1 = _fold(np.arange(L), L)
    m1.sort()
    mm = np.stack(np.meshgrid(m1, m1, m1, indexing="ij"), axis=-1).reshape(-1, 3)
    k = 2.0 * math.pi / (L * a) * mm
    omega = mat.v_eff * np.linalg.norm(k, axis=1)
    pol = np.stack([polarizations(kk) for kk in k])
    n = np.arange(L)
    sites = a * np.stack(np.meshgrid(n, n, n, indexing="ij"), axis=-1).reshape(-1, 3).astype(float)
    return ModeGrid(L=L, lattice_param=a, v_eff=mat.v_eff, k_points=k, omega=omega,
                    polarization=pol, sites=sites)


def eta(grid, mode, site, probe_k, mat):
    """Phonon displacement amplitude ``eta_{i,ks}(q)`` for a mono-atomic cell.

    ``mode`` is ``(k_index, branch)``; the cell mass is the sum of the
    material's cell masses.
    """
    k_idx, branch = mode
    omega = grid.omega[k_idx]
    if not omega > 0:
        raise DomainError("k = 0 translation modes have no phonon amplitude")
    if not 0 <= site < grid.n_cells:
        raise DomainError(f"site index {site} out of range")
    q = np.asarray(probe_k, dtype=float)
    prefactor = math.sqrt(HBAR / (2.0 * grid.n_cells * mat.cell_mass * omega))
    eps = grid.polarization[k_idx, branch]  # real, so conj is a no-op
    phase = np.exp(-1j * (grid.k_points[k_idx] @ grid.sites[site]))
    return -1j * prefactor * (q @ eps) * phase
