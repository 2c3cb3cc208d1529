"""Small-system laboratory for the second time-ordered cumulant.

A system ``H = H0 - hbar xi(t) L`` with a real Gaussian noise ``xi`` of
correlation ``E xi(t) xi(s) = f(t - s)`` has, to second cumulant order,::

    d rho/dt = -(i/hbar) [H0, rho] - 1/2 ([L^dag, [K_L(t), rho]] + [L, [K_{L^dag}(t), rho]])
    K_X(t)   = int_0^t f(tau) exp(-i H0 tau/hbar) X exp(i H0 tau/hbar) d tau

For Hermitian ``L`` this is ``-[L, [K_L, rho]]``.  White noise
``f = gamma delta`` gives ``K_X = gamma X / 2`` and the familiar
double-commutator generator.  Exponential noise uses
``f(tau) = gamma / (2 tau_c) exp(-|tau| / tau_c)``, so its zero-frequency
spectrum is ``gamma`` for every ``tau_c``.

``K`` is built by trapezoidal quadrature over stored interaction-picture
operators on the half-step grid, with the window cut at ``8 tau_c``.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..constants import HBAR
from ..errors import DomainError, IntegratorError

HISTORY_WINDOW = 8.0  # in units of tau_c


@dataclass(frozen=True)
class WhiteNoise:
    gamma: float


@dataclass(frozen=True)
class ExponentialNoise:
    gamma: float
    tau_c: float

    def __post_init__(self):
        if not self.tau_c > 0:
            raise DomainError("tau_c must be > 0")

    def correlation(self, tau):
        return self.gamma / (2.0 * self.tau_c) * np.exp(-np.abs(tau) / self.tau_c)


@dataclass(frozen=True)
class SmallSystem:
    H0: np.ndarray
    L_op: np.ndarray
    noise: object
    hbar: float = HBAR

    def __post_init__(self):
        H0 = np.asarray(self.H0, dtype=complex)
        L = np.asarray(self.L_op, dtype=complex)
        d = H0.shape[0]
        if H0.shape != (d, d) or L.shape != (d, d):
            raise DomainError("H0 and L must be square matrices of the same size")
        if not 2 <= d <= 16:
            raise DomainError("dimension must be between 2 and 16")
        if np.max(np.abs(H0 - H0.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(H0))):
            raise DomainError("H0 must be Hermitian")
        if self.noise.gamma < 0:
            raise DomainError("noise strength must be >= 0")
        object.__setattr__(self, "H0", H0)
        object.__setattr__(self, "L_op", L)

    @property
    def dim(self):
        return self.H0.shape[0]

    @property
    def hermitian_coupling(self):
        return np.allclose(self.L_op, self.L_op.conj().T, atol=1e-12)


def commutator(a, b):
    return a @ b - b @ a


def trace_distance(rho, sigma):
    ev = np.linalg.eigvalsh(0.5 * ((rho - sigma) + (rho - sigma).conj().T))
    return 0.5 * float(np.sum(np.abs(ev)))


def _check_rho(rho):
    rho = np.asarray(rho, dtype=complex)
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise DomainError("rho0 must be Hermitian")
    if abs(np.trace(rho) - 1.0) > 1e-10:
        raise DomainError("rho0 must have unit trace")
    if np.min(np.linalg.eigvalsh(rho)) < -1e-10:
        raise DomainError("rho0 must be positive semidefinite")
    return rho


def _n_steps(t, dt):
    if not dt > 0 or t < 0:
        raise DomainError("need dt > 0 and t >= 0")
    n = int(round(t / dt))
    if abs(n * dt - t) > 1e-9 * max(t, dt):
        raise DomainError("t must be an integer multiple of dt")
    return n


def _rotated(sys, X, taus):
    """``exp(-i H0 tau/hbar) X exp(i H0 tau/hbar)`` for each tau; shape (n_tau, d, d)."""
    E, U = np.linalg.eigh(sys.H0)
    Xe = U.conj().T @ X @ U
    phase = np.exp(-1j * np.subtract.outer(E, E)[None] * np.asarray(taus)[:, None, None] / sys.hbar)
    return U[None] @ (Xe[None] * phase) @ U.conj().T[None]


def memory_kernels(sys, times):
    """``(K_L, K_{L^dag})`` at each requested time (uniform grid starting at 0)."""
    L = sys.L_op
    Ld = L.conj().T
    times = np.asarray(times, dtype=float)
    if isinstance(sys.noise, WhiteNoise):
        KL = np.broadcast_to(0.5 * sys.noise.gamma * L, (len(times),) + L.shape)
        KLd = np.broadcast_to(0.5 * sys.noise.gamma * Ld, (len(times),) + L.shape)
        return KL, KLd
    h = times[1] - times[0] if len(times) > 1 else 0.0
    window = HISTORY_WINDOW * sys.noise.tau_c
    n_hist = int(math.ceil(window / h - 1e-9)) if h > 0 else 0
    taus = h * np.arange(min(n_hist, len(times) - 1) + 1)
    f = sys.noise.correlation(taus)
    out = []
    for X in (L, Ld):
        integrand = f[:, None, None] * _rotated(sys, X, taus)
        # cumulative trapezoid; entry k is the integral over [0, taus[k]]
        cum = np.zeros_like(integrand)
        if len(taus) > 1:
            cum[1:] = np.cumsum(0.5 * h * (integrand[1:] + integrand[:-1]), axis=0)
        idx = np.minimum(np.arange(len(times)), len(taus) - 1)
        out.append(cum[idx])
    return out[0], out[1]


def _generator(sys, rho, KL, KLd):
    L = sys.L_op
    Ld = L.conj().T
    drho = -1j / sys.hbar * commutator(sys.H0, rho)
    drho -= 0.5 * (commutator(Ld, commutator(KL, rho)) + commutator(L, commutator(KLd, rho)))
    return drho


def white_generator_matrix(sys):
    """Column-stacked Liouvillian of the white-noise second-cumulant equation."""
    d = sys.dim
    basis = np.eye(d * d).reshape(d * d, d, d).transpose(0, 2, 1)  # column-major vec
    KL = 0.5 * sys.noise.gamma * sys.L_op
    KLd = KL.conj().T
    cols = [_generator(sys, B, KL, KLd).reshape(-1, order="F") for B in basis]
    return np.stack(cols, axis=1)


def master_series(sys, rho0, t, dt, n_out=None):
    """RK4 integration of the second-cumulant equation.

    Returns ``(times, rhos)`` at ``n_out + 1`` evenly spaced output times
    (default every step).
    """
    rho = _check_rho(rho0)
    rho = 0.5 * (rho + rho.conj().T)
    n = _n_steps(t, dt)
    n_out = n if n_out is None else n_out
    if n_out < 1 or n % n_out:
        raise DomainError("n_out must divide the number of steps")
    every = n // n_out
    half = 0.5 * dt * np.arange(2 * n + 1)
    KL, KLd = memory_kernels(sys, half)

    times = [0.0]
    rhos = [rho.copy()]
    for k in range(n):
        a, b, c = 2 * k, 2 * k + 1, 2 * k + 2
        k1 = _generator(sys, rho, KL[a], KLd[a])
        k2 = _generator(sys, rho + 0.5 * dt * k1, KL[b], KLd[b])
        k3 = _generator(sys, rho + 0.5 * dt * k2, KL[b], KLd[b])
        k4 = _generator(sys, rho + dt * k3, KL[c], KLd[c])
        rho = rho + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)
        if (k + 1) % every == 0:
            times.append((k + 1) * dt)
            rhos.append(rho.copy())
    drift = abs(np.trace(rho) - 1.0)
    if drift > 1e-8:
        raise IntegratorError(f"trace drift {drift:.2e} exceeds 1e-8")
    return np.array(times), np.array(rhos)


def evolve_master_second_cumulant(sys, rho0, t, dt):
    return master_series(sys, rho0, t, dt, n_out=1)[1][-1]


def _unitaries(sys, dW, dt):
    """``exp(-i H0 dt/hbar + i L dW)`` for a batch of real increments."""
    M = sys.H0[None] * (dt / sys.hbar) - sys.L_op[None] * dW[:, None, None]
    E, V = np.linalg.eigh(M)
    return (V * np.exp(-1j * E)[:, None, :]) @ V.conj().transpose(0, 2, 1)


def _noise_increments(sys, rng, n_traj, n, dt):
    """Integrated noise over each step, shape (n, n_traj)."""
    noise = sys.noise
    if isinstance(noise, WhiteNoise):
        return rng.standard_normal((n, n_traj)) * math.sqrt(noise.gamma * dt)
    # stationary Ornstein-Uhlenbeck with variance gamma/(2 tau_c)
    var = noise.gamma / (2.0 * noise.tau_c)
    decay = math.exp(-dt / noise.tau_c)
    kick = math.sqrt(var * (1.0 - decay**2))
    xi = rng.standard_normal(n_traj) * math.sqrt(var)
    out = np.empty((n, n_traj))
    for k in range(n):
        nxt = decay * xi + kick * rng.standard_normal(n_traj)
        out[k] = 0.5 * (xi + nxt) * dt
        xi = nxt
    return out


def trajectory_series(sys, psi0, t, dt, n_traj, seed, n_out=None, keep_states=False):
    """Unitary-splitting trajectories; returns ``(times, mean_rhos[, final_states])``."""
    if not sys.hermitian_coupling:
        raise DomainError("trajectory evolution needs a Hermitian coupling operator")
    psi = np.asarray(psi0, dtype=complex).reshape(-1)
    if psi.shape != (sys.dim,) or abs(np.vdot(psi, psi).real - 1.0) > 1e-10:
        raise DomainError("psi0 must be a normalised vector of the system dimension")
    if n_traj < 1:
        raise DomainError("n_traj must be >= 1")
    n = _n_steps(t, dt)
    n_out = n if n_out is None else n_out
    if n_out < 1 or n % n_out:
        raise DomainError("n_out must divide the number of steps")
    every = n // n_out
    rng = np.random.Generator(np.random.Philox(seed))
    dW = _noise_increments(sys, rng, n_traj, n, dt)
    states = np.repeat(psi[None], n_traj, axis=0)

    def mean_rho(st):
        return np.einsum("ni,nj->ij", st, st.conj()) / len(st)

    times, rhos = [0.0], [mean_rho(states)]
    for k in range(n):
        U = _unitaries(sys, dW[k], dt)
        states = np.einsum("nij,nj->ni", U, states)
        if (k + 1) % every == 0:
            times.append((k + 1) * dt)
            rhos.append(mean_rho(states))
    drift = np.max(np.abs(np.linalg.norm(states, axis=1) - 1.0))
    if drift > 1e-8:
        raise IntegratorError(f"norm drift {drift:.2e} exceeds 1e-8")
    if keep_states:
        return np.array(times), np.array(rhos), states
    return np.array(times), np.array(rhos)


def evolve_trajectories(sys, psi0, t, dt, n_traj, seed):
    return trajectory_series(sys, psi0, t, dt, n_traj, seed, n_out=1)[1][-1]


def bootstrap_radius(states, n_boot=200, seed=0, level=0.95):
    """Bootstrap radius (trace distance) of the ensemble-mean density matrix."""
    rng = np.random.Generator(np.random.Philox(seed))
    n = len(states)
    full = np.einsum("ni,nj->ij", states, states.conj()) / n
    dists = np.empty(n_boot)
    for b in range(n_boot):
        pick = states[rng.integers(0, n, n)]
        dists[b] = trace_distance(np.einsum("ni,nj->ij", pick, pick.conj()) / n, full)
    return float(np.quantile(dists, level))


def cumulant_gap_scan(H0, L_op, gamma, tau_cs, psi0, t, dt, n_traj=500, seed=0, hbar=1.0):
    """Trace distance between coloured-noise trajectories and the second-cumulant equation.

    Returns rows ``(gamma * tau_c, distance)``; no regime threshold is implied.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    rho0 = np.outer(psi0, psi0.conj())
    rows = []
    for tau_c in tau_cs:
        sys = SmallSystem(H0, L_op, ExponentialNoise(gamma, tau_c), hbar=hbar)
        me = evolve_master_second_cumulant(sys, rho0, t, dt)
        tr = evolve_trajectories(sys, psi0, t, dt, n_traj, seed)
        rows.append((gamma * tau_c, trace_distance(me, tr)))
    return rows
