"""Collapse-noise statistics and discrete white-noise sample paths.

Discretisation of the noise field
---------------------------------
The continuous probe wavevector is replaced by a finite, inversion-symmetric
set of points ``q_j`` carrying a common cell weight ``w = dq^3 / (2 pi)^3`` so
that ``int d^3q/(2 pi)^3 F(q) ~ sum_j w F(q_j)``.  The momentum delta in the
white-noise correlation becomes a Kronecker delta divided by that weight, so
the Wiener increments over a step ``dt`` satisfy::

    E[dW_j conj(dW_l)] = delta_jl * gamma * dt / w
    dW_{-j} = conj(dW_j)

The point ``q = 0`` is its own mirror and its increment is real.  The
Monte-Carlo verifier and its deterministic oracle use exactly this variance.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidGridError, UnsupportedError

FLAT, STEP, TABULATED = "flat", "step", "tabulated"


@dataclass(frozen=True)
class CslParams:
    lam: float  # collapse rate, 1/s
    r_c: float  # localisation length, m

    def __post_init__(self):
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise DomainError(f"lambda must be >= 0, got {self.lam!r}")
        if not (self.r_c > 0 and math.isfinite(self.r_c)):
            raise DomainError(f"r_c must be > 0, got {self.r_c!r}")

    @property
    def gamma(self):
        """White-noise strength ``8 pi^(3/2) lambda r_c^3`` (m^3/s)."""
        return 8.0 * math.pi**1.5 * self.lam * self.r_c**3


@dataclass(frozen=True)
class NoiseSpectrum:
    """Collapse-noise spectrum gamma(omega) for omega >= 0.

    Build with :meth:`flat`, :meth:`step_cutoff` or :meth:`tabulated`.  The
    spectrum is taken as even in omega when transformed to a correlation.
    """

    kind: str
    params: CslParams
    cutoff: float = None
    omegas: tuple = field(default=None, repr=False)
    values: tuple = field(default=None, repr=False)

    @classmethod
    def flat(cls, params):
        return cls(FLAT, params)

    @classmethod
    def step_cutoff(cls, params, cutoff):
        if not cutoff > 0:
            raise DomainError(f"cutoff must be > 0, got {cutoff!r}")
        return cls(STEP, params, cutoff=float(cutoff))

    @classmethod
    def tabulated(cls, params, omegas, values):
        omegas = np.asarray(omegas, dtype=float)
        values = np.asarray(values, dtype=float)
        if omegas.ndim != 1 or omegas.shape != values.shape or omegas.size < 2:
            raise DomainError("tabulated spectrum needs two equal-length columns with >= 2 rows")
        if np.any(np.diff(omegas) <= 0):
            raise DomainError("tabulated frequencies must be strictly increasing")
        if omegas[0] < 0 or np.any(values < 0):
            raise DomainError("tabulated spectrum must be non-negative on omega >= 0")
        return cls(TABULATED, params, omegas=tuple(omegas), values=tuple(values))

    @property
    def breakpoints(self):
        """Frequencies where the spectrum is not smooth."""
        if self.kind == STEP:
            return (self.cutoff,)
        if self.kind == TABULATED:
            return self.omegas
        return ()

    @property
    def support_end(self):
        """Largest frequency with non-zero spectrum (inf for flat)."""
        if self.kind == STEP:
            return self.cutoff
        if self.kind == TABULATED:
            return self.omegas[-1]
        return math.inf

    @property
    def peak(self):
        if self.kind == TABULATED:
            return max(self.values)
        return self.params.gamma


def spectrum_value(spectrum, omega):
    """gamma(omega); accepts scalars or arrays of non-negative frequencies."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0) or np.any(np.isnan(w)):
        raise DomainError("spectrum is defined for omega >= 0")
    if spectrum.kind == FLAT:
        out = np.full(w.shape, spectrum.params.gamma)
    elif spectrum.kind == STEP:
        # theta(Omega - omega) with theta(0) = 1
        out = np.where(w <= spectrum.cutoff, spectrum.params.gamma, 0.0)
    else:
        xs, ys = np.asarray(spectrum.omegas), np.asarray(spectrum.values)
        out = np.interp(w, xs, ys, left=ys[0], right=0.0)
        out = np.where(w > xs[-1], 0.0, out)
    return float(out) if out.ndim == 0 else out


def _segment_cos_integral(x0, x1, y0, y1, t):
    """Exact integral of the linear interpolant from (x0, y0) to (x1, y1) times cos(t x)."""
    slope = (y1 - y0) / (x1 - x0)
    if abs(t) * max(abs(x0), abs(x1)) < 1e-2:
        # the closed form cancels catastrophically here; sum the cosine series instead
        a = y0 - slope * x0
        total = 0.0
        for n in range(7):
            p = 2 * n
            term = a * (x1 ** (p + 1) - x0 ** (p + 1)) / (p + 1) + slope * (x1 ** (p + 2) - x0 ** (p + 2)) / (p + 2)
            total += (-1) ** n * t**p / math.factorial(p) * term
        return total
    s0, s1 = math.sin(t * x0), math.sin(t * x1)
    c0, c1 = math.cos(t * x0), math.cos(t * x1)
    return (y1 * s1 - y0 * s0) / t + slope * (c1 - c0) / t**2


def correlation_f(spectrum, t):
    """Time correlation ``f(t) = (1/2 pi) int gamma(omega) exp(-i omega t) d omega``.

    The flat spectrum has a delta correlation and is rejected; white noise is
    handled analytically wherever it occurs.
    """
    t = float(t)
    if not math.isfinite(t):
        raise DomainError("t must be finite")
    if spectrum.kind == FLAT:
        raise UnsupportedError("flat spectrum has a delta correlation; use the white-noise code paths")
    if spectrum.kind == STEP:
        omega = spectrum.cutoff
        if abs(omega * t) < 1e-8:
            return spectrum.params.gamma * omega / math.pi * (1.0 - (omega * t) ** 2 / 6.0)
        return spectrum.params.gamma * math.sin(omega * t) / (math.pi * t)
    xs, ys = spectrum.omegas, spectrum.values
    t = abs(t)
    if t == 0.0:
        total = sum(0.5 * (ys[i] + ys[i + 1]) * (xs[i + 1] - xs[i]) for i in range(len(xs) - 1))
    else:
        total = sum(_segment_cos_integral(xs[i], xs[i + 1], ys[i], ys[i + 1], t) for i in range(len(xs) - 1))
    return total / math.pi


def load_spectrum(path, params):
    """Two-column text file: omega [rad/s], gamma(omega) [m^3/s]."""
    data = np.loadtxt(path, comments="#", delimiter=None, ndmin=2)
    if data.shape[1] != 2:
        raise DomainError(f"{path}: expected two columns, found {data.shape[1]}")
    return NoiseSpectrum.tabulated(params, data[:, 0], data[:, 1])


class ProbeGrid:
    """Finite set of probe wavevectors with a shared cell weight.

    ``mirror[j]`` is the index of ``-points[j]``.  Construction fails with
    :class:`InvalidGridError` if any point lacks its mirror partner.
    """

    def __init__(self, points, spacing, atol=None):
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        if spacing <= 0:
            raise InvalidGridError("grid spacing must be positive")
        self.points = points
        self.spacing = float(spacing)
        self.weight = self.spacing**3 / (2.0 * math.pi) ** 3
        self.mirror = self._find_mirrors(atol if atol is not None else 1e-9 * self.spacing)

    def _find_mirrors(self, atol):
        keys = np.round(self.points / self.spacing * 2.0).astype(np.int64)
        lookup = {tuple(k): i for i, k in enumerate(keys)}
        mirror = np.empty(len(self.points), dtype=np.int64)
        for i, k in enumerate(keys):
            j = lookup.get(tuple(-k))
            if j is None or not np.allclose(self.points[j], -self.points[i], atol=atol, rtol=0):
                raise InvalidGridError(f"probe point {self.points[i]} has no inversion partner")
            mirror[i] = j
        return mirror

    @classmethod
    def cubic(cls, extent, points_per_axis):
        """Symmetric cubic grid on ``[-extent, extent]^3``.

        An odd point count puts a node at the origin; an even count gives a
        half-spacing offset grid.
        """
        if points_per_axis < 2:
            raise InvalidGridError("need at least 2 points per axis")
        axis = np.linspace(-extent, extent, points_per_axis)
        spacing = axis[1] - axis[0]
        g = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
        return cls(g, spacing)

    def __len__(self):
        return len(self.points)

    @property
    def half_space(self):
        """Indices sampled independently: self-mirrored points plus one of each pair."""
        idx = np.arange(len(self.points))
        return idx[idx <= self.mirror]


@dataclass(frozen=True)
class NoisePath:
    dt: float
    steps: int
    increments: np.ndarray = field(repr=False)  # (steps, n_probe) complex
    variance: float  # E|dW_j|^2 per step


def white_increment_variance(params, grid, dt):
    return params.gamma * dt / grid.weight


def synthesize_white_path(params, grid, dt, steps, seed):
    """Complex Gaussian increments for each time step and probe point.

    Deterministic in ``seed``.  Each step is independent; the pairing
    ``dW(-q) = conj(dW(q))`` holds exactly because only one half of the grid
    is drawn and the other half is mirrored.
    """
    if not isinstance(grid, ProbeGrid):
        raise InvalidGridError("white-noise synthesis needs a ProbeGrid")
    rng = np.random.Generator(np.random.Philox(seed))
    return _draw_path(rng, params, grid, dt, steps)


def _draw_path(rng, params, grid, dt, steps):
    if not dt > 0:
        raise DomainError("dt must be > 0")
    if steps < 1:
        raise DomainError("steps must be >= 1")
    var = white_increment_variance(params, grid, dt)
    half = grid.half_space
    self_mirror = grid.mirror[half] == half
    re = rng.standard_normal((steps, half.size))
    im = rng.standard_normal((steps, half.size))
    scale = math.sqrt(var / 2.0)
    draws = scale * (re + 1j * im)
    # self-mirrored points carry a real increment with the full variance
    draws[:, self_mirror] = math.sqrt(var) * re[:, self_mirror]
    inc = np.empty((steps, len(grid)), dtype=complex)
    inc[:, half] = draws
    inc[:, grid.mirror[half]] = np.conj(draws)
    return NoisePath(dt=float(dt), steps=int(steps), increments=inc, variance=var)
