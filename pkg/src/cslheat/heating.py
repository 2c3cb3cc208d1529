"""Collapse-driven heating rates.

Working variable for the spectral integral is ``x = omega r_c / v_eff``::

    q_nw = hbar^2 rho / (4 pi^2 m0^2 v^5) * int_0^inf omega^4 exp(-omega^2 r_c^2/v^2) gamma(omega) d omega
         = hbar^2 rho / (4 pi^2 m0^2 r_c^5) * int_0^inf x^4 exp(-x^2) gamma(x v / r_c) dx

The flat spectrum reproduces the white rate through
``int_0^inf x^4 exp(-x^2) dx = 3 sqrt(pi) / 8``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .constants import AMU, HBAR
from .errors import AccuracyError, DomainError
from .materials import debye_frequency
from .noise import spectrum_value

WHITE_ANALYTIC = "white-analytic"
NONWHITE_QUADRATURE = "nonwhite-quadrature"
MC_ESTIMATE = "mc-estimate"

GAUSS_MOMENT_4 = 3.0 * math.sqrt(math.pi) / 8.0


@dataclass(frozen=True)
class HeatingRate:
    q_dot: float  # W/m^3
    total_power_per_mass: float  # W/kg
    method: str
    error_estimate: float = 0.0  # W/m^3
    truncation_gap: float = None  # strict mode: q(inf) - q(omega_D), W/m^3

    def total_power(self, *, volume=None, mass=None):
        """Power of a body of given volume or mass (exactly one)."""
        if (volume is None) == (mass is None):
            raise DomainError("give exactly one of volume or mass")
        return self.q_dot * volume if volume is not None else self.total_power_per_mass * mass


def _white_prefactor(params):
    # 3 hbar^2 lambda / (4 m0^2 r_c^2): energy per unit mass per unit time
    return 3.0 * HBAR**2 * params.lam / (4.0 * AMU**2 * params.r_c**2)


def rate_white(params, mat):
    per_mass = _white_prefactor(params)
    return HeatingRate(q_dot=per_mass * mat.density, total_power_per_mass=per_mass, method=WHITE_ANALYTIC)


def energy_growth_white(params, total_mass, t):
    """Energy absorbed by a crystal of ``total_mass`` after time ``t``, white noise."""
    if t < 0:
        raise DomainError("t must be >= 0")
    return t * _white_prefactor(params) * total_mass


def envelope_cut(tol):
    """Dimensionless truncation point of the ``x^4 exp(-x^2)`` envelope.

    Chosen so the discarded tail is below ``1e-2 * tol`` of the full moment.
    Baseline is ``sqrt(ln(1/tol))``, widened until the tail bound holds.
    """
    target = 1e-2 * tol
    x = math.sqrt(math.log(1.0 / tol))
    if special.gammaincc(2.5, x * x) <= target:
        return x
    return optimize.brentq(lambda y: special.gammaincc(2.5, y * y) - target, x, 40.0)


def _integrate_pieces(func, edges, tol):
    total, err = 0.0, 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        val, e = integrate.quad(func, lo, hi, epsabs=0.0, epsrel=0.1 * tol, limit=200)
        total += val
        err += e
    return total, err


def spectral_integral(spectrum, v_eff, tol=1e-8, upper=math.inf):
    """``int_0^upper x^4 exp(-x^2) gamma(x v/r_c) dx`` in units of the peak gamma.

    Returns ``(value, error_estimate)``, both divided by ``spectrum.peak``.
    ``upper`` is in rad/s.
    """
    r_c = spectrum.params.r_c
    scale = v_eff / r_c  # rad/s per unit x
    peak = spectrum.peak
    if peak == 0.0:
        return 0.0, 0.0
    x_env = envelope_cut(tol)
    x_end = min(x_env, spectrum.support_end / scale, upper / scale)

    def f(x):
        return x**4 * math.exp(-x * x) * spectrum_value(spectrum, x * scale) / peak

    inner = sorted({b / scale for b in spectrum.breakpoints if 0.0 < b / scale < x_end})
    edges = [0.0, *inner, x_end]
    value, err = _integrate_pieces(f, edges, tol)
    if x_end == x_env and x_env < upper / scale:
        # bound on the discarded envelope tail (spectrum <= peak)
        err += 0.5 * special.gamma(2.5) * special.gammaincc(2.5, x_env * x_env)
    return value, err


def rate_nonwhite(spectrum, mat, tol=1e-8, strict=False):
    """Heating rate for a general collapse-noise spectrum.

    With ``strict=True`` the frequency integral stops at the Debye frequency
    instead of infinity, and ``truncation_gap`` reports the difference.
    """
    if not 0.0 < tol <= 1e-3:
        raise DomainError("tol must lie in (0, 1e-3]")
    params = spectrum.params
    pref = HBAR**2 * spectrum.peak / (4.0 * math.pi**2 * AMU**2 * params.r_c**5)
    value, err = spectral_integral(spectrum, mat.v_eff, tol)
    gap = None
    if strict:
        strict_value, strict_err = spectral_integral(spectrum, mat.v_eff, tol, upper=debye_frequency(mat))
        gap = pref * (value - strict_value) * mat.density
        value, err = strict_value, strict_err
    per_mass = pref * value
    q = per_mass * mat.density
    err_q = pref * err * mat.density
    if err_q > tol * q and err_q > 0:
        raise AccuracyError(
            f"heating-rate quadrature error {err_q:.3e} exceeds tol*q = {tol * q:.3e}",
            best_estimate=q, error_estimate=err_q,
        )
    return HeatingRate(q_dot=q, total_power_per_mass=per_mass, method=NONWHITE_QUADRATURE,
                       error_estimate=err_q, truncation_gap=gap)


def cutoff_ratio_small(ratio):
    """Low-cutoff limit ``q_nw / q_w = 8 ratio^5 / (15 sqrt(pi))`` with ``ratio = Omega r_c / v``."""
    return 8.0 * ratio**5 / (15.0 * math.sqrt(math.pi))


def gauss_legendre_integral(spectrum, v_eff, order=64, panels=None):
    """Fixed-grid composite Gauss-Legendre evaluation of the spectral integral.

    Independent of the adaptive path; used as a cross-check.  Integrates over
    ``[0, 12]`` in ``x`` (tail below 1e-58) with panel edges at every
    spectrum breakpoint.
    """
    scale = v_eff / spectrum.params.r_c
    x_max = min(12.0, spectrum.support_end / scale)
    edges = np.linspace(0.0, x_max, (panels or 48) + 1)
    edges = np.union1d(edges, [b / scale for b in spectrum.breakpoints if 0 < b / scale < x_max])
    nodes, weights = np.polynomial.legendre.leggauss(order)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        x = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        # evaluate strictly inside the panel so step edges take their panel's value
        g = spectrum_value(spectrum, x * scale)
        total += 0.5 * (hi - lo) * np.sum(weights * x**4 * np.exp(-x * x) * g)
    return total / spectrum.peak
