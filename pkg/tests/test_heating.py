import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cslheat import heating
from cslheat.constants import AMU, HBAR
from cslheat.errors import AccuracyError, DomainError
from cslheat.heating import (
    GAUSS_MOMENT_4,
    MC_ESTIMATE,
    NONWHITE_QUADRATURE,
    WHITE_ANALYTIC,
    HeatingRate,
    cutoff_ratio_small,
    energy_growth_white,
    gauss_legendre_integral,
    rate_nonwhite,
    rate_white,
    spectral_integral,
)
from cslheat.materials import builtin_material, debye_frequency
from cslheat.noise import CslParams, NoiseSpectrum

CU = builtin_material("Cu")
P = CslParams(1e-8, 1e-7)


def test_white_copper_value():
    r = rate_white(P, CU)
    expected = 3 * HBAR**2 * 1e-8 * 8.9e3 / (4 * AMU**2 * 1e-14)
    assert r.q_dot == pytest.approx(expected, rel=1e-15)
    assert r.q_dot == pytest.approx(2.69e-5, rel=2e-3)
    assert r.method == WHITE_ANALYTIC
    assert r.q_dot == pytest.approx(r.total_power_per_mass * CU.density, rel=1e-15)


def test_white_trivial_scalings():
    assert rate_white(CslParams(0.0, 1e-7), CU).q_dot == 0.0
    assert rate_white(CslParams(1e-8, 2e-7), CU).q_dot == pytest.approx(rate_white(P, CU).q_dot / 4, rel=1e-14)


def test_energy_growth_fixture():
    assert energy_growth_white(P, 1.0, 1.0) == pytest.approx(3 * HBAR**2 * 1e-8 / (4 * AMU**2 * 1e-14), rel=1e-15)
    assert energy_growth_white(P, 2.0, 0.0) == 0.0
    assert energy_growth_white(P, 2.0, 3.0) == pytest.approx(2 * energy_growth_white(P, 1.0, 3.0), rel=1e-15)
    with pytest.raises(DomainError):
        energy_growth_white(P, 1.0, -1.0)


def test_total_power():
    r = rate_white(P, CU)
    assert r.total_power(volume=2.0) == 2 * r.q_dot
    assert r.total_power(mass=3.0) == 3 * r.total_power_per_mass
    with pytest.raises(DomainError):
        r.total_power()
    with pytest.raises(DomainError):
        r.total_power(volume=1.0, mass=1.0)
    assert HeatingRate(1.0, 1.0, MC_ESTIMATE).error_estimate == 0.0


def test_flat_matches_white():
    nw = rate_nonwhite(NoiseSpectrum.flat(P), CU, tol=1e-8)
    w = rate_white(P, CU)
    assert nw.method == NONWHITE_QUADRATURE
    assert abs(nw.q_dot / w.q_dot - 1) < 1e-8
    assert nw.error_estimate <= 1e-8 * nw.q_dot


def test_gaussian_moment():
    from scipy import integrate
    val, _ = integrate.quad(lambda x: x**4 * math.exp(-x * x), 0, math.inf)
    assert val == pytest.approx(GAUSS_MOMENT_4, rel=1e-12)


def _step_at_ratio(ratio, params=P, mat=CU):
    return NoiseSpectrum.step_cutoff(params, ratio * mat.v_eff / params.r_c)


def test_cutoff_limits():
    w = rate_white(P, CU).q_dot
    small = rate_nonwhite(_step_at_ratio(0.01), CU).q_dot / w
    assert abs(small / cutoff_ratio_small(0.01) - 1) < 0.01
    big = rate_nonwhite(_step_at_ratio(100.0), CU).q_dot / w
    assert 1 - 1e-4 <= big <= 1 + 1e-12


@given(lo=st.floats(1e-3, 5.0), hi=st.floats(1e-3, 5.0))
def test_monotone_in_cutoff(lo, hi):
    lo, hi = sorted((lo, hi))
    a = rate_nonwhite(_step_at_ratio(lo), CU).q_dot
    b = rate_nonwhite(_step_at_ratio(hi), CU).q_dot
    assert a <= b * (1 + 1e-7)
    assert b <= rate_white(P, CU).q_dot * (1 + 1e-7)


@given(lam=st.floats(1e-12, 1e-4), s=st.floats(0.1, 10.0), rho=st.floats(1e2, 3e4),
       ratio=st.floats(0.05, 5.0))
def test_linear_in_lambda_and_density(lam, s, rho, ratio):
    p = CslParams(lam, 1e-7)
    mat = CU.with_overrides(density=rho)
    base = rate_nonwhite(_step_at_ratio(ratio, p, mat), mat).q_dot
    scaled = rate_nonwhite(_step_at_ratio(ratio, CslParams(s * lam, 1e-7), mat), mat).q_dot
    assert scaled == pytest.approx(s * base, rel=1e-7)
    dense = mat.with_overrides(density=s * rho)
    assert rate_nonwhite(_step_at_ratio(ratio, p, dense), dense).q_dot == pytest.approx(s * base, rel=1e-7)
    assert rate_white(p, dense).q_dot == pytest.approx(s * rate_white(p, mat).q_dot, rel=1e-13)


@given(s=st.floats(0.2, 5.0), ratio=st.floats(0.05, 5.0))
def test_dimensionless_ratio_scaling(s, ratio):
    # gamma ~ r_c^3 and the prefactor ~ r_c^-5, so q ~ r_c^-2 at fixed Omega r_c / v_eff
    base = rate_nonwhite(_step_at_ratio(ratio), CU).q_dot
    p2 = CslParams(P.lam, s * P.r_c)
    mat2 = CU.with_overrides(v_eff=CU.v_eff * 1.7)
    scaled = rate_nonwhite(_step_at_ratio(ratio, p2, mat2), mat2).q_dot
    assert scaled == pytest.approx(base / s**2, rel=1e-7)


@given(values=st.lists(st.floats(0.0, 1.0), min_size=2, max_size=12), span=st.floats(0.3, 6.0),
       tol=st.sampled_from([1e-6, 1e-8]))
def test_against_gauss_legendre(values, span, tol):
    if max(values) == 0:
        values[0] = 1.0
    scale = CU.v_eff / P.r_c
    omegas = np.linspace(0.0, span * scale, len(values))
    spec = NoiseSpectrum.tabulated(P, omegas, np.asarray(values) * P.gamma)
    adaptive, _ = spectral_integral(spec, CU.v_eff, tol)
    oracle = gauss_legendre_integral(spec, CU.v_eff)
    assert adaptive == pytest.approx(oracle, rel=10 * tol, abs=1e-300)


def test_strict_mode_gap():
    r = rate_nonwhite(NoiseSpectrum.flat(P), CU, strict=True)
    assert r.truncation_gap >= 0
    assert debye_frequency(CU) * P.r_c / CU.v_eff > 10  # Debye edge far out on the envelope
    assert r.truncation_gap <= 1e-8 * rate_white(P, CU).q_dot
    soft = CU.with_overrides(primitive_cell_volume=1e-18)  # pulls omega_D into the envelope
    r2 = rate_nonwhite(NoiseSpectrum.flat(P), soft, strict=True)
    assert r2.truncation_gap > 0.01 * rate_white(P, soft).q_dot


@pytest.mark.parametrize("tol", [0.0, 1e-2, -1.0])
def test_tol_domain(tol):
    with pytest.raises(DomainError):
        rate_nonwhite(NoiseSpectrum.flat(P), CU, tol=tol)


def test_accuracy_error_carries_estimate(monkeypatch):
    real = heating.integrate.quad

    def noisy(*args, **kw):
        val, err = real(*args, **kw)
        return val, abs(val)

    monkeypatch.setattr(heating.integrate, "quad", noisy)
    with pytest.raises(AccuracyError) as info:
        rate_nonwhite(NoiseSpectrum.flat(P), CU)
    assert info.value.best_estimate == pytest.approx(rate_white(P, CU).q_dot, rel=1e-6)
    assert info.value.error_estimate > 0


def test_zero_lambda_nonwhite():
    r = rate_nonwhite(NoiseSpectrum.step_cutoff(CslParams(0.0, 1e-7), 1e10), CU)
    assert r.q_dot == 0.0
