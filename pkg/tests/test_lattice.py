import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cslheat.errors import DomainError
from cslheat.lattice import LA, TA1, TA2, build_grid, eta, polarizations
from cslheat.materials import builtin_material

CU = builtin_material("Cu")


def test_mode_counts():
    g = build_grid(2, CU)
    assert g.n_modes == 24
    assert g.n_dynamical == 21
    assert build_grid(4, CU).n_modes == 192


@pytest.mark.parametrize("L", [0, 1, 2.5])
def test_bad_size(L):
    with pytest.raises(DomainError):
        build_grid(L, CU)


@pytest.mark.parametrize("L", [2, 3, 4, 5])
def test_mirror_and_dispersion(L):
    g = build_grid(L, CU)
    for i in range(len(g.k_points)):
        j = g.mirror_index(i)
        assert g.omega[j] == g.omega[i]
        if np.allclose(g.k_points[j], -g.k_points[i]):
            # zone-boundary points fold onto a different vector; eps(-k) = eps(k) holds for literal -k
            assert np.allclose(g.polarization[j], g.polarization[i])


def test_linear_dispersion():
    mat = CU.with_overrides(v_eff=5000.0)
    g = build_grid(4, mat)
    k = np.linalg.norm(g.k_points, axis=1)
    assert np.allclose(g.omega, 5000.0 * k, rtol=1e-15)
    assert 5000.0 * 1e8 == 5e11


@pytest.mark.parametrize("L", [2, 4, 5])
def test_polarization_orthonormal_and_complete(L):
    g = build_grid(L, CU)
    for k, eps in zip(g.k_points, g.polarization):
        assert np.allclose(eps @ eps.T, np.eye(3), atol=1e-12)
        assert np.allclose(eps.T @ eps, np.eye(3), atol=1e-12)
        if np.any(k):
            khat = k / np.linalg.norm(k)
            assert abs(abs(eps[LA] @ khat) - 1) < 1e-12
            assert abs(eps[TA1] @ khat) < 1e-12 and abs(eps[TA2] @ khat) < 1e-12


@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_polarization_random_directions(v):
    eps = polarizations(v)
    assert np.allclose(eps @ eps.T, np.eye(3), atol=1e-12)
    assert np.allclose(polarizations(-np.asarray(v)), eps, atol=1e-12)


def test_polarization_fallback_axis():
    eps = polarizations([0.0, 0.0, 2.0])
    assert np.allclose(eps @ eps.T, np.eye(3), atol=1e-12)


@pytest.mark.parametrize("L", [2, 3, 4])
def test_lattice_sum_relation(L):
    g = build_grid(L, CU)
    N = g.n_cells
    for k in g.k_points:
        s = np.sum(np.exp(1j * g.sites @ k)) / N
        if not np.any(k):
            assert s == pytest.approx(1.0)
        else:
            assert abs(s) < 1e-10
    recip = np.array([2 * math.pi / g.lattice_param, 0, 0])
    assert abs(g.lattice_sum(recip)[0] - N) < 1e-9 * N
    assert np.allclose(g.lattice_sum(g.k_points), np.array([N if not np.any(k) else 0 for k in g.k_points]),
                       atol=1e-9)


def _mode(g, m):
    return g.index_of(2 * math.pi * np.asarray(m) / (g.L * g.lattice_param))


def test_eta_zero_for_perpendicular_probe():
    g = build_grid(4, CU)
    k = _mode(g, [1, 0, 0])
    assert eta(g, (k, LA), 0, [0.0, 3e7, 0.0], CU) == 0
    # parallel probe leaves the transverse branches dark
    assert abs(eta(g, (k, TA1), 0, [3e7, 0.0, 0.0], CU)) < 1e-30
    assert abs(eta(g, (k, TA2), 0, [3e7, 0.0, 0.0], CU)) < 1e-30


def test_eta_size_scaling():
    # match the physical wavevector: m=1 on L=2 equals m=2 on L=4
    g2, g4 = build_grid(2, CU), build_grid(4, CU)
    q = np.array([2e7, 1e7, 5e6])
    e2 = eta(g2, (_mode(g2, [1, 0, 0]), LA), 0, q, CU)
    e4 = eta(g4, (_mode(g4, [2, 0, 0]), LA), 0, q, CU)
    assert abs(e4) / abs(e2) == pytest.approx(1 / math.sqrt(8), rel=1e-12)


def test_eta_conjugation_at_origin():
    g = build_grid(4, CU)
    q = np.array([2e7, -1e7, 5e6])
    for m in ([1, 0, 0], [1, 1, 0], [1, -1, 2]):
        k = _mode(g, m)
        for b in (LA, TA1, TA2):
            plus = eta(g, (k, b), 0, q, CU)
            minus = eta(g, (k, b), 0, -q, CU)
            assert minus == pytest.approx(np.conj(plus), rel=1e-14, abs=1e-300)
            assert minus == pytest.approx(-plus, rel=1e-14, abs=1e-300)


def test_eta_errors():
    g = build_grid(2, CU)
    zero = g.index_of([0, 0, 0])
    with pytest.raises(DomainError):
        eta(g, (zero, LA), 0, [1e7, 0, 0], CU)
    with pytest.raises(DomainError):
        eta(g, (_mode(g, [1, 0, 0]), LA), 8, [1e7, 0, 0], CU)


def test_index_of_folds_and_rejects():
    g = build_grid(4, CU)
    G = 2 * math.pi / g.lattice_param
    i = _mode(g, [1, 0, 0])
    assert g.index_of(g.k_points[i] + np.array([G, 0, 0])) == i
    with pytest.raises(DomainError):
        g.index_of([0.3 * G / 4, 0, 0])
