import math

import numpy as np
import pytest

from kerr_twin.dynamics import (
    CoherentProduct,
    evolve_coherent_product,
    reduced_density_coherent,
)
from kerr_twin.errors import AccuracyError, InvalidInputError
from kerr_twin.fock import ModelParams, ReducedDensity, coherent_vector, partial_trace
from kerr_twin.oracle import OraclePropagator
from kerr_twin.phase_space import (
    GridSpec,
    collapse_envelope,
    count_angular_peaks,
    husimi_grid,
    husimi_points,
    mean_annihilation_closed,
    quadrature_mean_closed,
    quadrature_moments_numeric,
)

from conftest import fig1_params, fig3_params


def _pure(vec):
    return ReducedDensity(np.outer(vec, vec.conj()))


def test_vacuum_widths():
    for hbar in (1.0, 0.1):
        m = quadrature_moments_numeric(_pure(coherent_vector(0.0, 30)), hbar)
        assert m.q_mean == pytest.approx(0.0, abs=1e-15)
        assert m.dq == pytest.approx(math.sqrt(hbar / 2), abs=1e-13)
        assert m.dp == pytest.approx(math.sqrt(hbar / 2), abs=1e-13)


def test_coherent_moments():
    hbar = 0.5
    q, p = 1.3, -0.7
    alpha = (q + 1j * p) / math.sqrt(2 * hbar)
    m = quadrature_moments_numeric(_pure(coherent_vector(alpha, 60)), hbar)
    assert m.q_mean == pytest.approx(q, abs=1e-12)
    assert m.p_mean == pytest.approx(p, abs=1e-12)
    assert m.dq * m.dp == pytest.approx(hbar / 2, abs=1e-12)


def test_number_state_heisenberg():
    hbar = 1.0
    for n in range(5):
        v = np.zeros(8, dtype=complex)
        v[n] = 1
        m = quadrature_moments_numeric(_pure(v), hbar)
        assert m.dq * m.dp == pytest.approx(hbar * (n + 0.5), abs=1e-12)


def test_boundary_occupation_raises():
    v = np.zeros(4, dtype=complex)
    v[3] = 1
    with pytest.raises(AccuracyError):
        quadrature_moments_numeric(_pure(v), 1.0)


def test_vacuum_q_at_origin():
    Q = husimi_points(_pure(coherent_vector(0.0, 10)), np.array(0.0), np.array(0.0), 1.0)
    assert float(Q) == pytest.approx(1 / math.pi, abs=1e-15)


def test_coherent_q_is_gaussian():
    hbar = 0.3
    alpha = 0.8 - 0.5j
    rho = _pure(coherent_vector(alpha, 60))
    q = np.linspace(-2, 2, 9)
    p = np.linspace(-1.5, 1.5, 7)
    Q = husimi_points(rho, q[:, None], p[None, :], hbar)
    g = (q[:, None] + 1j * p[None, :]) / math.sqrt(2 * hbar)
    assert np.allclose(Q, np.exp(-np.abs(g - alpha) ** 2) / math.pi, atol=1e-13)


def test_q_grid_normalization(qp1):
    params = fig3_params(0.25)
    rho = reduced_density_coherent(qp1, params, 7.0)
    grid = husimi_grid(rho, GridSpec.default(qp1.Lambda), params.hbar)
    assert grid.values.shape == (201, 201)
    assert grid.riemann_sum() == pytest.approx(1.0, abs=1e-3)
    assert grid.values.min() >= 0.0


def test_grid_spec_validation():
    with pytest.raises(InvalidInputError):
        GridSpec(1.0, -1.0, -1.0, 1.0)
    with pytest.raises(InvalidInputError):
        GridSpec(-1.0, 1.0, -1.0, 1.0, nq=1)
    with pytest.raises(InvalidInputError):
        GridSpec(-1.0, 1.0, -1.0, 1.0, nq=5000, np=5000)


def test_quadrature_closed_vs_oracle(qp1):
    params = fig1_params()
    prop = OraclePropagator(evolve_coherent_product(qp1, params, 0.0), params)
    for t in np.linspace(0.0, math.pi, 9):
        for mode in (1, 2):
            q, p = quadrature_mean_closed(qp1, params, t, mode)
            m = quadrature_moments_numeric(partial_trace(prop.state(t), mode), params.hbar)
            assert q == pytest.approx(m.q_mean, abs=1e-9)
            assert p == pytest.approx(m.p_mean, abs=1e-9)


def test_mean_annihilation_g0_is_classical():
    params = ModelParams(1.0, 0.3, 0.0)
    init = CoherentProduct.from_quadratures(1.0, 0.5, -0.3, 0.2)
    a1, a2 = init.alphas(params.hbar)
    t = 2.1
    lt = params.lam * t
    b1 = (a1 * math.cos(lt) - 1j * a2 * math.sin(lt)) * np.exp(-1j * t)
    assert mean_annihilation_closed(init, params, t, 1) == pytest.approx(b1, abs=1e-14)


def test_envelope_values(qp1):
    params = fig1_params()
    nbar = qp1.mean_photons(params.hbar)
    assert nbar == pytest.approx(2.0)
    T1 = math.pi / params.omega_g
    assert collapse_envelope(qp1, params, 0.0) == 1.0
    assert collapse_envelope(qp1, params, T1 / 2) == pytest.approx(math.exp(-2 * nbar), rel=1e-14)
    assert collapse_envelope(qp1, params, T1) == pytest.approx(1.0, abs=1e-14)
    for t in (0.3, 0.9, 1.7):
        assert collapse_envelope(qp1, params, t) == pytest.approx(
            collapse_envelope(qp1, params, t + T1), rel=1e-12)


def test_envelope_matches_mean_modulus(qp1):
    params = fig1_params()
    for t in (0.2, 0.77, 1.4):
        a = mean_annihilation_closed(qp1, params, t, 1)
        from kerr_twin.dynamics import beta_t
        b1 = beta_t(qp1, params, t)[0]
        assert abs(a) / abs(b1) == pytest.approx(collapse_envelope(qp1, params, t), rel=1e-12)


def test_mode_argument_checked(qp1):
    with pytest.raises(InvalidInputError):
        mean_annihilation_closed(qp1, fig1_params(), 0.1, 3)


@pytest.mark.parametrize("M", [2, 3, 4])
def test_angular_peaks_at_rational_times(qp1, fig5, T1_fig5, M):
    rho = reduced_density_coherent(qp1, fig5, T1_fig5 / M)
    peaks = count_angular_peaks(rho, fig5.hbar, 3.0)
    assert peaks.count == M


def test_single_peak_for_coherent_state():
    hbar = 0.1
    rho = _pure(coherent_vector((1.0 + 1.0j) / math.sqrt(2 * hbar), 80))
    peaks = count_angular_peaks(rho, hbar, 3.0)
    assert peaks.count == 1
    assert peaks.angles_deg[0] == pytest.approx(45.0, abs=1.0)
    assert peaks.radius == pytest.approx(math.sqrt(2), abs=0.05)
