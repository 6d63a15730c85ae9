import math

import numpy as np
import pytest

from kerr_twin.dynamics import (
    CoherentProduct,
    NumberProduct,
    evolve_coherent_product,
    evolve_number_product,
    reduced_density_coherent,
)
from kerr_twin.entropy import (
    entropy_sample,
    linear_entropy,
    number_entropy_spectrum,
    purity_and_linear_entropy,
    sle_coherent_closed,
    von_neumann_entropy,
)
from kerr_twin.errors import NumericalError
from kerr_twin.fock import ModelParams, ReducedDensity, partial_trace
from kerr_twin.oracle import OraclePropagator

from conftest import fig3_params

LAM = 0.7
P = ModelParams(1.0, LAM, 0.05)


def _xlogx(x):
    x = np.asarray(x, float)
    return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)


# hand-written closed forms for the three simplest number inputs
def delta_10(t):
    return 0.5 * np.sin(2 * LAM * t) ** 2


def delta_11(t):
    return np.sin(2 * LAM * t) ** 2 / 4 * (5 + 3 * np.cos(4 * LAM * t))


def delta_20(t):
    return np.sin(2 * LAM * t) ** 2 / 16 * (13 + 3 * np.cos(4 * LAM * t))


def svn_10(t):
    c2, s2 = np.cos(LAM * t) ** 2, np.sin(LAM * t) ** 2
    return -_xlogx(c2) - _xlogx(s2)


def svn_11(t):
    c2, s2 = np.cos(2 * LAM * t) ** 2, np.sin(2 * LAM * t) ** 2
    return -_xlogx(c2) - 2 * _xlogx(s2 / 2)


def svn_20(t):
    c4, s4 = np.cos(LAM * t) ** 4, np.sin(LAM * t) ** 4
    m = np.sin(2 * LAM * t) ** 2 / 2
    return -_xlogx(c4) - _xlogx(s4) - _xlogx(m)


CASES = [((1, 0), delta_10, svn_10), ((1, 1), delta_11, svn_11), ((2, 0), delta_20, svn_20)]


@pytest.mark.parametrize("ns,delta,svn", CASES)
def test_number_closed_forms(ns, delta, svn):
    for t in np.linspace(0, math.pi / LAM, 57):
        spec = number_entropy_spectrum(NumberProduct(*ns), LAM, t)
        assert spec.delta == pytest.approx(float(delta(t)), abs=1e-12)
        assert spec.s_vn == pytest.approx(float(svn(t)), abs=1e-10)


@pytest.mark.parametrize("ns,delta,svn", CASES)
def test_number_spectrum_vs_oracle(ns, delta, svn):
    init = NumberProduct(*ns)
    prop = OraclePropagator(evolve_number_product(init, P, 0.0), P)
    for t in np.linspace(0, math.pi / LAM, 13):
        rho = partial_trace(prop.state(t))
        assert linear_entropy(rho) == pytest.approx(float(delta(t)), abs=1e-10)
        assert von_neumann_entropy(rho) == pytest.approx(float(svn(t)), abs=1e-8)


def test_maximal_entanglement_10():
    # at lam t = pi/4 the mode shares one qubit of entanglement
    spec = number_entropy_spectrum(NumberProduct(1, 0), LAM, math.pi / (4 * LAM))
    assert spec.s_vn == pytest.approx(math.log(2), abs=1e-14)
    assert spec.delta == pytest.approx(0.5, abs=1e-14)


@pytest.mark.parametrize("n1,n2", [(3, 0), (3, 3), (5, 2), (0, 4)])
def test_spectrum_sums_to_one(n1, n2):
    for t in (0.1, 1.3, 2.9):
        ev = number_entropy_spectrum(NumberProduct(n1, n2), LAM, t).eigenvalues
        assert ev.sum() == pytest.approx(1.0, abs=1e-13)
        assert ev.min() >= -1e-15


@pytest.mark.parametrize("n1,n2", [(1, 0), (2, 1), (3, 3)])
def test_number_entropy_vanishes_at_swap_times(n1, n2):
    for l in range(4):
        t = (math.pi / LAM) * (l + 0.5)
        spec = number_entropy_spectrum(NumberProduct(n1, n2), LAM, t)
        assert spec.delta == pytest.approx(0.0, abs=1e-12)


def test_number_spectrum_matches_direct_partial_trace():
    init = NumberProduct(3, 2)
    t = 0.83
    rho = partial_trace(evolve_number_product(init, P, t))
    spec = number_entropy_spectrum(init, LAM, t)
    assert np.allclose(np.diag(rho.rho).real, spec.eigenvalues, atol=1e-14)
    # the reduced state is diagonal for number inputs
    assert np.abs(rho.rho - np.diag(np.diag(rho.rho))).max() < 1e-15


def test_pure_state_entropies_zero():
    rho = ReducedDensity(np.diag([1.0, 0.0, 0.0]).astype(complex))
    assert linear_entropy(rho) == 0.0
    assert von_neumann_entropy(rho) == 0.0
    assert purity_and_linear_entropy(rho) == (1.0, 0.0)


def test_maximally_mixed_entropies():
    d = 5
    rho = ReducedDensity(np.eye(d, dtype=complex) / d)
    s = entropy_sample(0.0, rho)
    assert s.delta == pytest.approx(1 - 1 / d, abs=1e-15)
    assert s.s_vn == pytest.approx(math.log(d), abs=1e-14)


def test_negative_eigenvalue_raises():
    rho = ReducedDensity(np.diag([1.1, -0.1]).astype(complex))
    with pytest.raises(NumericalError):
        von_neumann_entropy(rho)


def test_sle_closed_vs_reduced_density(qp1):
    params = fig3_params(0.25)
    for t in (0.0, 1.7, 6.3, 15.0, 31.4):
        closed = sle_coherent_closed(qp1, params, t)
        rho = reduced_density_coherent(qp1, params, t)
        assert closed == pytest.approx(linear_entropy(rho), abs=1e-12)


def test_sle_closed_vs_oracle(qp1):
    params = fig3_params(0.125)
    prop = OraclePropagator(evolve_coherent_product(qp1, params, 0.0), params)
    for t in (0.9, 4.4, 12.0, 27.5):
        direct = linear_entropy(partial_trace(prop.state(t)))
        assert sle_coherent_closed(qp1, params, t) == pytest.approx(direct, abs=1e-9)


def test_sle_zero_for_g0():
    params = ModelParams(1.0, 0.3, 0.0)
    init = CoherentProduct.from_quadratures(1.2, -0.4, 0.3, 2.0)
    for t in np.linspace(0, 30, 31):
        assert abs(sle_coherent_closed(init, params, t)) < 1e-13


def test_sle_zero_at_recoherence(qp1):
    params = fig3_params(0.25)
    T1 = math.pi / params.omega_g
    for l in (1, 2, 3):
        assert abs(sle_coherent_closed(qp1, params, l * T1)) < 1e-12


def test_sle_zero_for_vacuum_partner():
    # mode 2 empty at all times when both amplitudes stay zero: no entanglement
    init = CoherentProduct.from_quadratures(0.0, 0.0, 0.0, 0.0)
    assert sle_coherent_closed(init, fig3_params(0.25), 3.0) == pytest.approx(0.0, abs=1e-15)
