import numpy as np
import pytest

from kerr_twin.dynamics import CoherentProduct, evolve_coherent_product
from kerr_twin.errors import ResourceError
from kerr_twin.fock import ModelParams, TwoModeState, number_state
from kerr_twin.oracle import (
    OraclePropagator,
    analytic_block_energies,
    block_hamiltonian,
    block_hamiltonian_eigensystem,
    block_terms,
    default_n_max,
    oracle_evolve,
)

P = ModelParams(1.0, 0.2, 1.0, 1.0)


def test_vacuum_energy():
    E = np.linalg.eigvalsh(block_hamiltonian(P, 0))
    assert E == pytest.approx([P.hbar * P.omega0 + P.hbar ** 2 * P.g])


def test_single_quantum_block():
    # hbar w0 (N+1) + hbar^2 g (N+1)^2 = 2 + 4, split by +-lam
    E = np.linalg.eigvalsh(block_hamiltonian(P, 1))
    assert E == pytest.approx([5.8, 6.2], abs=1e-14)


def test_block_is_hermitian():
    H = block_hamiltonian(P, 7)
    assert np.abs(H - H.conj().T).max() == 0.0


def test_spectrum_matches_analytic():
    params = ModelParams(1.3, 0.45, 0.07, 0.6)
    spec = block_hamiltonian_eigensystem(params, 40)
    assert spec.spectral_residual() < 1e-9
    assert spec.unitarity_residual() < 1e-12


def test_analytic_energies_span():
    E = analytic_block_energies(P, 4)
    # equally spaced by 2 hbar lam
    assert np.allclose(np.diff(E), 2 * P.hbar * P.lam)


def test_terms_commute():
    for N in (1, 3, 6):
        t = block_terms(P, N)
        for a in ("V_lambda", "V_g"):
            C = t["H0"] @ t[a] - t[a] @ t["H0"]
            assert np.abs(C).max() < 1e-13
        C = t["V_g"] @ t["V_lambda"] - t["V_lambda"] @ t["V_g"]
        assert np.abs(C).max() < 1e-13
        assert np.allclose(t["H0"] + t["V_lambda"] + t["V_g"], block_hamiltonian(P, N))


def test_conservation_along_trajectory():
    init = CoherentProduct.from_quadratures(1.0, 0.2, -0.5, 1.1)
    psi = evolve_coherent_product(init, P, 0.0)
    prop = OraclePropagator(psi, P)
    E0, P0 = prop.energy(0.0), prop.block_populations(0.0)
    for t in np.linspace(0, 20, 11):
        assert abs(prop.energy(t) - E0) / E0 < 1e-12
        assert np.abs(prop.block_populations(t) - P0).max() < 1e-13
        assert prop.state(t).norm_sq == pytest.approx(P0.sum(), abs=1e-13)
    assert psi.norm_sq - P0.sum() < 1e-10


def test_number_state_phase():
    # |0,0> only picks up a phase
    s = oracle_evolve(number_state(0, 0), P, 1.3)
    phase = np.exp(-1j * (P.hbar * P.omega0 + P.hbar ** 2 * P.g) * 1.3 / P.hbar)
    assert s.amps[0, 0] == pytest.approx(phase, abs=1e-14)


def test_default_n_max():
    amps = np.zeros((4, 4), dtype=complex)
    amps[0, 2] = amps[1, 0] = 1 / np.sqrt(2)
    assert default_n_max(TwoModeState(amps)) == 2


def test_resource_error_when_n_max_too_small():
    init = CoherentProduct.from_quadratures(2.0, 2.0, 2.0, 2.0)
    with pytest.raises(ResourceError):
        OraclePropagator(evolve_coherent_product(init, P, 0.0), P, n_max=3)
