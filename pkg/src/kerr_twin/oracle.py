"""
Brute-force propagator used as the independent reference for every closed form.

The Hamiltonian is assembled from its matrix elements in the bare |n, m> basis.
Total photon number is conserved, so each block spanned by |N-k, k>,
k = 0..N, is diagonalised separately with a dense Hermitian eigensolver and
states are propagated spectrally. Nothing here reuses the closed-form modules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, NumericalError, ResourceError
from .fock import ModelParams, TwoModeState

BLOCK_SUPPORT_TOL = 1e-10
DEFAULT_MASS_TOL = 1e-14


def block_hamiltonian(params: ModelParams, N: int) -> np.ndarray:
    """Matrix of H0 + V_lambda + V_g on the block basis |N-k, k>, in energy units."""
    hb = params.hbar
    k = np.arange(N + 1)
    n1 = N - k
    n2 = k
    free = hb * params.omega0 * (n1 + 0.5 + n2 + 0.5)
    kerr = hb * hb * params.g * (n1 + n2 + 1.0) ** 2
    H = np.diag(free + kerr).astype(complex)
    # <N-k-1, k+1| a1 a2^dag |N-k, k> = sqrt(N-k) sqrt(k+1)
    off = hb * params.lam * np.sqrt(n1[:-1] * (n2[:-1] + 1.0))
    H += np.diag(off, 1) + np.diag(off, -1)
    return H


def block_terms(params: ModelParams, N: int) -> dict[str, np.ndarray]:
    """The three Hamiltonian pieces separately, for commutator checks."""
    hb = params.hbar
    k = np.arange(N + 1)
    n1, n2 = N - k, k
    H0 = np.diag(hb * params.omega0 * (n1 + n2 + 1.0)).astype(complex)
    Vg = np.diag(hb * hb * params.g * (n1 + n2 + 1.0) ** 2).astype(complex)
    off = hb * params.lam * np.sqrt(n1[:-1] * (n2[:-1] + 1.0))
    Vl = (np.diag(off, 1) + np.diag(off, -1)).astype(complex)
    return {"H0": H0, "V_lambda": Vl, "V_g": Vg}


def analytic_block_energies(params: ModelParams, N: int) -> np.ndarray:
    hb = params.hbar
    k = np.arange(N + 1)
    E = (hb * (params.omega0 + params.lam) * (N - k + 0.5)
         + hb * (params.omega0 - params.lam) * (k + 0.5)
         + hb * hb * params.g * (N + 1.0) ** 2)
    return np.sort(E)


@dataclass(frozen=True)
class BlockSpectrum:
    params: ModelParams
    n_max: int
    energies: list = field(repr=False)
    vectors: list = field(repr=False)

    def unitarity_residual(self) -> float:
        worst = 0.0
        for V in self.vectors:
            worst = max(worst, float(np.abs(V.conj().T @ V - np.eye(V.shape[0])).max()))
        return worst

    def spectral_residual(self) -> float:
        """Max |E_numeric - E_analytic| over all blocks."""
        worst = 0.0
        for N, E in enumerate(self.energies):
            worst = max(worst, float(np.abs(np.sort(E) - analytic_block_energies(self.params, N)).max()))
        return worst


def block_hamiltonian_eigensystem(params: ModelParams, n_max: int) -> BlockSpectrum:
    if n_max < 0:
        raise InvalidInputError(f"n_max must be >= 0, got {n_max}")
    energies, vectors = [], []
    for N in range(n_max + 1):
        try:
            E, V = np.linalg.eigh(block_hamiltonian(params, N))
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"eigensolver failed on block N={N}: {exc}") from exc
        energies.append(E)
        vectors.append(V)
    return BlockSpectrum(params, n_max, energies, vectors)


def _block_vectors(state: TwoModeState, N: int) -> np.ndarray:
    k = np.arange(N + 1)
    n1, n2 = N - k, k
    ok = (n1 <= state.cutoff1) & (n2 <= state.cutoff2)
    out = np.zeros(N + 1, dtype=complex)
    out[ok] = state.amps[n1[ok], n2[ok]]
    return out


def default_n_max(state: TwoModeState, mass_tol: float = DEFAULT_MASS_TOL) -> int:
    """Smallest N_max whose blocks hold all but mass_tol of the state."""
    pops = state.block_populations()
    tail = np.cumsum(pops[::-1])[::-1]  # tail[N] = mass at total >= N
    for N in range(len(pops)):
        if N + 1 >= len(pops) or tail[N + 1] < mass_tol:
            return N
    return len(pops) - 1


class OraclePropagator:
    """Spectral propagator for one initial state; reuse it across a time sweep."""

    def __init__(self, state: TwoModeState, params: ModelParams, n_max: int | None = None):
        if n_max is None:
            n_max = default_n_max(state)
        pops = state.block_populations()
        beyond = float(pops[n_max + 1:].sum())
        if beyond > BLOCK_SUPPORT_TOL and n_max < len(pops) - 1:
            raise ResourceError(f"state carries mass {beyond:.3g} beyond N_max={n_max}")
        self.params = params
        self.n_max = n_max
        self.spectrum = block_hamiltonian_eigensystem(params, n_max)
        # expansion coefficients of the initial state in each block eigenbasis
        self._coeffs = []
        for N in range(n_max + 1):
            v = _block_vectors(state, N)
            self._coeffs.append(self.spectrum.vectors[N].conj().T @ v)

    def block_amplitudes(self, t: float) -> list[np.ndarray]:
        hb = self.params.hbar
        out = []
        for N in range(self.n_max + 1):
            E = self.spectrum.energies[N]
            out.append(self.spectrum.vectors[N] @ (np.exp(-1j * E * t / hb) * self._coeffs[N]))
        return out

    def state(self, t: float) -> TwoModeState:
        if not math.isfinite(t):
            raise InvalidInputError(f"t must be finite, got {t!r}")
        amps = np.zeros((self.n_max + 1, self.n_max + 1), dtype=complex)
        for N, v in enumerate(self.block_amplitudes(t)):
            k = np.arange(N + 1)
            amps[N - k, k] = v
        return TwoModeState(amps)

    def energy(self, t: float) -> float:
        total = 0.0
        for N, v in enumerate(self.block_amplitudes(t)):
            total += float(np.real(np.vdot(v, block_hamiltonian(self.params, N) @ v)))
        return total

    def block_populations(self, t: float) -> np.ndarray:
        return np.array([float(np.vdot(v, v).real) for v in self.block_amplitudes(t)])


def oracle_evolve(state: TwoModeState, params: ModelParams, t: float,
                  n_max: int | None = None) -> TwoModeState:
    return OraclePropagator(state, params, n_max).state(t)
