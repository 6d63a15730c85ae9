"""Subsystem linear and von Neumann entropies (natural log)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from .dynamics import CoherentProduct, NumberProduct, beta_t, number_block_amplitudes
from .errors import NumericalError
from .fock import DEFAULT_TAIL_TOL, ModelParams, ReducedDensity, poisson_cutoff

NEG_EIG_TOL = 1e-10


@dataclass(frozen=True)
class EntropySample:
    t: float
    delta: float
    s_vn: float


def linear_entropy(rho: ReducedDensity) -> float:
    """1 - Tr(rho^2), using Tr(rho^2) = sum |rho_nm|^2 for Hermitian rho."""
    return 1.0 - float(np.sum(np.abs(rho.rho) ** 2))


def purity_and_linear_entropy(rho: ReducedDensity) -> tuple[float, float]:
    delta = linear_entropy(rho)
    return 1.0 - delta, delta


def _entropy_from_spectrum(eps: np.ndarray) -> float:
    eps = np.asarray(eps, dtype=float)
    if eps.size and eps.min() < -NEG_EIG_TOL:
        raise NumericalError(f"density matrix has eigenvalue {eps.min():.3g} < -{NEG_EIG_TOL}")
    eps = eps[eps > 0]
    return float(-np.sum(eps * np.log(eps))) + 0.0


def von_neumann_entropy(rho: ReducedDensity) -> float:
    return _entropy_from_spectrum(rho.eigenvalues())


def entropy_sample(t: float, rho: ReducedDensity) -> EntropySample:
    return EntropySample(t, linear_entropy(rho), von_neumann_entropy(rho))


@dataclass(frozen=True)
class NumberEntropySpectrum:
    """Diagonal of the mode-1 reduced density for a number-state input."""

    eigenvalues: np.ndarray

    @property
    def delta(self) -> float:
        return 1.0 - float(np.sum(self.eigenvalues ** 2))

    @property
    def s_vn(self) -> float:
        return _entropy_from_spectrum(self.eigenvalues)


def number_entropy_spectrum(init: NumberProduct, lam: float, t: float) -> NumberEntropySpectrum:
    """lambda_l(t) = |sum_{i - m = n1 - l} c_{i,m}(t)|^2, l = 0..n1+n2.

    Terms sharing l land on the same ket |l, N - l> and add coherently. The
    reduced state is diagonal in the Fock basis, so these are its eigenvalues.
    """
    amp = number_block_amplitudes(init.n1, init.n2, lam * t)
    return NumberEntropySpectrum(np.abs(amp) ** 2)


def sle_coherent_closed(init: CoherentProduct, params: ModelParams, t: float,
                        tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """Closed-form mode-1 linear entropy for the coherent family.

    1 - e^{-2|b1|^2} sum_{n,m} |b1|^{2n}/n! |b1|^{2m}/m! exp(-4|b2|^2 sin^2(hbar g t (n-m)))
    """
    b1, b2 = beta_t(init, params, t)
    mu1, mu2 = abs(b1) ** 2, abs(b2) ** 2
    N = poisson_cutoff(mu1, tail_tol)
    n = np.arange(N + 1)
    P = poisson.pmf(n, mu1) if mu1 > 0 else (n == 0).astype(float)
    P /= P.sum()  # the dropped tail would otherwise show up as spurious entropy
    theta = params.omega_g * t
    # exp(-4 mu2 sin^2) depends only on n - m: fold the double sum onto lags
    lags = np.arange(N + 1)
    kern = np.exp(-4.0 * mu2 * np.sin(theta * lags) ** 2)
    corr = np.correlate(P, P, mode="full")[N:]  # corr[d] = sum_n P[n] P[n+d]
    total = corr[0] * kern[0] + 2.0 * np.sum(corr[1:] * kern[1:])
    return float(1.0 - total)
