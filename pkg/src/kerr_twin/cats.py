"""
Mode-1 reduced state at t = (r/s) pi/(hbar g) written as a mixture of
superpositions of coherent states.

At these instants the Kerr phase exp(-i pi (r/s) n^2) is periodic in n with
period l and expands in l discrete Fourier components a_q, which turns each
Kerr-dressed coherent state into a finite superposition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import CoherentProduct, beta_t
from .errors import InvalidInputError
from .fock import DEFAULT_TAIL_TOL, ModelParams, ReducedDensity, coherent_vectors, poisson_cutoff


def _check_pair(r: int, s: int) -> None:
    if not (0 < r < s):
        raise InvalidInputError(f"need 0 < r < s, got r={r}, s={s}")
    if math.gcd(r, s) != 1:
        raise InvalidInputError(f"r={r} and s={s} are not coprime")


def l_rule(r: int, s: int) -> int:
    _check_pair(r, s)
    return 2 * s if (r % 2 == 1 and s % 2 == 1) else s


def dft_coeffs(r: int, s: int) -> np.ndarray:
    """a_q = (1/l) sum_k exp(-i pi k (k r/s - 2 q/l)), q = 0..l-1."""
    l = l_rule(r, s)
    k = np.arange(l)
    # k^2 r mod 2s keeps the quadratic phase exact for large k
    quad = np.exp(-1j * math.pi * ((k * k * r) % (2 * s)) / s)
    lin = np.exp(2j * math.pi * np.outer(np.arange(l), k) / l)
    return lin @ quad / l


def kerr_phase_residual(r: int, s: int, n_periods: int = 4) -> float:
    """max_n |exp(-i pi n^2 r/s) - sum_q a_q exp(-2 pi i n q/l)| for n in [0, n_periods l)."""
    a = dft_coeffs(r, s)
    l = a.size
    n = np.arange(n_periods * l)
    lhs = np.exp(-1j * math.pi * ((n * n * r) % (2 * s)) / s)
    rhs = np.exp(-2j * math.pi * np.outer(n, np.arange(l)) / l) @ a
    return float(np.abs(lhs - rhs).max())


@dataclass(frozen=True)
class CatDecomposition:
    r: int
    s: int
    l: int
    t: float
    a: np.ndarray
    eta: np.ndarray              # eta[k-1, q]
    xi: np.ndarray               # raw weights, paired with unnormalised cats
    cats: np.ndarray = field(repr=False)  # cats[m] = sum_q a_q |eta_1q e^{-2 pi i m r/s}>
    cat_norms: np.ndarray = field(repr=False)
    rho: ReducedDensity = field(repr=False)

    @property
    def weights(self) -> np.ndarray:
        """Mixture weights for the normalised cat states; they sum to Tr rho."""
        return self.xi * self.cat_norms ** 2

    def cat_labels(self, m: int) -> np.ndarray:
        return self.eta[0] * np.exp(-2j * math.pi * m * self.r / self.s)


def cat_mixture(init: CoherentProduct, params: ModelParams, r: int, s: int,
                tail_tol: float = DEFAULT_TAIL_TOL,
                cutoff: int | None = None) -> CatDecomposition:
    """Build the cat-state mixture for rho_1 at t_{r,s} and reconstruct rho_1 from it."""
    if params.g <= 0:
        raise InvalidInputError("cat decomposition needs g > 0")
    l = l_rule(r, s)
    a = dft_coeffs(r, s)
    t = math.pi / params.omega_g * r / s
    b1, b2 = beta_t(init, params, t)
    q = np.arange(l)
    rot = np.exp(-2j * math.pi * (q / l + r / s))
    eta = np.vstack([b1 * rot, b2 * rot])

    m_max = poisson_cutoff(abs(b2) ** 2, tail_tol)
    if cutoff is None:
        cutoff = poisson_cutoff(abs(b1) ** 2, tail_tol)
    ms = np.arange(m_max + 1)

    # xi_m = |sum_p a_p c_m(eta_2p)|^2
    c2 = coherent_vectors(eta[1], m_max)          # (l, m_max+1)
    xi = np.abs(a @ c2) ** 2

    cats = np.empty((m_max + 1, cutoff + 1), dtype=complex)
    for m in ms:
        labels = eta[0] * np.exp(-2j * math.pi * m * r / s)
        cats[m] = a @ coherent_vectors(labels, cutoff)
    norms = np.linalg.norm(cats, axis=1)

    rho = (cats.T * xi) @ cats.conj()
    rho = 0.5 * (rho + rho.conj().T)
    return CatDecomposition(r, s, l, t, a, eta, xi, cats, norms, ReducedDensity(rho))
