"""
Closed-form time evolution for product number states and product coherent
states, plus the closed-form reduced density matrix of the coherent family.

Phase convention: states are reported up to a global phase. For the coherent
family the amplitudes are c_n(gamma_1) c_m(gamma_2) exp(-i hbar g t (n+m)^2)
with gamma_k = beta_k(t) exp(-2 i hbar g t); every phase-sensitive quantity in
the package is derived from this single table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import gammaln

from .errors import InvalidInputError
from .fock import (
    DEFAULT_TAIL_TOL,
    ModelParams,
    PhasePoint,
    ReducedDensity,
    TwoModeState,
    coherent_vector,
    poisson_cutoff,
)


@dataclass(frozen=True)
class NumberProduct:
    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 0 or self.n2 < 0:
            raise InvalidInputError(f"photon numbers must be >= 0, got ({self.n1}, {self.n2})")

    @property
    def total(self) -> int:
        return self.n1 + self.n2


@dataclass(frozen=True)
class CoherentProduct:
    mode1: PhasePoint
    mode2: PhasePoint

    @classmethod
    def from_quadratures(cls, q1, p1, q2, p2) -> "CoherentProduct":
        return cls(PhasePoint(q1, p1), PhasePoint(q2, p2))

    @property
    def Lambda(self) -> float:
        return self.mode1.action + self.mode2.action

    def alphas(self, hbar: float) -> tuple[complex, complex]:
        return self.mode1.alpha(hbar), self.mode2.alpha(hbar)

    def mean_photons(self, hbar: float) -> float:
        """Total mean photon number, Lambda / (2 hbar)."""
        return self.Lambda / (2.0 * hbar)


@dataclass(frozen=True)
class BasisChangeTable:
    """c[i, j] connecting |n1, n2>_a to normal-mode kets |N-(i+j), i+j>_A."""

    n1: int
    n2: int
    coeffs: np.ndarray

    def normal_mode_amplitudes(self) -> np.ndarray:
        """Amplitude on |N-k, k>_A for k = 0..N.

        The alternating sum over i + j = k cancels badly in floating point, so
        the integer part sum (-1)^j C(n1, i) C(n2, j) is formed exactly and the
        common square-root factor is applied afterwards in log space.
        """
        n1, n2 = self.n1, self.n2
        N = n1 + n2
        out = np.zeros(N + 1)
        for k in range(N + 1):
            kraw = sum((-1) ** (k - i) * math.comb(n1, i) * math.comb(n2, k - i)
                       for i in range(max(0, k - n2), min(n1, k) + 1))
            if kraw == 0:
                continue
            log_root = 0.5 * (gammaln(N - k + 1) + gammaln(k + 1) - N * math.log(2.0)
                              - gammaln(n1 + 1) - gammaln(n2 + 1))
            out[k] = math.copysign(math.exp(_log_abs_int(kraw) + log_root), kraw)
        return out


def _log_abs_int(x: int) -> float:
    x = abs(x)
    if x < 2 ** 1000:
        return math.log(x)
    shift = x.bit_length() - 60
    return math.log(x >> shift) + shift * math.log(2.0)


def _log_binom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def basis_change_coeffs(n1: int, n2: int) -> BasisChangeTable:
    if n1 < 0 or n2 < 0:
        raise InvalidInputError("photon numbers must be >= 0")
    N = n1 + n2
    i = np.arange(n1 + 1)[:, None]
    j = np.arange(n2 + 1)[None, :]
    k = i + j
    log_mag = (
        _log_binom(n1, i) + _log_binom(n2, j)
        + 0.5 * (gammaln(N - k + 1) + gammaln(k + 1) - N * math.log(2.0)
                 - gammaln(n1 + 1) - gammaln(n2 + 1))
    )
    sign = np.where(j % 2 == 0, 1.0, -1.0)
    return BasisChangeTable(n1, n2, sign * np.exp(log_mag))


def normal_mode_matrix(N: int) -> np.ndarray:
    """Real orthogonal U with U[k, n1] = <N-k, k|_A |n1, N-n1>_a."""
    U = np.zeros((N + 1, N + 1))
    for n1 in range(N + 1):
        U[:, n1] = basis_change_coeffs(n1, N - n1).normal_mode_amplitudes()
    return U


def _log_pow(x: float, k: np.ndarray) -> np.ndarray:
    # log|x|^k with the 0^0 = 1 convention
    k = np.asarray(k)
    if x == 0.0:
        return np.where(k == 0, 0.0, -np.inf)
    return k * math.log(abs(x))


def rotation_coeffs(n1: int, n2: int, lam_t: float) -> np.ndarray:
    """Coefficient table c[i, m](t) of the binomial expansion of the evolved number state.

    Entry (i, m) is the amplitude carried to |n1 - i + m, n2 + i - m>: i quanta of
    mode 1 and m quanta of mode 2 have been transferred by the RWA rotation.
    """
    c, s = math.cos(lam_t), math.sin(lam_t)
    i = np.arange(n1 + 1)[:, None]
    m = np.arange(n2 + 1)[None, :]
    k = i + m
    log_mag = (
        _log_binom(n1, i) + _log_binom(n2, m)
        + 0.5 * (gammaln(n1 - i + m + 1) + gammaln(n2 + i - m + 1)
                 - gammaln(n1 + 1) - gammaln(n2 + 1))
        + _log_pow(c, n1 + n2 - k) + _log_pow(s, k)
    )
    with np.errstate(invalid="ignore"):
        sign = np.sign(c) ** (n1 + n2 - k) * np.sign(s) ** k
    sign = np.where(np.isfinite(log_mag), sign, 0.0)
    phase = (-1j) ** (k % 4)
    return np.where(np.isfinite(log_mag), sign * phase * np.exp(log_mag), 0.0)


EXACT_SUM_MAX_N = 40


def _block_amplitudes_mp(n1: int, n2: int, lam_t: float) -> np.ndarray:
    import mpmath

    N = n1 + n2
    with mpmath.workdps(30 + N // 2):
        c, s = mpmath.cos(mpmath.mpf(lam_t)), mpmath.sin(mpmath.mpf(lam_t))
        out = np.zeros(N + 1, dtype=complex)
        for l in range(N + 1):
            d = n1 - l  # i - m
            acc = mpmath.mpf(0)
            for m in range(max(0, -d), min(n2, n1 - d) + 1):
                i = m + d
                acc += ((-1) ** m * math.comb(n1, i) * math.comb(n2, m)
                        * c ** (N - i - m) * s ** (i + m))
            root = mpmath.sqrt(mpmath.factorial(l) * mpmath.factorial(N - l)
                               / (mpmath.factorial(n1) * mpmath.factorial(n2)))
            out[l] = complex(acc * root) * (-1j) ** (d % 4)
    return out


def number_block_amplitudes(n1: int, n2: int, lam_t: float) -> np.ndarray:
    """Amplitude on |l, N - l>, l = 0..N, for |n1, n2> rotated by the RWA term.

    Coherent sum of the binomial table along i - m = n1 - l. Above
    EXACT_SUM_MAX_N total quanta the alternating sum is done in extended precision.
    """
    N = n1 + n2
    if N > EXACT_SUM_MAX_N:
        return _block_amplitudes_mp(n1, n2, lam_t)
    coeffs = rotation_coeffs(n1, n2, lam_t)
    out = np.zeros(N + 1, dtype=complex)
    for i in range(n1 + 1):
        for m in range(n2 + 1):
            out[n1 - i + m] += coeffs[i, m]
    return out


def evolve_number_product(init: NumberProduct, params: ModelParams, t: float) -> TwoModeState:
    """|n1, n2> evolved to time t (global phase dropped).

    Only the RWA term acts non-trivially; the support stays on n + m = n1 + n2.
    """
    if not math.isfinite(t):
        raise InvalidInputError(f"t must be finite, got {t!r}")
    N = init.total
    vec = number_block_amplitudes(init.n1, init.n2, params.lam * t)
    amps = np.zeros((N + 1, N + 1), dtype=complex)
    l = np.arange(N + 1)
    amps[l, N - l] = vec
    return TwoModeState(amps)


def beta_t(init: CoherentProduct, params: ModelParams, t: float) -> tuple[complex, complex]:
    a1, a2 = init.alphas(params.hbar)
    c, s = math.cos(params.lam * t), math.sin(params.lam * t)
    rot = np.exp(-1j * params.omega0 * t)
    return complex((a1 * c - 1j * a2 * s) * rot), complex((a2 * c - 1j * a1 * s) * rot)


def kerr_labels(init: CoherentProduct, params: ModelParams, t: float) -> tuple[complex, complex]:
    """gamma_k = beta_k(t) exp(-2 i hbar g t)."""
    b1, b2 = beta_t(init, params, t)
    shift = np.exp(-2j * params.omega_g * t)
    return complex(b1 * shift), complex(b2 * shift)


def coherent_cutoffs(init: CoherentProduct, params: ModelParams, t: float,
                     tail_tol: float = DEFAULT_TAIL_TOL) -> tuple[int, int]:
    b1, b2 = beta_t(init, params, t)
    return poisson_cutoff(abs(b1) ** 2, tail_tol), poisson_cutoff(abs(b2) ** 2, tail_tol)


def evolve_coherent_product(init: CoherentProduct, params: ModelParams, t: float,
                            tail_tol: float = DEFAULT_TAIL_TOL,
                            cutoffs: tuple[int, int] | None = None) -> TwoModeState:
    if not math.isfinite(t):
        raise InvalidInputError(f"t must be finite, got {t!r}")
    g1, g2 = kerr_labels(init, params, t)
    if cutoffs is None:
        cutoffs = (poisson_cutoff(abs(g1) ** 2, tail_tol), poisson_cutoff(abs(g2) ** 2, tail_tol))
    c1, c2 = cutoffs
    n = np.arange(c1 + 1)[:, None]
    m = np.arange(c2 + 1)[None, :]
    theta = params.omega_g * t
    kerr = np.exp(-1j * theta * (n + m) ** 2)
    amps = np.outer(coherent_vector(g1, c1), coherent_vector(g2, c2)) * kerr
    return TwoModeState(amps)


def reduced_density_coherent(init: CoherentProduct, params: ModelParams, t: float,
                             keep: Literal[1, 2] = 1,
                             tail_tol: float = DEFAULT_TAIL_TOL,
                             cutoff: int | None = None) -> ReducedDensity:
    """Closed-form reduced density matrix of mode `keep`.

    rho[n, m] = c_n(g) conj(c_m(g)) exp(-i theta (n^2 - m^2))
                * exp(|g_o|^2 (exp(-2 i theta (n - m)) - 1)),
    theta = hbar g t, g the kept label and g_o the traced one.
    """
    if keep not in (1, 2):
        raise InvalidInputError(f"keep must be 1 or 2, got {keep!r}")
    g1, g2 = kerr_labels(init, params, t)
    kept, other = (g1, g2) if keep == 1 else (g2, g1)
    if cutoff is None:
        cutoff = poisson_cutoff(abs(kept) ** 2, tail_tol)
    theta = params.omega_g * t
    c = coherent_vector(kept, cutoff)
    n = np.arange(cutoff + 1)
    d = n[:, None] - n[None, :]
    sq = n[:, None] ** 2 - n[None, :] ** 2
    env = np.exp(abs(other) ** 2 * (np.exp(-2j * theta * d) - 1.0))
    rho = np.outer(c, c.conj()) * np.exp(-1j * theta * sq) * env
    return ReducedDensity(0.5 * (rho + rho.conj().T))
