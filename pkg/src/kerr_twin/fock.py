"""
Truncated Fock-space value types and basis operations.

All amplitudes are dimensionless: a phase-space point (q, p) maps to the
coherent label alpha = (q + i p) / sqrt(2 hbar). Arrays held by the value
types are made read-only on construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import InvalidInputError, ResourceError

DEFAULT_TAIL_TOL = 1e-12
MAX_CUTOFF = 4000


def _frozen(arr) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the two-mode Hamiltonian (g' = 2g fixed)."""

    omega0: float
    lam: float
    g: float
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("omega0", "lam", "g", "hbar"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidInputError(f"{name} must be finite, got {v!r}")
            if v < 0:
                raise InvalidInputError(f"{name} must be >= 0, got {v!r}")
        if self.hbar <= 0:
            raise InvalidInputError(f"hbar must be > 0, got {self.hbar!r}")

    @property
    def omega_g(self) -> float:
        return self.hbar * self.g


@dataclass(frozen=True)
class PhasePoint:
    q: float
    p: float

    def __post_init__(self):
        if not (math.isfinite(self.q) and math.isfinite(self.p)):
            raise InvalidInputError(f"phase point must be finite, got ({self.q}, {self.p})")

    def alpha(self, hbar: float) -> complex:
        return complex(self.q, self.p) / math.sqrt(2.0 * hbar)

    @property
    def action(self) -> float:
        return self.q ** 2 + self.p ** 2


@dataclass(frozen=True)
class SingleModeAmplitudes:
    amps: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amps", _frozen(self.amps))
        if self.amps.ndim != 1 or self.amps.size == 0:
            raise InvalidInputError("single-mode amplitudes must be a non-empty vector")
        if self.norm_sq > 1.0 + 1e-12:
            raise InvalidInputError(f"amplitudes not normalisable: sum |c|^2 = {self.norm_sq}")

    @property
    def cutoff(self) -> int:
        return self.amps.size - 1

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    @property
    def norm_deficit(self) -> float:
        return max(0.0, 1.0 - self.norm_sq)


@dataclass(frozen=True)
class TwoModeState:
    """Amplitude table amps[n, m] over |n, m>, n <= cutoff1, m <= cutoff2."""

    amps: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amps", _frozen(self.amps))
        if self.amps.ndim != 2:
            raise InvalidInputError("two-mode amplitudes must be a 2-d table")
        if not np.all(np.isfinite(self.amps)):
            raise InvalidInputError("two-mode amplitudes must be finite")

    @property
    def cutoff1(self) -> int:
        return self.amps.shape[0] - 1

    @property
    def cutoff2(self) -> int:
        return self.amps.shape[1] - 1

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    @property
    def norm_deficit(self) -> float:
        return max(0.0, 1.0 - self.norm_sq)

    def mean_numbers(self) -> tuple[float, float]:
        prob = np.abs(self.amps) ** 2
        n = np.arange(self.cutoff1 + 1)
        m = np.arange(self.cutoff2 + 1)
        return float(prob.sum(axis=1) @ n), float(prob.sum(axis=0) @ m)

    def mean_total_number(self) -> float:
        return sum(self.mean_numbers())

    def block_populations(self) -> np.ndarray:
        """Probability of each total photon number N = n + m."""
        prob = np.abs(self.amps) ** 2
        out = np.zeros(self.cutoff1 + self.cutoff2 + 1)
        for n in range(self.cutoff1 + 1):
            out[n:n + self.cutoff2 + 1] += prob[n]
        return out

    def padded(self, cutoff1: int, cutoff2: int) -> "TwoModeState":
        if cutoff1 < self.cutoff1 or cutoff2 < self.cutoff2:
            # only drop rows/columns that carry no weight
            extra = np.abs(self.amps[cutoff1 + 1:, :]).max(initial=0.0)
            extra = max(extra, np.abs(self.amps[:, cutoff2 + 1:]).max(initial=0.0))
            if extra > 0:
                raise InvalidInputError("cannot shrink a state with support beyond the new cutoff")
        out = np.zeros((cutoff1 + 1, cutoff2 + 1), dtype=complex)
        c1 = min(cutoff1, self.cutoff1) + 1
        c2 = min(cutoff2, self.cutoff2) + 1
        out[:c1, :c2] = self.amps[:c1, :c2]
        return TwoModeState(out)


@dataclass(frozen=True)
class ReducedDensity:
    rho: np.ndarray
    herm_tol: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "rho", _frozen(self.rho))
        r = self.rho
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise InvalidInputError("density matrix must be square")
        scale = max(1.0, float(np.abs(r).max(initial=0.0)))
        if np.abs(r - r.conj().T).max(initial=0.0) > self.herm_tol * scale:
            raise InvalidInputError("density matrix is not Hermitian")

    @property
    def cutoff(self) -> int:
        return self.rho.shape[0] - 1

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.rho)

    def padded(self, cutoff: int) -> "ReducedDensity":
        if cutoff <= self.cutoff:
            return self
        out = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        out[:self.cutoff + 1, :self.cutoff + 1] = self.rho
        return ReducedDensity(out)


def poisson_cutoff(mean: float, tail_tol: float = DEFAULT_TAIL_TOL) -> int:
    """Smallest N whose Poisson(mean) tail mass beyond N is below tail_tol."""
    if not 0.0 < tail_tol < 1.0:
        raise InvalidInputError(f"tail_tol must lie in (0, 1), got {tail_tol!r}")
    if not math.isfinite(mean) or mean < 0:
        raise InvalidInputError(f"mean photon number must be finite and >= 0, got {mean!r}")
    if mean == 0.0:
        return 0
    hi = int(mean + 20.0 * math.sqrt(mean) + 60)
    ns = np.arange(hi + 1)
    below = np.nonzero(poisson.sf(ns, mean) < tail_tol)[0]
    if below.size == 0 or below[0] > MAX_CUTOFF:
        raise ResourceError(f"cutoff for mean {mean:g} exceeds hard limit {MAX_CUTOFF}")
    return int(below[0])


def coherent_vector(alpha: complex, cutoff: int) -> np.ndarray:
    """c_n(alpha) = exp(-|alpha|^2/2) alpha^n / sqrt(n!) for n = 0..cutoff."""
    n = np.arange(cutoff + 1)
    r = abs(alpha)
    if r == 0.0:
        out = np.zeros(cutoff + 1, dtype=complex)
        out[0] = 1.0
        return out
    log_mag = -0.5 * r * r + n * math.log(r) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag + 1j * n * np.angle(alpha))


def coherent_vectors(alphas: np.ndarray, cutoff: int) -> np.ndarray:
    """Row k holds coherent_vector(alphas[k], cutoff); vectorised over labels."""
    alphas = np.asarray(alphas, dtype=complex).ravel()
    n = np.arange(cutoff + 1)
    r = np.abs(alphas)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_r = np.where(r > 0, np.log(np.where(r > 0, r, 1.0)), -np.inf)
        log_mag = -0.5 * r * r + np.where(n == 0, 0.0, n * log_r) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag + 1j * n * np.angle(alphas)[:, None])


def coherent_amplitudes(alpha: complex, tail_tol: float = DEFAULT_TAIL_TOL) -> SingleModeAmplitudes:
    alpha = complex(alpha)
    if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)):
        raise InvalidInputError(f"alpha must be finite, got {alpha!r}")
    cutoff = poisson_cutoff(abs(alpha) ** 2, tail_tol)
    return SingleModeAmplitudes(coherent_vector(alpha, cutoff))


def number_amplitudes(n: int, cutoff: int | None = None) -> SingleModeAmplitudes:
    if n < 0:
        raise InvalidInputError(f"photon number must be >= 0, got {n}")
    cutoff = n if cutoff is None else cutoff
    if cutoff < n:
        raise InvalidInputError("cutoff below photon number")
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[n] = 1.0
    return SingleModeAmplitudes(amps)


def tensor_product(a: SingleModeAmplitudes, b: SingleModeAmplitudes) -> TwoModeState:
    return TwoModeState(np.outer(a.amps, b.amps))


def number_state(n1: int, n2: int) -> TwoModeState:
    return tensor_product(number_amplitudes(n1), number_amplitudes(n2))


def partial_trace(state: TwoModeState, keep: Literal[1, 2] = 1) -> ReducedDensity:
    """Reduced density matrix of mode `keep` for the pure state."""
    psi = state.amps
    if keep == 1:
        rho = psi @ psi.conj().T
    elif keep == 2:
        rho = psi.T @ psi.conj()
    else:
        raise InvalidInputError(f"keep must be 1 or 2, got {keep!r}")
    # exact Hermiticity; matmul rounding is not symmetric
    return ReducedDensity(0.5 * (rho + rho.conj().T))


def _common(a: TwoModeState, b: TwoModeState) -> tuple[np.ndarray, np.ndarray]:
    c1 = max(a.cutoff1, b.cutoff1)
    c2 = max(a.cutoff2, b.cutoff2)
    return a.padded(c1, c2).amps, b.padded(c1, c2).amps


def overlap(a: TwoModeState, b: TwoModeState) -> complex:
    x, y = _common(a, b)
    return complex(np.vdot(x, y))


def fidelity(a: TwoModeState, b: TwoModeState) -> float:
    """|<a|b>|, zero-padding the smaller table."""
    return min(1.0, abs(overlap(a, b)))


def trace_distance(a: ReducedDensity, b: ReducedDensity) -> float:
    c = max(a.cutoff, b.cutoff)
    diff = a.padded(c).rho - b.padded(c).rho
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def mode_operator_matrix(kind: str, cutoff: int, hbar: float = 1.0) -> np.ndarray:
    """Ladder or quadrature matrix on the truncated basis {|0>, ..., |cutoff>}.

    Q = sqrt(hbar/2) (a + a^dag), P = -i sqrt(hbar/2) (a - a^dag).
    """
    if cutoff < 1:
        raise InvalidInputError("cutoff must be >= 1 for operator matrices")
    a = np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1).astype(complex)
    s = math.sqrt(hbar / 2.0)
    if kind == "annihilation":
        return a
    if kind == "creation":
        return a.conj().T
    if kind == "Q":
        return s * (a + a.conj().T)
    if kind == "P":
        return -1j * s * (a - a.conj().T)
    raise InvalidInputError(f"unknown operator kind {kind!r}")
