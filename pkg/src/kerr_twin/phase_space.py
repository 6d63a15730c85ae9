"""
Quadrature moments and Husimi Q-function of a single mode.

Q(q, p) = <gamma|rho|gamma> / pi with gamma = (q + i p) / sqrt(2 hbar), so the
normalisation measure is dq dp / (2 hbar).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .dynamics import CoherentProduct, beta_t
from .errors import AccuracyError, InvalidInputError
from .fock import ModelParams, ReducedDensity, coherent_vectors, mode_operator_matrix

BOUNDARY_TOL = 1e-8
MAX_GRID_NODES = 2_000_000


def quadrature_mean_closed(init: CoherentProduct, params: ModelParams, t: float,
                           mode: int = 1) -> tuple[float, float]:
    """(<Q>, <P>) of one mode from the closed-form <a>."""
    a = mean_annihilation_closed(init, params, t, mode)
    s = math.sqrt(2.0 * params.hbar)
    return s * a.real, s * a.imag


def mean_annihilation_closed(init: CoherentProduct, params: ModelParams, t: float,
                             mode: int = 1) -> complex:
    """<a_k>(t) = beta_k e^{-3 i w_g t} exp(-nbar (1 - e^{-2 i w_g t}))."""
    if mode not in (1, 2):
        raise InvalidInputError(f"mode must be 1 or 2, got {mode!r}")
    b = beta_t(init, params, t)[mode - 1]
    wt = params.omega_g * t
    nbar = init.mean_photons(params.hbar)
    return complex(b * np.exp(-3j * wt) * np.exp(-nbar * (1.0 - np.exp(-2j * wt))))


def collapse_envelope(init: CoherentProduct, params: ModelParams, t: float) -> float:
    """|<a_k>| / |beta_k|, identical for both modes."""
    nbar = init.mean_photons(params.hbar)
    return math.exp(-nbar * (1.0 - math.cos(2.0 * params.omega_g * t)))


@dataclass(frozen=True)
class QuadratureMoments:
    q_mean: float
    p_mean: float
    dq: float
    dp: float


def quadrature_moments_numeric(rho: ReducedDensity, hbar: float) -> QuadratureMoments:
    r = rho.rho
    d = rho.cutoff
    if d >= 1 and abs(r[d, d]) > BOUNDARY_TOL:
        raise AccuracyError(f"boundary occupation {abs(r[d, d]):.3g} exceeds {BOUNDARY_TOL}")
    # one extra level so that X^2 is exact on the kept block
    Q = mode_operator_matrix("Q", d + 1, hbar)
    P = mode_operator_matrix("P", d + 1, hbar)
    Q2 = (Q @ Q)[:d + 1, :d + 1]
    P2 = (P @ P)[:d + 1, :d + 1]
    Q, P = Q[:d + 1, :d + 1], P[:d + 1, :d + 1]

    def ev(op):
        return float(np.real(np.trace(r @ op)))

    qm, pm = ev(Q), ev(P)
    return QuadratureMoments(qm, pm, math.sqrt(max(ev(Q2) - qm * qm, 0.0)),
                             math.sqrt(max(ev(P2) - pm * pm, 0.0)))


@dataclass(frozen=True)
class GridSpec:
    q_min: float
    q_max: float
    p_min: float
    p_max: float
    nq: int = 201
    np: int = 201

    def __post_init__(self):
        vals = (self.q_min, self.q_max, self.p_min, self.p_max)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidInputError("grid bounds must be finite")
        if self.q_max <= self.q_min or self.p_max <= self.p_min:
            raise InvalidInputError("grid bounds must be increasing")
        if self.nq < 2 or self.np < 2:
            raise InvalidInputError("grid needs at least 2 nodes per axis")
        if self.nq * self.np > MAX_GRID_NODES:
            raise InvalidInputError(f"grid has {self.nq * self.np} nodes, limit {MAX_GRID_NODES}")

    @classmethod
    def default(cls, Lambda: float) -> "GridSpec":
        h = 3.0 * math.sqrt(Lambda) if Lambda > 0 else 3.0
        return cls(-h, h, -h, h)

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.linspace(self.q_min, self.q_max, self.nq),
                np.linspace(self.p_min, self.p_max, self.np))


@dataclass(frozen=True)
class QGrid:
    spec: GridSpec
    hbar: float
    values: np.ndarray = field(repr=False)  # values[iq, ip]

    @property
    def q(self) -> np.ndarray:
        return self.spec.axes()[0]

    @property
    def p(self) -> np.ndarray:
        return self.spec.axes()[1]

    def riemann_sum(self) -> float:
        q, p = self.spec.axes()
        dq, dp = q[1] - q[0], p[1] - p[0]
        return float(self.values.sum() * dq * dp / (2.0 * self.hbar))


def husimi_points(rho: ReducedDensity, q: np.ndarray, p: np.ndarray, hbar: float) -> np.ndarray:
    """Q at arbitrary phase-space points (broadcast shapes of q and p)."""
    q, p = np.broadcast_arrays(np.asarray(q, float), np.asarray(p, float))
    gam = (q + 1j * p).ravel() / math.sqrt(2.0 * hbar)
    out = np.empty(gam.size)
    chunk = 8192
    for s in range(0, gam.size, chunk):
        C = coherent_vectors(gam[s:s + chunk], rho.cutoff)
        out[s:s + chunk] = np.real(np.sum(C.conj() * (C @ rho.rho.T), axis=1)) / math.pi
    return np.maximum(out, 0.0).reshape(q.shape)


def husimi_grid(rho: ReducedDensity, spec: GridSpec, hbar: float) -> QGrid:
    q, p = spec.axes()
    Q = husimi_points(rho, q[:, None], p[None, :], hbar)
    Q.setflags(write=False)
    return QGrid(spec, hbar, Q)


@dataclass(frozen=True)
class AngularPeaks:
    count: int
    radius: float
    angles_deg: np.ndarray


def count_angular_peaks(rho: ReducedDensity, hbar: float, r_max: float,
                        n_radii: int = 400, prominence: float = 0.05) -> AngularPeaks:
    """Count local maxima of Q around the circle of largest radial mass.

    Q is sampled at 1 degree resolution on that circle; a peak needs
    prominence >= `prominence` times the circle maximum. The circle wraps.
    """
    phi = np.deg2rad(np.arange(360))
    radii = np.linspace(r_max / n_radii, r_max, n_radii)
    ring = husimi_points(rho, radii[:, None] * np.cos(phi), radii[:, None] * np.sin(phi), hbar)
    radial = radii * ring.sum(axis=1)
    k = int(np.argmax(radial))
    circle = ring[k]
    tiled = np.concatenate([circle, circle, circle])
    idx, _ = find_peaks(tiled, prominence=prominence * circle.max())
    idx = idx[(idx >= 360) & (idx < 720)] - 360
    return AngularPeaks(int(idx.size), float(radii[k]), idx.astype(float))
