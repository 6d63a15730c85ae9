"""Differential checks of every closed form against the brute-force oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cats import cat_mixture
from .dynamics import (
    CoherentProduct,
    NumberProduct,
    evolve_coherent_product,
    evolve_number_product,
    reduced_density_coherent,
)
from .entropy import linear_entropy, number_entropy_spectrum, sle_coherent_closed
from .fock import fidelity, partial_trace, trace_distance
from .oracle import OraclePropagator
from .phase_space import quadrature_mean_closed, quadrature_moments_numeric


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.threshold)


def _sample_times(times, k: int = 8) -> list[float]:
    times = list(times)
    if len(times) <= k:
        return times
    idx = np.linspace(0, len(times) - 1, k).round().astype(int)
    return [times[i] for i in idx]


def number_family_checks(params, inputs=((1, 0), (2, 1), (3, 3)), times=None) -> list[Check]:
    lam = params.lam if params.lam > 0 else 1.0
    times = times if times is not None else list(np.linspace(0.0, math.pi / lam, 7)[1:])
    infid = ent = energy = pops = 0.0
    spec_res = 0.0
    for n1, n2 in inputs:
        init = NumberProduct(n1, n2)
        prop = OraclePropagator(evolve_number_product(init, params, 0.0), params)
        spec_res = max(spec_res, prop.spectrum.spectral_residual())
        E0 = prop.energy(0.0)
        P0 = prop.block_populations(0.0)
        for t in times:
            o = prop.state(t)
            infid = max(infid, 1.0 - fidelity(evolve_number_product(init, params, t), o))
            ent = max(ent, abs(number_entropy_spectrum(init, params.lam, t).delta
                               - linear_entropy(partial_trace(o))))
            energy = max(energy, abs(prop.energy(t) - E0) / max(abs(E0), 1e-300))
            pops = max(pops, float(np.abs(prop.block_populations(t) - P0).max()))
    return [
        Check("number.oracle_infidelity", infid, 1e-10),
        Check("number.delta_vs_oracle", ent, 1e-8),
        Check("number.block_spectrum", spec_res, 1e-9),
        Check("number.energy_drift_rel", energy, 1e-10),
        Check("number.population_drift", pops, 1e-12),
    ]


def coherent_family_checks(init: CoherentProduct, params, times, tail_tol=1e-12) -> list[Check]:
    psi0 = evolve_coherent_product(init, params, 0.0, tail_tol)
    prop = OraclePropagator(psi0, params)
    E0 = prop.energy(0.0)
    P0 = prop.block_populations(0.0)
    infid = rdm = sle = quad = energy = pops = 0.0
    for t in times:
        a = evolve_coherent_product(init, params, t, tail_tol)
        o = prop.state(t)
        infid = max(infid, 1.0 - fidelity(a, o))
        closed = reduced_density_coherent(init, params, t, 1, tail_tol)
        direct = partial_trace(a, 1)
        c = max(closed.cutoff, direct.cutoff)
        rdm = max(rdm, float(np.abs(closed.padded(c).rho - direct.padded(c).rho).max()))
        rho_o = partial_trace(o, 1)
        sle = max(sle, abs(sle_coherent_closed(init, params, t, tail_tol) - linear_entropy(rho_o)))
        mom = quadrature_moments_numeric(rho_o, params.hbar)
        q, p = quadrature_mean_closed(init, params, t, 1)
        quad = max(quad, abs(q - mom.q_mean), abs(p - mom.p_mean))
        energy = max(energy, abs(prop.energy(t) - E0) / max(abs(E0), 1e-300))
        pops = max(pops, float(np.abs(prop.block_populations(t) - P0).max()))
    return [
        Check("coherent.oracle_infidelity", infid, 1e-8),
        Check("coherent.reduced_density_closed_vs_trace", rdm, 1e-10),
        Check("coherent.sle_closed_vs_oracle", sle, 1e-6),
        Check("coherent.quadrature_mean_vs_oracle", quad, 1e-6),
        Check("coherent.block_spectrum", prop.spectrum.spectral_residual(), 1e-9),
        Check("coherent.eigvec_unitarity", prop.spectrum.unitarity_residual(), 1e-10),
        Check("coherent.energy_drift_rel", energy, 1e-10),
        Check("coherent.population_drift", pops, 1e-12),
    ]


def cat_checks(init: CoherentProduct, params, ratios, tail_tol=1e-12) -> list[Check]:
    td = wsum = a2 = 0.0
    for r, s in ratios:
        dec = cat_mixture(init, params, r, s, tail_tol)
        direct = partial_trace(evolve_coherent_product(init, params, dec.t, tail_tol), 1)
        td = max(td, trace_distance(dec.rho, direct))
        wsum = max(wsum, abs(float(dec.weights.sum()) - 1.0))
        a2 = max(a2, abs(float(np.sum(np.abs(dec.a) ** 2)) - 1.0))
    return [
        Check("cat.trace_distance", td, 1e-8),
        Check("cat.weight_sum", wsum, 1e-10),
        Check("cat.parseval", a2, 1e-12),
    ]


def run_differential_suite(cfg) -> list[Check]:
    params = cfg.params
    init = cfg.initial if isinstance(cfg.initial, CoherentProduct) else \
        CoherentProduct.from_quadratures(1.0, 1.0, 1.0, 1.0)
    checks = number_family_checks(params)
    checks += coherent_family_checks(init, params, _sample_times(cfg.times), cfg.tail_tol)
    if params.g > 0:
        checks += cat_checks(init, params, cfg.ratios or [(1, 2), (1, 3), (2, 3), (1, 4), (3, 4)],
                             cfg.tail_tol)
    return checks
