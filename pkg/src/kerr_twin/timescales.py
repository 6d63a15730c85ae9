"""Re-coherence, recurrence, reversibility and break-time predictions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from .dynamics import CoherentProduct, evolve_coherent_product
from .errors import InvalidInputError
from .fock import DEFAULT_TAIL_TOL, ModelParams, fidelity

SPECIAL_TOL = 1e-12
INTEGER_TOL = 1e-9


@dataclass(frozen=True)
class TimescaleReport:
    family: Literal["number", "coherent"]
    recoherence_times: list = field(default_factory=list)
    recurrence_times: list = field(default_factory=list)
    tau_R: float | None = None
    special_times: list = field(default_factory=list)
    break_time: float | None = None
    swap_is_recurrence: bool = False

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "recoherence_times": list(self.recoherence_times),
            "recurrence_times": list(self.recurrence_times),
            "tau_R": self.tau_R,
            "special_times": list(self.special_times),
            "break_time": self.break_time,
            "swap_is_recurrence": self.swap_is_recurrence,
        }


def number_state_times(lam: float, l_max: int, n1: int | None = None,
                       n2: int | None = None) -> TimescaleReport:
    """Swap times T_l = (pi/lam)(l + 1/2) and recurrences tau_l = l pi/lam.

    For n1 == n2 the swapped state equals the initial one, so every T_l is
    also a recurrence and the reversibility period halves.
    """
    if lam <= 0:
        raise InvalidInputError(f"lambda must be > 0, got {lam!r}")
    period = math.pi / lam
    swaps = [period * (l + 0.5) for l in range(l_max + 1)]
    recur = [period * l for l in range(1, l_max + 1)]
    equal = n1 is not None and n1 == n2
    if equal:
        recur = sorted(recur + swaps)
    return TimescaleReport("number", swaps, recur, period, swap_is_recurrence=equal)


def _principal_time(ratio: float, lam: float) -> float:
    # arctan branch mapped into (0, pi/lam]
    x = math.atan(ratio)
    if x <= 0:
        x += math.pi
    return x / lam


def _zero_time(num: float, den: float, lam: float) -> float | None:
    """Positive instant with tan(lam t) = num / den; den = 0 gives pi / (2 lam)."""
    if abs(den) <= SPECIAL_TOL:
        if abs(num) <= SPECIAL_TOL:
            return None
        return math.pi / (2.0 * lam)
    return _principal_time(num / den, lam)


def special_disentangling_times(init: CoherentProduct, lam: float) -> list[float]:
    """Instants at which beta_1 or beta_2 vanishes, when q1 q2 + p1 p2 = 0.

    beta_1 vanishes at tan(lam t) = -q1/p2 = p1/q2; beta_2 at tan(lam t) = -q2/p1 = p2/q1.
    """
    q1, p1, q2, p2 = init.mode1.q, init.mode1.p, init.mode2.q, init.mode2.p
    if lam <= 0 or abs(q1 * q2 + p1 * p2) > SPECIAL_TOL:
        return []
    out = []
    for pair in (((-q1, p2), (p1, q2)), ((-q2, p1), (p2, q1))):
        for num, den in pair:
            t = _zero_time(num, den, lam)
            if t is not None:
                out.append(t)
                break
    times = []
    for t in sorted(out):
        if not times or abs(t - times[-1]) > 1e-12 * max(1.0, t):
            times.append(t)
    return times


def coherent_recoherence_times(init: CoherentProduct, params: ModelParams,
                               l_max: int) -> TimescaleReport:
    recoh = []
    recur = []
    if params.g > 0 and (init.Lambda > 0):
        T1 = math.pi / params.omega_g
        recoh = [l * T1 for l in range(1, l_max + 1)]
        recur = [l * T1 for l in range(1, l_max + 1) if recurrence_predicted(params, l)]
    special = special_disentangling_times(init, params.lam)
    return TimescaleReport("coherent", recoh, recur, special_times=special)


def _is_integer(x: float) -> bool:
    return abs(x - round(x)) <= INTEGER_TOL


def recurrence_predicted(params: ModelParams, l: int) -> bool:
    """Integer-ratio rule: l w0/w_g and l lam/w_g both integers."""
    wg = params.omega_g
    if wg <= 0:
        return False
    return _is_integer(l * params.omega0 / wg) and _is_integer(l * params.lam / wg)


def recurrence_fidelity(init: CoherentProduct, params: ModelParams, t: float,
                        tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """|<psi(0)|psi(t)>| for the coherent family."""
    return fidelity(evolve_coherent_product(init, params, 0.0, tail_tol),
                    evolve_coherent_product(init, params, t, tail_tol))


@dataclass(frozen=True)
class RecurrenceVerdict:
    l: int
    t: float
    predicted: bool
    observed: bool
    fidelity: float


def recurrence_check(init: CoherentProduct, params: ModelParams, l: int,
                     fid_tol: float = 1e-8,
                     tail_tol: float = DEFAULT_TAIL_TOL) -> RecurrenceVerdict:
    if l < 1:
        raise InvalidInputError(f"l must be >= 1, got {l}")
    if params.g <= 0:
        raise InvalidInputError("recurrence at T_l needs g > 0")
    t = l * math.pi / params.omega_g
    f = recurrence_fidelity(init, params, t, tail_tol)
    return RecurrenceVerdict(l, t, recurrence_predicted(params, l), f >= 1.0 - fid_tol, f)


def first_local_max_index(values: Sequence[float]) -> int | None:
    v = np.asarray(values, dtype=float)
    for i in range(1, v.size - 1):
        if v[i] > v[i - 1] and v[i] > v[i + 1]:
            return i
    return None


def break_time_estimate(ts: Sequence[float], deltas: Sequence[float],
                        func: Callable[[float], float] | None = None,
                        rel_tol: float = 1e-4) -> float | None:
    """First strict local maximum of a sampled linear-entropy series.

    The grid maximum is refined by golden-section search on `func` when given,
    otherwise on a cubic spline through the samples. Returns None when the
    series has no interior local maximum.
    """
    ts = np.asarray(ts, dtype=float)
    deltas = np.asarray(deltas, dtype=float)
    if ts.shape != deltas.shape or ts.size < 3:
        raise InvalidInputError("need at least three (t, delta) samples")
    i = first_local_max_index(deltas)
    if i is None:
        return None
    f = func if func is not None else CubicSpline(ts, deltas)
    res = minimize_scalar(lambda x: -float(f(x)), bracket=(ts[i - 1], ts[i], ts[i + 1]),
                          method="golden", options={"xtol": rel_tol})
    t = float(res.x)
    if not ts[i - 1] <= t <= ts[i + 1]:
        return float(ts[i])
    return t
