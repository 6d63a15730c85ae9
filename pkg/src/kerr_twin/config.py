"""Run configuration: a JSON object plus dotted `key=value` overrides."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .dynamics import CoherentProduct, NumberProduct
from .errors import InvalidInputError
from .fock import DEFAULT_TAIL_TOL, ModelParams
from .phase_space import GridSpec


class ConfigError(InvalidInputError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


# Fig. 3 / Fig. 5 Hamiltonian with hbar = R * Lambda, Lambda = 4.
DEFAULTS: dict[str, Any] = {
    "model": {"omega0": 1.0, "lambda": 0.2, "g": 0.1, "hbar": 1.0},
    "initial": {"family": "coherent", "q1": 1.0, "p1": 1.0, "q2": 1.0, "p2": 1.0},
    "sweep": {"t_start": 0.0, "t_end": 40.0, "samples": 401},
    "tolerances": {"tail_tol": DEFAULT_TAIL_TOL, "fid_tol": 1e-8, "grid_tol": 1e-3},
    "mode": 1,
}

PRESETS: dict[str, dict[str, Any]] = {
    "fig1": {
        "model": {"omega0": 20.0, "lambda": 2.0, "g": 1.0, "hbar": 1.0},
        "sweep": {"t_start": 0.0, "t_end": 2 * math.pi, "samples": 801},
    },
    "fig2a": {
        "model": {"omega0": 1.0, "lambda": 1.0, "g": 0.1, "hbar": 1.0},
        "initial": {"family": "number", "n1": 1, "n2": 0},
        "sweep": {"t_start": 0.0, "t_end": math.pi, "samples": 1001},
    },
    "fig2b": {
        "model": {"omega0": 1.0, "lambda": 1.0, "g": 0.1, "hbar": 1.0},
        "initial": {"family": "number", "n1": 3, "n2": 3},
        "sweep": {"t_start": 0.0, "t_end": math.pi, "samples": 1001},
    },
    "fig3": {
        "model": {"R": 0.25},
        "sweep": {"t_start": 0.0, "t_end": 40.0, "samples": 801},
    },
    "fig5": {
        "model": {"R": 0.025},
        "sweep": {"times_T1_fractions": [0.125, 1 / 7, 1 / 6, 0.2, 0.25, 1 / 3, 0.5, 1.0, 2.0]},
        "ratios": [[1, 2], [1, 3], [2, 3], [1, 4], [3, 4]],
    },
}


def deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def parse_override(item: str) -> tuple[list[str], Any]:
    if "=" not in item:
        raise ConfigError(item, "override must look like key=value")
    key, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip().split("."), value


def apply_overrides(raw: dict, overrides: list[str]) -> dict:
    out = copy.deepcopy(raw)
    for item in overrides:
        path, value = parse_override(item)
        node = out
        for part in path[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(".".join(path), "cannot set a key below a scalar")
        node[path[-1]] = value
    return out


def _num(section: dict, key: str, where: str, default=None) -> float:
    v = section.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}.{key}", f"expected a finite number, got {v!r}")
    return float(v)


@dataclass
class RunConfig:
    params: ModelParams
    initial: NumberProduct | CoherentProduct
    times: list[float]
    tail_tol: float = DEFAULT_TAIL_TOL
    fid_tol: float = 1e-8
    grid_tol: float = 1e-3
    grid: GridSpec | None = None
    ratios: list[tuple[int, int]] = field(default_factory=list)
    mode: int = 1
    outputs: dict[str, str] = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def family(self) -> str:
        return "number" if isinstance(self.initial, NumberProduct) else "coherent"


def load_raw(path: str | Path | None, preset: str | None = None,
             overrides: list[str] | None = None) -> dict:
    raw = copy.deepcopy(DEFAULTS)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError("preset", f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        raw = deep_merge(raw, PRESETS[preset])
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be an object")
        raw = deep_merge(raw, data)
    return apply_overrides(raw, overrides or [])


def build_config(raw: dict) -> RunConfig:
    model = raw.get("model", {})
    init = raw.get("initial", {})
    sweep = raw.get("sweep", {})
    tol = raw.get("tolerances", {})

    family = init.get("family", "coherent")
    if family == "number":
        n1, n2 = init.get("n1"), init.get("n2")
        for key, v in (("n1", n1), ("n2", n2)):
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ConfigError(f"initial.{key}", f"expected a non-negative integer, got {v!r}")
        initial = NumberProduct(n1, n2)
    elif family == "coherent":
        initial = CoherentProduct.from_quadratures(
            *(_num(init, k, "initial") for k in ("q1", "p1", "q2", "p2")))
    else:
        raise ConfigError("initial.family", f"expected 'number' or 'coherent', got {family!r}")

    hbar = _num(model, "hbar", "model", 1.0)
    if "R" in model:
        R = _num(model, "R", "model")
        if R <= 0:
            raise ConfigError("model.R", "must be > 0")
        if family != "coherent" or initial.Lambda <= 0:
            raise ConfigError("model.R", "R = hbar / Lambda needs a non-vacuum coherent input")
        hbar = R * initial.Lambda
    try:
        params = ModelParams(_num(model, "omega0", "model"), _num(model, "lambda", "model"),
                             _num(model, "g", "model"), hbar)
    except InvalidInputError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("model", str(exc)) from exc

    tolerances = {}
    for key in ("tail_tol", "fid_tol", "grid_tol"):
        v = _num(tol, key, "tolerances")
        if not 0.0 < v < 1.0:
            raise ConfigError(f"tolerances.{key}", f"must lie in (0, 1), got {v!r}")
        tolerances[key] = v

    times = _sweep_times(sweep, params)

    grid = None
    if "grid" in raw:
        gs = raw["grid"]
        if not isinstance(gs, dict):
            raise ConfigError("grid", "expected an object")
        try:
            grid = GridSpec(*(_num(gs, k, "grid") for k in ("q_min", "q_max", "p_min", "p_max")),
                            nq=int(gs.get("nq", 201)), np=int(gs.get("np", 201)))
        except InvalidInputError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("grid", str(exc)) from exc

    ratios = []
    for i, pair in enumerate(raw.get("ratios", [])):
        if (not isinstance(pair, (list, tuple)) or len(pair) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in pair)):
            raise ConfigError(f"ratios[{i}]", f"expected [r, s] integers, got {pair!r}")
        r, s = pair
        if not (0 < r < s) or math.gcd(r, s) != 1:
            raise ConfigError(f"ratios[{i}]", f"need coprime 0 < r < s, got {pair!r}")
        ratios.append((r, s))

    mode = raw.get("mode", 1)
    if mode not in (1, 2):
        raise ConfigError("mode", f"expected 1 or 2, got {mode!r}")

    outputs = {}
    for i, item in enumerate(raw.get("outputs", [])):
        if not isinstance(item, dict) or "kind" not in item or "path" not in item:
            raise ConfigError(f"outputs[{i}]", "expected {kind, path}")
        outputs[str(item["kind"])] = str(item["path"])

    return RunConfig(params, initial, times, grid=grid, ratios=ratios, mode=mode,
                     outputs=outputs, raw=raw, **tolerances)


def _sweep_times(sweep: dict, params: ModelParams) -> list[float]:
    if "times" in sweep:
        ts = sweep["times"]
        if not isinstance(ts, list) or not ts:
            raise ConfigError("sweep.times", "expected a non-empty list")
        return [_num({"t": t}, "t", "sweep.times") for t in ts]
    if "times_T1_fractions" in sweep:
        if params.g <= 0:
            raise ConfigError("sweep.times_T1_fractions", "needs g > 0")
        T1 = math.pi / params.omega_g
        fr = sweep["times_T1_fractions"]
        if not isinstance(fr, list) or not fr:
            raise ConfigError("sweep.times_T1_fractions", "expected a non-empty list")
        return [T1 * _num({"f": f}, "f", "sweep.times_T1_fractions") for f in fr]
    t0 = _num(sweep, "t_start", "sweep")
    t1 = _num(sweep, "t_end", "sweep")
    n = sweep.get("samples")
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise ConfigError("sweep.samples", f"expected an integer >= 2, got {n!r}")
    if t1 <= t0:
        raise ConfigError("sweep.t_end", "must exceed sweep.t_start")
    step = (t1 - t0) / (n - 1)
    return [t0 + i * step for i in range(n)]
