"""
kerr-twin experiment runner.

    kerr-twin <command> [--config PATH] [--preset NAME] [--set key=value ...] --out DIR

Data files are CSV (17 significant digits, `t` first) or sorted-key JSON and
contain no run-dependent values; timing and provenance go to `<command>.meta.json`.
Exit codes: 0 success, 1 validation, 2 numerical, 3 resource.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from .cats import cat_mixture
from .config import ConfigError, RunConfig, build_config, load_raw
from .dynamics import (
    evolve_coherent_product,
    evolve_number_product,
    reduced_density_coherent,
)
from .entropy import (
    linear_entropy,
    number_entropy_spectrum,
    sle_coherent_closed,
    von_neumann_entropy,
)
from .errors import KerrTwinError, NumericalError
from .fock import fidelity, partial_trace, trace_distance
from .phase_space import (
    GridSpec,
    collapse_envelope,
    count_angular_peaks,
    husimi_grid,
    quadrature_mean_closed,
    quadrature_moments_numeric,
)
from .timescales import (
    break_time_estimate,
    coherent_recoherence_times,
    number_state_times,
    recurrence_check,
)
from .verification import run_differential_suite

log = logging.getLogger("kerr_twin")

COMMANDS = ("evolve", "entropy", "quadratures", "qfunc", "timescales", "catmix", "oracle-check")
PARALLEL_MIN_ITEMS = 64


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    path.write_text(buf.getvalue())


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def worker_count() -> int:
    raw = os.environ.get("KERR_TWIN_WORKERS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            log.warning("ignoring non-integer KERR_TWIN_WORKERS=%r", raw)
    return os.cpu_count() or 1


def parallel_map(fn, items: list) -> list:
    workers = min(worker_count(), len(items))
    if workers <= 1 or len(items) < PARALLEL_MIN_ITEMS:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=chunk))


# --- per-time workers (module level so they pickle) -----------------------

def _state_at(cfg: RunConfig, t: float):
    if cfg.family == "number":
        return evolve_number_product(cfg.initial, cfg.params, t)
    return evolve_coherent_product(cfg.initial, cfg.params, t, cfg.tail_tol)


def _evolve_row(cfg: RunConfig, t: float) -> list:
    psi0 = _state_at(cfg, 0.0)
    psi = _state_at(cfg, t)
    n1, n2 = psi.mean_numbers()
    return [t, psi.norm_sq, n1, n2, fidelity(psi0, psi), linear_entropy(partial_trace(psi, cfg.mode))]


def _entropy_row(cfg: RunConfig, t: float) -> list:
    if cfg.family == "number":
        spec = number_entropy_spectrum(cfg.initial, cfg.params.lam, t)
        return [t, spec.delta, spec.s_vn]
    delta = sle_coherent_closed(cfg.initial, cfg.params, t, cfg.tail_tol)
    rho = reduced_density_coherent(cfg.initial, cfg.params, t, 1, cfg.tail_tol)
    return [t, delta, von_neumann_entropy(rho)]


def _quadrature_row(cfg: RunConfig, t: float) -> list:
    p = cfg.params
    q, pm = quadrature_mean_closed(cfg.initial, p, t, cfg.mode)
    rho = reduced_density_coherent(cfg.initial, p, t, cfg.mode, cfg.tail_tol)
    mom = quadrature_moments_numeric(rho, p.hbar)
    return [t, p.omega_g * t, q, pm, mom.q_mean, mom.p_mean, mom.dq, mom.dp,
            collapse_envelope(cfg.initial, p, t)]


# --- commands --------------------------------------------------------------

def _need_coherent(cfg: RunConfig, command: str) -> None:
    if cfg.family != "coherent":
        raise ConfigError("initial.family", f"`{command}` needs a coherent initial state")


def cmd_evolve(cfg: RunConfig, out: Path) -> dict[str, Path]:
    path = out / cfg.outputs.get("evolve", "evolve.csv")
    rows = parallel_map(partial(_evolve_row, cfg), cfg.times)
    write_csv(path, ["t", "norm", "n1_mean", "n2_mean", "fidelity_initial", "delta"], rows)
    return {"evolve": path}


def cmd_entropy(cfg: RunConfig, out: Path) -> dict[str, Path]:
    path = out / cfg.outputs.get("entropy", "entropy.csv")
    rows = parallel_map(partial(_entropy_row, cfg), cfg.times)
    write_csv(path, ["t", "delta", "s_vn"], rows)
    return {"entropy": path}


def cmd_quadratures(cfg: RunConfig, out: Path) -> dict[str, Path]:
    _need_coherent(cfg, "quadratures")
    path = out / cfg.outputs.get("quadratures", "quadratures.csv")
    rows = parallel_map(partial(_quadrature_row, cfg), cfg.times)
    write_csv(path, ["t", "omega_g_t", "q_mean", "p_mean", "q_mean_numeric", "p_mean_numeric",
                     "dq", "dp", "envelope"], rows)
    return {"quadratures": path}


def cmd_qfunc(cfg: RunConfig, out: Path) -> dict[str, Path]:
    _need_coherent(cfg, "qfunc")
    p = cfg.params
    spec = cfg.grid or GridSpec.default(cfg.initial.Lambda)
    index_rows = []
    written = {}
    for i, t in enumerate(cfg.times):
        rho = reduced_density_coherent(cfg.initial, p, t, cfg.mode, cfg.tail_tol)
        grid = husimi_grid(rho, spec, p.hbar)
        peaks = count_angular_peaks(rho, p.hbar, r_max=max(abs(spec.q_min), abs(spec.q_max),
                                                          abs(spec.p_min), abs(spec.p_max)))
        q, pp = spec.axes()
        qq, ppg = np.meshgrid(q, pp, indexing="ij")
        name = f"qfunc_{i:03d}"
        path = out / f"{name}.csv"
        write_csv(path, ["q", "p", "Q"], zip(qq.ravel(), ppg.ravel(), grid.values.ravel()))
        norm = grid.riemann_sum()
        write_json(out / f"{name}.json", {
            "frame": i, "t": t, "mode": cfg.mode,
            "grid": {"q_min": spec.q_min, "q_max": spec.q_max, "p_min": spec.p_min,
                     "p_max": spec.p_max, "nq": spec.nq, "np": spec.np},
            "params": {"omega0": p.omega0, "lambda": p.lam, "g": p.g, "hbar": p.hbar},
            "tolerances": {"tail_tol": cfg.tail_tol, "grid_tol": cfg.grid_tol},
            "riemann_sum": norm,
        })
        if abs(norm - 1.0) > cfg.grid_tol:
            log.warning("frame %d: Q normalisation %.6f outside grid_tol %.1e", i, norm, cfg.grid_tol)
        index_rows.append([t, i, norm, peaks.count, peaks.radius])
        written[name] = path
    idx = out / cfg.outputs.get("qfunc", "qfunc_index.csv")
    write_csv(idx, ["t", "frame", "riemann_sum", "angular_peaks", "peak_radius"], index_rows)
    written["qfunc"] = idx
    return written


def cmd_timescales(cfg: RunConfig, out: Path) -> dict[str, Path]:
    l_max = int(cfg.raw.get("l_max", 5))
    p = cfg.params
    written = {}
    if cfg.family == "number":
        if p.lam <= 0:
            raise ConfigError("model.lambda", "number-state timescales need lambda > 0")
        report = number_state_times(p.lam, l_max, cfg.initial.n1, cfg.initial.n2)
        rows = [_entropy_row(cfg, t) for t in cfg.times]
        tb = break_time_estimate([r[0] for r in rows], [r[1] for r in rows],
                                 func=lambda t: number_entropy_spectrum(cfg.initial, p.lam, t).delta)
    else:
        report = coherent_recoherence_times(cfg.initial, p, l_max)
        rows = parallel_map(partial(_entropy_row, cfg), cfg.times)
        tb = break_time_estimate([r[0] for r in rows], [r[1] for r in rows],
                                 func=lambda t: sle_coherent_closed(cfg.initial, p, t, cfg.tail_tol))
        if p.g > 0:
            rec = out / cfg.outputs.get("recurrence", "recurrence.csv")
            verdicts = [recurrence_check(cfg.initial, p, l, cfg.fid_tol, cfg.tail_tol)
                        for l in range(1, l_max + 1)]
            write_csv(rec, ["t", "l", "predicted", "observed", "fidelity"],
                      [[v.t, v.l, v.predicted, v.observed, v.fidelity] for v in verdicts])
            written["recurrence"] = rec
    data = report.as_dict()
    data["break_time"] = tb
    path = out / cfg.outputs.get("timescales", "timescales.json")
    write_json(path, data)
    written["timescales"] = path
    return written


def cmd_catmix(cfg: RunConfig, out: Path) -> dict[str, Path]:
    _need_coherent(cfg, "catmix")
    ratios = cfg.ratios or [(1, 2), (1, 3), (2, 3), (1, 4), (3, 4)]
    summary, coeffs, weights = [], [], []
    for r, s in ratios:
        dec = cat_mixture(cfg.initial, cfg.params, r, s, cfg.tail_tol)
        direct = partial_trace(evolve_coherent_product(cfg.initial, cfg.params, dec.t, cfg.tail_tol), 1)
        purity = 1.0 - linear_entropy(dec.rho)
        summary.append([dec.t, r, s, dec.l, trace_distance(dec.rho, direct), float(dec.weights.sum()),
                        float(np.sum(np.abs(dec.a) ** 2)), purity,
                        sle_coherent_closed(cfg.initial, cfg.params, dec.t, cfg.tail_tol)])
        for q, a in enumerate(dec.a):
            coeffs.append([dec.t, r, s, q, a.real, a.imag])
        for m, (x, nrm, w) in enumerate(zip(dec.xi, dec.cat_norms, dec.weights)):
            weights.append([dec.t, r, s, m, x, nrm, w])
    p1 = out / cfg.outputs.get("catmix", "catmix.csv")
    write_csv(p1, ["t", "r", "s", "l", "trace_distance", "sum_weights", "sum_abs_a2", "purity",
                   "delta_closed"], summary)
    p2 = out / "catmix_coeffs.csv"
    write_csv(p2, ["t", "r", "s", "q", "a_re", "a_im"], coeffs)
    p3 = out / "catmix_weights.csv"
    write_csv(p3, ["t", "r", "s", "m", "xi", "cat_norm", "weight"], weights)
    return {"catmix": p1, "catmix_coeffs": p2, "catmix_weights": p3}


def cmd_oracle_check(cfg: RunConfig, out: Path) -> dict[str, Path]:
    results = run_differential_suite(cfg)
    path = out / cfg.outputs.get("oracle-check", "oracle_check.csv")
    write_csv(path, ["check", "value", "threshold", "pass"],
              [[c.name, c.value, c.threshold, c.passed] for c in results])
    failed = [c.name for c in results if not c.passed]
    if failed:
        raise NumericalError(f"differential checks failed: {', '.join(failed)}")
    return {"oracle-check": path}


DISPATCH = {
    "evolve": cmd_evolve,
    "entropy": cmd_entropy,
    "quadratures": cmd_quadratures,
    "qfunc": cmd_qfunc,
    "timescales": cmd_timescales,
    "catmix": cmd_catmix,
    "oracle-check": cmd_oracle_check,
}


def run(command: str, cfg: RunConfig, out: Path) -> dict[str, Path]:
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    written = DISPATCH[command](cfg, out)
    write_json(out / f"{command}.meta.json", {
        "command": command,
        "version": __version__,
        "config": cfg.raw,
        "files": {k: v.name for k, v in written.items()},
        "elapsed_s": round(time.perf_counter() - start, 3),
    })
    return written


def _provenance(exc: BaseException) -> str:
    tb = exc.__traceback__
    name = "kerr_twin"
    while tb is not None:
        mod = tb.tb_frame.f_globals.get("__name__", "")
        if mod.startswith("kerr_twin"):
            name = mod
        tb = tb.tb_next
    return name


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kerr-twin", description=__doc__.split("\n\n")[0].strip())
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--preset", help="built-in figure configuration (fig1, fig2a, fig2b, fig3, fig5)")
    ap.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                    help="dotted override, e.g. model.R=0.125; wins over the file")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; that code is reserved for numerical failures
        return 0 if exc.code in (0, None) else ConfigError.exit_code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(load_raw(args.config, args.preset, args.overrides))
        out = Path(args.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError("out", f"cannot create {out}: {exc}") from exc
        written = run(args.command, cfg, out)
    except KerrTwinError as exc:
        module = _provenance(exc)
        print(f"kerr-twin: {type(exc).__name__} [{module}]: {exc}", file=sys.stderr)
        return exc.exit_code
    for name, path in written.items():
        log.info("wrote %s -> %s", name, path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
