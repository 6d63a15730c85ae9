import csv
import json
import math

import pytest

from kerr_twin.cli import fmt, main
from kerr_twin.config import ConfigError, build_config, load_raw


def _run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_fmt_round_trips():
    for x in (math.pi, 1e-17, -2.5, 0.1 + 0.2):
        assert float(fmt(x)) == x


def test_entropy_fig2a(tmp_path):
    code, out = _run(tmp_path, "entropy", "--preset", "fig2a", "--set", "sweep.samples=11")
    assert code == 0
    rows = _rows(out / "entropy.csv")
    assert rows[0][0] == "t"
    assert len(rows) == 12
    # delta = sin^2(2 lam t)/2 with lam = 1
    for r in rows[1:]:
        t, d = float(r[0]), float(r[1])
        assert d == pytest.approx(0.5 * math.sin(2 * t) ** 2, abs=1e-12)
    meta = json.loads((out / "entropy.meta.json").read_text())
    assert "elapsed_s" in meta


def test_byte_identical(tmp_path):
    args = ["quadratures", "--preset", "fig1", "--set", "sweep.samples=21"]
    c1, o1 = _run(tmp_path, *args, name="a")
    c2, o2 = _run(tmp_path, *args, name="b")
    assert c1 == c2 == 0
    assert (o1 / "quadratures.csv").read_bytes() == (o2 / "quadratures.csv").read_bytes()


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": {"g": 0.2}, "sweep": {"t_start": 0, "t_end": 1, "samples": 3}}))
    raw = load_raw(cfg, None, ["model.g=0.3"])
    rc = build_config(raw)
    assert rc.params.g == 0.3
    assert rc.times == [0.0, 0.5, 1.0]


def test_R_sets_hbar():
    rc = build_config(load_raw(None, "fig3", ["model.R=0.025"]))
    assert rc.params.hbar == pytest.approx(0.1)
    assert rc.params.omega_g == pytest.approx(0.01)


def test_T1_fractions():
    rc = build_config(load_raw(None, "fig5"))
    assert rc.times[-2] == pytest.approx(100 * math.pi)


@pytest.mark.parametrize("override,field", [
    ("tolerances.tail_tol=2", "tolerances.tail_tol"),
    ("sweep.samples=1", "sweep.samples"),
    ("initial.family=\"squeezed\"", "initial.family"),
    ("mode=3", "mode"),
    ("model.omega0=\"x\"", "model.omega0"),
])
def test_field_level_errors(override, field):
    with pytest.raises(ConfigError) as info:
        build_config(load_raw(None, None, [override]))
    assert info.value.field == field


def test_validation_exit_code(tmp_path, capsys):
    code, _ = _run(tmp_path, "entropy", "--set", "sweep.samples=1")
    assert code == 1
    assert "sweep.samples" in capsys.readouterr().err


def test_unknown_command_exit_code(tmp_path):
    code, _ = _run(tmp_path, "plot")
    assert code == 1


def test_bad_json_exit_code(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    code, _ = _run(tmp_path, "entropy", "--config", str(cfg))
    assert code == 1


def test_resource_exit_code(tmp_path):
    code, _ = _run(tmp_path, "qfunc", "--set", "grid={\"q_min\":-1,\"q_max\":1,\"p_min\":-1,"
                   "\"p_max\":1,\"nq\":3000,\"np\":3000}")
    assert code == 1


def test_numerical_exit_code(tmp_path, capsys):
    # an impossibly tight boundary check makes the quadrature estimate fail
    code, _ = _run(tmp_path, "oracle-check", "--set", "tolerances.tail_tol=0.5",
                   "--set", "sweep.samples=3")
    assert code == 2
    assert "kerr_twin." in capsys.readouterr().err


def test_oracle_check_defaults(tmp_path):
    code, out = _run(tmp_path, "oracle-check")
    assert code == 0
    rows = _rows(out / "oracle_check.csv")
    assert rows[1:] and all(r[3] == "1" for r in rows[1:])


@pytest.mark.parametrize("command,files", [
    ("evolve", ["evolve.csv"]),
    ("timescales", ["timescales.json", "recurrence.csv"]),
    ("catmix", ["catmix.csv", "catmix_coeffs.csv", "catmix_weights.csv"]),
    ("qfunc", ["qfunc_index.csv", "qfunc_000.csv", "qfunc_000.json"]),
])
def test_commands_write_files(tmp_path, command, files):
    code, out = _run(tmp_path, command, "--preset", "fig5")
    assert code == 0
    for f in files:
        assert (out / f).exists()


def test_qfunc_frames_normalised(tmp_path):
    code, out = _run(tmp_path, "qfunc", "--preset", "fig3", "--set", "sweep.times=[0, 5]")
    assert code == 0
    rows = _rows(out / "qfunc_index.csv")
    assert len(rows) == 3
    for r in rows[1:]:
        assert float(r[2]) == pytest.approx(1.0, abs=1e-3)
