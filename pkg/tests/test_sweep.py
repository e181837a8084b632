import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ghzmag import analytic, cli, sweep
from ghzmag.quantum import Scheme
from ghzmag.sweep import ConfigError, SweepRow


def small_cfg(**kw):
    text = "L = 1, 4, 16\nm = 1.1, 1.5\ngamma = 1e-6\n"
    cfg = sweep.parse_config(text)
    for k, v in kw.items():
        setattr(cfg, k, v)
    return cfg


def test_minimal_config_defaults():
    cfg = sweep.parse_config("L = 1")
    assert cfg.L == [1]
    assert cfg.omega == 1.0 and cfg.gamma == [1e-6] and cfg.mode == "analytic"
    assert cfg.noise == "parallel" and cfg.schemes == [Scheme.INDIVIDUAL, Scheme.GHZ]
    assert cfg.T_normalized


def test_detuning_log_range():
    cfg = sweep.parse_config("m = 1.00001:2.0:50")
    det = np.array(cfg.m) - 1.0
    assert len(cfg.m) == 251
    assert det[0] == pytest.approx(1e-5) and det[-1] == pytest.approx(1.0)
    np.testing.assert_allclose(np.diff(np.log10(det)), 1 / 50, rtol=1e-6)


def test_gamma_and_noise_on_one_line():
    cfg = sweep.parse_config("gamma = 1e-6, noise = parallel  # Fig-style plane")
    assert cfg.gamma == [1e-6]
    nm = cfg.noise_model(cfg.gamma[0])
    assert nm.kind == "parallel" and nm.rate == 1e-6


def test_comments_lists_and_unicode_minus():
    cfg = sweep.parse_config("# header\nL = 2, 8 , 32\n\ngamma = 1e−3\nscheme = ghz\nnoise = depolarizing\n")
    assert cfg.L == [2, 8, 32] and cfg.gamma == [1e-3]
    assert cfg.schemes == [Scheme.GHZ] and cfg.noise == "depolarizing"


def test_L_log_range_rounds_and_dedups():
    cfg = sweep.parse_config("L = 1:100:5")
    assert cfg.L[0] == 1 and cfg.L[-1] == 100
    assert len(cfg.L) == len(set(cfg.L))
    assert cfg.L == sorted(cfg.L)


@pytest.mark.parametrize("text,line,word", [
    ("L = 1\ncolour = red", 2, "unknown key"),
    ("L = 1\n\nm = 1:2", 3, "malformed range"),
    ("m = 1.5:x:3", 1, "malformed range"),
    ("L = 1\nscheme = ,", 2, "empty grid"),
    ("L = 2.5", 1, "integers"),
    ("L = 1\nmode = fast", 2, "mode"),
    ("L = 13\nmode = numeric", 1, "L <="),
    ("L = 1\ngamma = 2:1:3", 2, "invalid log range"),
    ("just words", 1, "key = value"),
])
def test_config_errors_name_the_line(text, line, word):
    with pytest.raises(ConfigError) as info:
        sweep.parse_config(text)
    msg = str(info.value)
    assert msg.startswith(f"line {line}:")
    assert word in msg


def test_presets_load():
    for name in ("fig1", "fig2", "fig3", "fig4"):
        cfg = sweep.load_config(name)
        assert cfg.gamma == [1e-6]
        assert cfg.noise == ("parallel" if name in ("fig1", "fig2") else "depolarizing")
    assert len(sweep.load_config("fig1").L) == 30 and len(sweep.load_config("fig1").m) == 30
    with pytest.raises(FileNotFoundError):
        sweep.load_config("fig9")


def test_sweep_completeness_and_ratio_join():
    cfg = small_cfg()
    rows = sweep.run_sweep(cfg)
    assert len(rows) == 3 * 2 * 1 * 2
    assert [(r.L, r.m, r.scheme) for r in rows[:4]] == [
        (1, 1.1, "individual"), (1, 1.1, "ghz"), (1, 1.5, "individual"), (1, 1.5, "ghz")]
    for ind, ghz in zip(rows[::2], rows[1::2]):
        assert ind.ratio == ghz.ratio == pytest.approx(ghz.delta_eps_norm / ind.delta_eps_norm)
        assert ind.validity == ghz.validity == "ok"


def test_single_L_sweep_has_unit_ratio():
    cfg = sweep.parse_config("L = 1\nm = 1.0001, 1.01, 1.3, 2.5")
    assert all(r.ratio == 1.0 for r in sweep.run_sweep(cfg))


def test_point_failures_are_recorded():
    cfg = sweep.parse_config("L = 1\nm = 1.0\ngamma = 0\nscheme = ghz")
    [row] = sweep.run_sweep(cfg)
    assert row.validity.startswith("failed:")
    assert row.t_opt is None and row.delta_eps_norm is None


def test_compare_mode_agrees():
    cfg = sweep.parse_config("L = 2\nm = 1.5\ngamma = 1e-2\nmode = compare")
    rows = sweep.run_sweep(cfg)
    assert [r.validity for r in rows] == ["ok", "ok"]
    num = sweep.run_sweep(sweep.parse_config("L = 2\nm = 1.5\ngamma = 1e-2\nmode = numeric"))
    for a, n in zip(rows, num):
        assert n.delta_eps_norm == pytest.approx(a.delta_eps_norm, rel=0.05)


def test_one_row_two_line_csv(tmp_path):
    row = SweepRow(1, 1.1, 1e-6, "parallel", "ghz", 10.0, 0.25, None, "detuning-limited", "ok")
    path = sweep.emit([row], "csv", tmp_path / "one.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "L,m,gamma,noise,scheme,t_opt,delta_eps_norm,ratio,regime,validity"
    assert lines[1] == "1,1.1,1e-06,parallel,ghz,10,0.25,,detuning-limited,ok"


def test_ratio_empty_for_single_scheme():
    cfg = small_cfg(schemes=[Scheme.GHZ])
    text = sweep.format_rows(sweep.run_sweep(cfg))
    for line in text.splitlines()[1:]:
        assert line.split(",")[7] == ""


def test_twelve_significant_digits():
    row = SweepRow(3, 1 / 3, 1e-6, "parallel", "ghz", math.pi, math.e, None, "x", "ok")
    line = sweep.format_rows([row]).splitlines()[1]
    assert "0.333333333333," in line and "3.14159265359," in line


def test_csv_json_round_trip(tmp_path):
    rows = sweep.run_sweep(small_cfg())
    a = sweep.read_rows(sweep.emit(rows, "csv", tmp_path / "t.csv"))
    b = sweep.read_rows(sweep.emit(rows, "json", tmp_path / "t.json"))
    assert a == b


def test_emit_errors(tmp_path):
    with pytest.raises(ValueError):
        sweep.format_rows([])
    row = SweepRow(1, 1.1, 1e-6, "parallel", "ghz", 1.0, 1.0, None, "x", "ok")
    with pytest.raises(OSError):
        sweep.emit([row], "csv", tmp_path / "missing" / "out.csv")


def test_parallel_jobs_are_byte_identical():
    cfg = small_cfg()
    serial = sweep.format_rows(sweep.run_sweep(cfg, jobs=1))
    pooled = sweep.format_rows(sweep.run_sweep(cfg, jobs=2))
    assert serial == pooled


def test_kraus_check_L2():
    residual, ok = sweep.check_kraus_equivalence(seed=5, Ls=(2,))
    assert ok and residual < 1e-12


def write_cfg(tmp_path, text="L = 1, 8\nm = 1.1\n"):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


def test_cli_sweep_twice_identical(tmp_path):
    cfg = write_cfg(tmp_path)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["sweep", "--config", cfg, "--output", str(out1)]) == 0
    assert cli.main(["sweep", "--config", cfg, "--output", str(out2), "--jobs", "2"]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert len(out1.read_text().splitlines()) == 5


def test_cli_sensitivity_json(tmp_path, capsys):
    assert cli.main(["sensitivity", "--config", write_cfg(tmp_path, "L = 16\nm = 1.1")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert set(out["schemes"]) == {"individual", "ghz"}
    assert 0 < out["ratio"] < 1


def test_cli_probability_compare(tmp_path, capsys):
    text = "L = 2\nm = 1.5\ngamma = 1e-2\ntimes = 0, 5, 10\nmode = compare"
    assert cli.main(["probability", "--config", write_cfg(tmp_path, text)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,scheme,p_analytic,p_numeric,residual,validity"
    assert len(lines) == 7
    assert max(float(l.split(",")[4]) for l in lines[1:]) < 5 * (2e-4) ** 2 + 3e-4


def test_cli_config_error_exit(tmp_path, capsys):
    assert cli.main(["sweep", "--config", write_cfg(tmp_path, "L = 1\nbogus = 2")]) == 1
    assert "line 2" in capsys.readouterr().err
    assert cli.main(["sweep", "--config", str(tmp_path / "nope.cfg")]) == 1
    assert cli.main(["sensitivity", "--config", write_cfg(tmp_path, "L = 1, 2")]) == 1


def test_cli_io_error_exit(tmp_path):
    bad = str(tmp_path / "no" / "such" / "dir" / "out.csv")
    assert cli.main(["sweep", "--config", write_cfg(tmp_path), "--output", bad]) == 3


def test_cli_verify_clean():
    assert cli.main(["verify"]) == 0


def test_verify_detects_window_sign_fault(monkeypatch, capsys):
    real = analytic.window
    monkeypatch.setattr(analytic, "window", lambda t, omega, m: -real(t, omega, m))
    report = sweep.verify()
    assert not report.passed
    assert "window-quadrature" in report.failed()
    assert cli.main(["verify"]) == 2
    assert "FAIL window-quadrature" in capsys.readouterr().out


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "ghzmag.cli", "sweep", "--config", "fig2", "--format", "json"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert len(json.loads(proc.stdout)) == 2 * len(sweep.load_config("fig2").L) * 3
