from __future__ import annotations

import csv
import io
import math
from dataclasses import replace

import numpy as np
import pytest

from fracac import drivers
from fracac.cli import main, preset_names, resolve_config
from fracac.mittag_leffler import mittag_leffler

SMALL_RUN = """\
scheme = {scheme}
alpha = 0.6
kappa = 0.1
tau = {tau}
N = 40
S = {S}
dim = 2
cells = 15
length = 2*pi
initial_condition = random
ic.amplitude = {amplitude}
seed = 42
snapshot_times = 0, 0.2
emit_pgm = true
newton_max = {newton_max}
"""


def write_cfg(tmp_path, scheme="WCS", tau=0.01, S=2, amplitude=0.05, newton_max=50):
    path = tmp_path / "run.cfg"
    path.write_text(SMALL_RUN.format(
        scheme=scheme, tau=tau, S=S, amplitude=amplitude, newton_max=newton_max))
    return path


def rows(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


# {{{ run


def test_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", str(write_cfg(tmp_path)), "--output", str(out)]) == 0

    summary = capsys.readouterr().out
    assert "max_principle = pass" in summary
    assert "weighted_energy_stability = pass" in summary
    assert summary.rstrip().endswith("verdict = pass")

    series = rows((out / "series.csv").read_text())
    assert list(series[0]) == [
        "n", "t", "energy", "frac_deriv_energy", "max_norm", "newton_iters", "constraint_ok",
    ]
    assert len(series) == 41 and series[0]["frac_deriv_energy"] == "nan"
    assert sorted(p.name for p in out.glob("field_*")) == [
        "field_n000000.csv", "field_n000000.pgm", "field_n000020.csv", "field_n000020.pgm",
    ]


def test_run_is_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path)
    for name in ("a", "b"):
        assert main(["run", str(cfg), "--output", str(tmp_path / name)]) == 0
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_run_violated_constraint_is_not_asserted(tmp_path, capsys):
    cfg = write_cfg(tmp_path, scheme="LWS", tau=1.0, S=0, amplitude=1.0)
    with pytest.warns(UserWarning):
        code = main(["run", str(cfg), "--output", str(tmp_path / "o")])
    assert code == 0
    summary = capsys.readouterr().out
    assert "constraint_ok = false" in summary
    assert "max_principle = not asserted" in summary


def test_run_solver_failure_exit_code(tmp_path, capsys):
    cfg = write_cfg(tmp_path, scheme="CS", tau=1.0, amplitude=1.0, newton_max=1)
    assert main(["run", str(cfg), "--output", str(tmp_path / "o")]) == 3
    assert "solver failure" in capsys.readouterr().err


def test_invariant_failure_exit_code():
    report = drivers.RunReport(trajectory=None, verdicts={"max_principle": "fail"})
    assert report.exit_code == drivers.EXIT_INVARIANT == 2
    report = drivers.RunReport(trajectory=None, verdicts={"a": "pass", "b": "not asserted (x)"})
    assert report.exit_code == 0


def test_config_errors_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("alpha = 1.5\n")
    assert main(["run", str(bad)]) == 4
    err = capsys.readouterr().err
    assert "bad.cfg:1" in err and "missing required keys" in err

    assert main(["run", "no_such_preset"]) == 4
    with pytest.raises(SystemExit) as info:
        main(["weights", "--alpha", "x", "--n", "3"])
    assert info.value.code == 4
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 4


def test_presets_resolve():
    assert "smooth_convergence" in preset_names()
    assert resolve_config("sine_1d").initial_condition == "sine"
    assert resolve_config("sine_1d.cfg").kappa == 0.1


# }}}


# {{{ weights and ml-check


def test_weights_csv(capsys):
    assert main(["weights", "--alpha", "0.5", "--n", "3"]) == 0
    table = rows(capsys.readouterr().out)
    assert list(table[0]) == ["j", "omega_alpha", "omega_alpha_minus_1", "partial_sum"]
    assert [float(r["omega_alpha"]) for r in table] == [1.0, -0.5, -0.125, -0.0625]
    assert [float(r["omega_alpha_minus_1"]) for r in table] == [1.0, 0.5, 0.375, 0.3125]
    assert [float(r["partial_sum"]) for r in table] == [1.0, 0.5, 0.375, 0.3125]


def test_weights_rejects_alpha(capsys):
    assert main(["weights", "--alpha", "1.5", "--n", "3"]) == 4


def test_ml_check_single_step(capsys):
    assert main(["ml-check", "--alpha", "0.5", "--tau-list", "0.5", "--T", "0.5"]) == 0
    (row,) = rows(capsys.readouterr().out)
    assert float(row["numeric"]) == pytest.approx(1.0 / (1.0 + math.sqrt(0.5)), rel=1e-15)
    assert float(row["numeric"]) == pytest.approx(0.585786, abs=1e-6)
    assert float(row["exact"]) == pytest.approx(mittag_leffler(0.5, 1.0, -math.sqrt(0.5)))


def test_ml_check_integer_order_is_backward_euler():
    (row,) = drivers.ml_check(1.0, 3.0, [0.1], T=0.1)
    assert row.numeric == pytest.approx(1.0 / 1.3, rel=1e-15)
    assert row.exact == pytest.approx(math.exp(-0.3), abs=1e-12)


def test_ml_check_first_order_ratios(capsys):
    assert main(["ml-check", "--alpha", "0.5"]) == 0
    captured = capsys.readouterr()
    table = rows(captured.out)
    assert len(table) == 7
    errors = np.array([float(r["abs_error"]) for r in table])
    ratios = errors[:-1] / errors[1:]
    assert np.all((ratios > 1.7) & (ratios < 2.3))
    assert "error ratios" in captured.err


def test_ml_check_rejects():
    assert main(["ml-check", "--alpha", "0.5", "--lambda", "0"]) == 4
    assert main(["ml-check", "--alpha", "0.5", "--tau-list", "0.3"]) == 4


# }}}


# {{{ converge and properties


def test_converge_linear_mode_is_first_order(tmp_path, capsys):
    code = main(["converge", "ml_linear", "--levels", "4", "--output", str(tmp_path)])
    captured = capsys.readouterr()
    assert code == 0

    table = rows(captured.out)
    assert (tmp_path / "rates.csv").read_text() == captured.out
    assert list(table[0]) == ["scheme", "alpha", "level", "tau", "e_t", "pairwise_rate", "ls_rate"]
    assert len(table) == 4 and table[0]["pairwise_rate"] == ""
    assert float(table[0]["ls_rate"]) == pytest.approx(1.0, abs=0.1)
    assert "pass" in captured.err


def test_converge_levels_validation(capsys):
    assert main(["converge", "ml_linear", "--levels", "2"]) == 4
    assert main(["converge", "smooth_convergence", "--levels", "3"]) == 4


def test_converge_self_convergence_small(tmp_path):
    cfg = replace(resolve_config("sine_1d"), cells=(31,), tau=None, T=0.5, N=8)
    report = drivers.converge(cfg, 4, alphas=[0.5, 0.7], schemes=["CS", "lws"],
                              output_dir=tmp_path, threads=2)
    assert [(c.scheme.value, c.alpha) for c in report.cases] == [
        ("CS", 0.5), ("CS", 0.7), ("LWS", 0.5), ("LWS", 0.7),
    ]
    for case in report.cases:
        assert len(case.errors) == 3 and case.target == case.alpha
        assert case.taus == [0.5 / 8, 0.5 / 16, 0.5 / 32]

    # threaded and serial runs agree exactly
    serial = drivers.converge(cfg, 4, alphas=[0.5, 0.7], schemes=["CS", "LWS"], threads=1)
    assert serial.to_csv() == report.to_csv()


def test_properties_command(capsys):
    assert main(["properties", "--seed", "1", "--trials", "50"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "property,status,checked,violations,detail"
    assert len(lines) == 11
    assert all(line.split(",")[1] == "pass" for line in lines[1:])


def test_properties_rejects_trials():
    assert main(["properties", "--trials", "0"]) == 4


def test_thread_count(monkeypatch):
    monkeypatch.delenv("FRACAC_THREADS", raising=False)
    assert drivers.thread_count() == 1
    monkeypatch.setenv("FRACAC_THREADS", "3")
    assert drivers.thread_count() == 3
    monkeypatch.setenv("FRACAC_THREADS", "many")
    with pytest.raises(ValueError):
        drivers.thread_count()


# }}}
