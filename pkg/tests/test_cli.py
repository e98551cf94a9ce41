"""Command-line interface: determinism, config layering, exit codes."""

import math

import pytest

from grazesim.cli import main
from conftest import REF_ETA_003, REF_TAU

DIRECT = ["--tau", "0.5812946423922891", "--delta", "0.1518358019806489", "--chi", "1"]


def _file(path):
    with open(path, "rb") as fh:
        return fh.read()


def _report_dict(text):
    out = {}
    for line in text.strip().splitlines():
        key, _, val = line.partition(" = ")
        out[key] = val
    return out


def test_osc_params_report(capsys):
    assert main(["osc-params", "--mu", "0.03"]) == 0
    rep = _report_dict(capsys.readouterr().out)
    assert float(rep["tau"]) == pytest.approx(REF_TAU, rel=1e-15)
    assert float(rep["c"]) == math.sqrt(2.0)
    assert float(rep["betaR"]) == 2.0
    assert float(rep["eta"]) == pytest.approx(REF_ETA_003, rel=1e-12)
    assert float(rep["F"]) == pytest.approx(3.5128336140500593 + REF_ETA_003, rel=1e-12)
    assert rep["chi"] == "1"


def test_osc_params_f_flag_inverts_mu(capsys):
    assert main(["osc-params", "--F", "3.52"]) == 0
    rep = _report_dict(capsys.readouterr().out)
    assert float(rep["eta"]) == pytest.approx(3.52 - 3.5128336140500593, rel=1e-10)
    # and the report lands in the file too, byte for byte
    assert main(["osc-params", "--F", "3.52"]) == 0
    again = capsys.readouterr().out
    assert _report_dict(again) == rep


def test_osc_params_out_file(tmp_path, capsys):
    out = tmp_path / "report.txt"
    assert main(["osc-params", "--mu", "0.01", "--out", str(out)]) == 0
    assert capsys.readouterr().out.encode() == _file(out)


@pytest.mark.parametrize(
    "args,stdout_only",
    [
        (["bifdiag", "--model", "n1", "--alpha", "1", "--mu-min", "0", "--mu-max", "0.03",
          "--mu-steps", "13", "--transient", "100", "--keep", "20", "--chunks", "4"], False),
        (["bifdiag", "--model", "det", *DIRECT, "--mu-min", "-0.01", "--mu-max", "0.02",
          "--mu-steps", "7", "--transient", "100", "--keep", "10"], False),
        (["density", "--model", "n2", "--alpha", "1", "--mu", "0.03", "--n", "20000",
          "--grid", "64", "--transient", "200"], False),
        (["sigma", "--model", "n3", "--alpha", "1", "--mu", "0.03", "--n", "500",
          "--transient", "200"], False),
        (["orbit", "--model", "ode-impact-ou", "--mu", "0.03", "--alpha", "1",
          "--t-end", "25", "--dt", "2e-3"], False),
        (["sample-fr", "--rho", "0.05", "--n", "2000"], False),
        (["compare", "--model", "n3", "--mu", "0.03", "--alpha", "1", "--n", "40",
          "--dt", "4e-3", "--transient-map", "200", "--transient-ode", "15"], False),
    ],
    ids=["bifdiag", "bifdiag-direct", "density", "sigma", "orbit", "sample-fr", "compare"],
)
def test_reruns_are_byte_identical(tmp_path, capsys, args, stdout_only):
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / f"{tag}.out"
        assert main([*args, "--seed", "3", "--out", str(out)]) == 0
        outs.append(_file(out) + capsys.readouterr().out.encode())
    assert outs[0] == outs[1]


def test_dump_config_round_trip(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    out1 = tmp_path / "one.csv"
    out2 = tmp_path / "two.csv"
    assert main([
        "sigma", "--model", "n1", "--alpha", "2", "--mu", "0.02", "--n", "400",
        "--seed", "9", "--out", str(out1), "--dump-config", str(cfg),
    ]) == 0
    capsys.readouterr()
    assert main(["sigma", "--config", str(cfg), "--out", str(out2)]) == 0
    capsys.readouterr()
    assert _file(out1) == _file(out2)


def test_flag_overrides_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("model = n1\nalpha = 1\nmu = 0.02\nn = 300\nseed = 4\n")
    out_cfg = tmp_path / "cfg.csv"
    out_flag = tmp_path / "flag.csv"
    out_ref = tmp_path / "ref.csv"
    assert main(["sigma", "--config", str(cfg), "--out", str(out_cfg)]) == 0
    assert main(["sigma", "--config", str(cfg), "--mu", "0.03", "--out", str(out_flag)]) == 0
    assert main(["sigma", "--model", "n1", "--alpha", "1", "--mu", "0.03", "--n", "300",
                 "--seed", "4", "--out", str(out_ref)]) == 0
    capsys.readouterr()
    assert _file(out_flag) == _file(out_ref)
    assert _file(out_flag) != _file(out_cfg)


def test_flag_silences_config_pair(tmp_path, capsys):
    # an explicit --F must not clash with a config file that sets mu
    cfg = tmp_path / "run.cfg"
    cfg.write_text("mu = 0.02\n")
    assert main(["osc-params", "--config", str(cfg), "--F", "3.52"]) == 0
    rep = _report_dict(capsys.readouterr().out)
    assert float(rep["F"]) == 3.52


def test_seed_resolution(tmp_path, capsys, monkeypatch):
    args = ["density", "--model", "n1", "--alpha", "1", "--mu", "0.02", "--n", "5000",
            "--grid", "32", "--transient", "200"]
    out_env = tmp_path / "env.csv"
    out_flag = tmp_path / "flag.csv"
    out_other = tmp_path / "other.csv"
    monkeypatch.setenv("GRAZESIM_SEED", "123")
    assert main([*args, "--out", str(out_env)]) == 0
    monkeypatch.setenv("GRAZESIM_SEED", "5")
    assert main([*args, "--seed", "123", "--out", str(out_flag)]) == 0
    monkeypatch.delenv("GRAZESIM_SEED")
    assert main([*args, "--seed", "77", "--out", str(out_other)]) == 0
    capsys.readouterr()
    assert _file(out_env) == _file(out_flag)
    assert _file(out_other) != _file(out_env)


def test_bad_seed_env(monkeypatch, capsys):
    monkeypatch.setenv("GRAZESIM_SEED", "lots")
    assert main(["osc-params"]) == 2
    capsys.readouterr()


def test_thread_count_leaves_output_alone(tmp_path, capsys):
    args = ["bifdiag", "--model", "n1", "--alpha", "1", "--mu-min", "0", "--mu-max",
            "0.03", "--mu-steps", "12", "--transient", "80", "--keep", "15",
            "--chunks", "4", "--seed", "2"]
    out1 = tmp_path / "t1.csv"
    out2 = tmp_path / "t2.csv"
    assert main([*args, "--threads", "1", "--out", str(out1)]) == 0
    assert main([*args, "--threads", "2", "--out", str(out2)]) == 0
    capsys.readouterr()
    assert _file(out1) == _file(out2)


@pytest.mark.parametrize(
    "args",
    [
        ["osc-params", "--mu", "0.01", "--F", "3.52"],          # exclusive pair
        ["sigma", "--model", "n1", "--mu", "0.02", "--alpha", "1", "--eps", "0.1",
         "--n", "10", "--out", "x.csv"],                        # exclusive pair
        ["bifdiag", "--model", "det", "--mu-min", "0", "--mu-max", "0.01"],  # missing --out
        ["sigma", "--model", "det", "--mu", "0.02", "--alpha", "1",
         "--n", "10", "--out", "x.csv"],                        # noise on det model
        ["bifdiag", "--model", "n1", *DIRECT, "--alpha", "1", "--mu-min", "0",
         "--mu-max", "0.01", "--out", "x.csv"],                 # direct params are det-only
        ["bifdiag", "--model", "det", "--tau", "0.5", "--mu-min", "0",
         "--mu-max", "0.01", "--out", "x.csv"],                 # incomplete direct set
        ["density", "--model", "det", "--mu", "0.01", "--grid", "0x5",
         "--n", "10", "--out", "x.txt"],                        # bad grid
        ["density", "--model", "det", "--mu", "0.01", "--bounds", "1,0,0,1",
         "--n", "10", "--out", "x.txt"],                        # inverted bounds
        ["orbit", "--model", "n1", "--out", "x.csv"],           # map model on flow command
        ["no-such-command"],
        ["osc-params", "--mystery-flag", "3"],
    ],
    ids=["mu-F", "alpha-eps", "missing-out", "noise-on-det", "direct-stoch",
         "direct-partial", "grid", "bounds", "model-choice", "command", "flag"],
)
def test_usage_errors_exit_2(args, capsys):
    assert main(args) == 2
    capsys.readouterr()


def test_unknown_config_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("mu = 0.01\nwavelength = 7\n")
    assert main(["osc-params", "--config", str(cfg)]) == 2
    assert "wavelength" in capsys.readouterr().err


def test_config_pair_conflict_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("mu = 0.01\nF = 3.52\n")
    assert main(["osc-params", "--config", str(cfg)]) == 2
    capsys.readouterr()


def test_model_errors_exit_3(capsys):
    # a support that cannot decelerate makes the whole construction degenerate
    assert main(["osc-params", "--k-supp", "0"]) == 3
    assert "c = 0" in capsys.readouterr().err
