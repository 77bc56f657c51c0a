import json
import textwrap

import numpy as np
import pytest

from wignerlss import cli
from wignerlss import functionals as fl
from wignerlss import harness as hn


def write_config(tmp_path, text, name="exp.yaml"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return str(path)


BASE = """
ensemble:
  beta: 1
  profile: {type: flat, N: 10}
  offdiag: {family: gaussian}
  diag: gaussian
testfn: x2
run:
  replicas: 2
  master_seed: 11
  lambda_grid: [0.0, 0.5]
"""


def test_simulate_smoke(tmp_path, capsys):
    cfg = write_config(tmp_path, BASE)
    out = tmp_path / "out"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    samples = (out / "samples.csv").read_text().splitlines()
    assert samples[0] == "lss"
    assert len(samples) == 3
    summary = json.loads((out / "summary.json").read_text())
    assert summary["samples_csv"] == "samples.csv"
    assert summary["config"]["replicas"] == 2
    assert "lss_samples" not in summary
    assert json.loads(capsys.readouterr().out) == summary


def test_simulate_byte_determinism(tmp_path, capsys):
    cfg = write_config(tmp_path, BASE)
    blobs = []
    outs = []
    for name, threads in (("a", "1"), ("b", "4"), ("c", "1")):
        out = tmp_path / name
        assert cli.main(["simulate", "--config", cfg, "--out", str(out),
                         "--threads", threads]) == 0
        outs.append(capsys.readouterr().out)
        blobs.append(((out / "samples.csv").read_bytes(), (out / "summary.json").read_bytes()))
    assert blobs[0] == blobs[1] == blobs[2]
    assert outs[0] == outs[1] == outs[2]


def test_simulate_replicas_and_seed_overrides(tmp_path):
    cfg = write_config(tmp_path, BASE)
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert cli.main(["simulate", "--config", cfg, "--out", str(a), "--replicas", "5"]) == 0
    assert len((a / "samples.csv").read_text().splitlines()) == 6
    assert cli.main(["simulate", "--config", cfg, "--out", str(b), "--seed", "99"]) == 0
    assert cli.main(["simulate", "--config", cfg, "--out", str(c)]) == 0
    assert (b / "samples.csv").read_bytes() != (c / "samples.csv").read_bytes()
    assert json.loads((b / "summary.json").read_text())["config"]["master_seed"] == 99


def test_predict_flat_x(tmp_path, capsys):
    cfg = write_config(tmp_path, """
    ensemble:
      profile: {type: flat, N: 25}
    testfn: x
    """)
    assert cli.main(["predict", "--config", cfg]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["V"] == pytest.approx(1.0, abs=1e-10)
    assert out["paths_agree"] is True
    assert out["V_integral"] == pytest.approx(1.0, abs=1e-6)
    assert set(out) == {"V", "E", "B", "beta", "J", "tail_estimate", "paths_agree", "V_integral"}


def test_predict_flat_x2(tmp_path, capsys):
    cfg = write_config(tmp_path, """
    ensemble:
      beta: 1
      profile: {type: flat, N: 50}
    testfn: x2
    output: {dir: OUTDIR}
    """.replace("OUTDIR", str(tmp_path / "res")))
    assert cli.main(["predict", "--config", cfg]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["V"] == pytest.approx(4.0, abs=1e-9)
    assert out["E"] == pytest.approx(0.0, abs=1e-10)
    on_disk = json.loads((tmp_path / "res" / "prediction.json").read_text())
    assert on_disk == out


def test_config_errors(tmp_path, capsys):
    bad_top = write_config(tmp_path, BASE + "bogus: 1\n", "t1.yaml")
    assert cli.main(["predict", "--config", bad_top]) == 2
    assert "bogus" in capsys.readouterr().err

    bad_profile = write_config(tmp_path, """
    ensemble:
      profile: {type: nosuch, N: 10}
    testfn: x
    """, "t2.yaml")
    assert cli.main(["predict", "--config", bad_profile]) == 2
    assert "profile.type" in capsys.readouterr().err

    bad_nested = write_config(tmp_path, """
    ensemble:
      profile: {type: flat, N: 10, W: 3}
    testfn: x
    """, "t3.yaml")
    assert cli.main(["predict", "--config", bad_nested]) == 2
    err = capsys.readouterr().err
    assert "unknown keys" in err and "W" in err

    bad_yaml = write_config(tmp_path, "ensemble: [unclosed\n", "t4.yaml")
    assert cli.main(["predict", "--config", bad_yaml]) == 2
    assert cli.main(["predict", "--config", str(tmp_path / "missing.yaml")]) == 2

    bad_run = write_config(tmp_path, BASE.replace("master_seed", "masterseed"), "t5.yaml")
    assert cli.main(["simulate", "--config", bad_run, "--out", str(tmp_path / "x")]) == 2
    assert "masterseed" in capsys.readouterr().err


def test_json_config_accepted(tmp_path, capsys):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({
        "ensemble": {"profile": {"type": "flat", "N": 20}},
        "testfn": "x",
    }))
    assert cli.main(["predict", "--config", str(cfg)]) == 0
    assert json.loads(capsys.readouterr().out)["V"] == pytest.approx(1.0, abs=1e-10)


def test_verify_pass(tmp_path, capsys):
    cfg = write_config(tmp_path, """
    ensemble:
      beta: 1
      profile: {type: flat, N: 24}
    testfn: x
    run:
      replicas: 80
      master_seed: 4
      lambda_grid: [0.0, 0.25]
    """)
    code = cli.main(["verify", "--config", cfg, "--out", str(tmp_path / "v")])
    out = capsys.readouterr().out
    report = json.loads(out)
    assert code == 0, report
    assert report["overall_pass"] is True
    assert report["variance"]["threshold"] == 4.0
    assert report["char"][0]["threshold"] > 0.0
    assert report["prediction"]["V"] == pytest.approx(1.0, abs=1e-10)
    assert json.loads((tmp_path / "v" / "report.json").read_text()) == report


def test_verify_fails_on_inflated_variance(tmp_path, capsys, monkeypatch):
    real = fl.clt_prediction

    def inflated(*args, **kwargs):
        p = real(*args, **kwargs)
        return fl.CltPrediction(variance=4.0 * p.variance, mean_shift=p.mean_shift,
                                cubic=p.cubic, beta=p.beta, J=p.J,
                                tail_estimate=p.tail_estimate, paths_agree=p.paths_agree)

    monkeypatch.setattr(hn.fl, "clt_prediction", inflated)
    cfg = write_config(tmp_path, """
    ensemble:
      profile: {type: flat, N: 30}
    testfn: x
    run: {replicas: 300, master_seed: 8}
    """)
    code = cli.main(["verify", "--config", cfg, "--out", str(tmp_path / "v")])
    report = json.loads(capsys.readouterr().out)
    assert code == 1
    assert report["overall_pass"] is False
    assert report["variance"]["z"] < -5.0


def test_maxpoly(tmp_path, capsys):
    cfg = write_config(tmp_path, """
    ensemble:
      profile: {type: flat, N: 120}
    testfn: x
    run:
      replicas: 3
      master_seed: 2
      maxfield: {kappa: 0.3, grid: 400}
    """)
    out = tmp_path / "m"
    assert cli.main(["maxpoly", "--config", cfg, "--out", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["replicas"] == 3
    assert 0.0 < summary["median_re"] < 3.0
    rows = (out / "ratios.csv").read_text().splitlines()
    assert rows[0] == "re_ratio,im_plus_ratio,im_minus_ratio"
    assert len(rows) == 4
    assert json.loads((out / "maxpoly.json").read_text()) == summary


def test_maxpoly_needs_maxfield_section(tmp_path, capsys):
    cfg = write_config(tmp_path, BASE)
    assert cli.main(["maxpoly", "--config", cfg]) == 2
    assert "maxfield" in capsys.readouterr().err


def test_profile_command(tmp_path, capsys):
    cfg = write_config(tmp_path, """
    profile: {type: band, N: 40, params: {W: 5}}
    """)
    out = tmp_path / "p"
    assert cli.main(["profile", "--config", cfg, "--out", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["checks"]["row_sum_err"] <= 1e-10
    S = np.loadtxt(out / "profile.csv", delimiter=",")
    assert S.shape == (40, 40)
    assert np.allclose(S.sum(axis=1), 1.0, atol=1e-12)


def test_lambda_window_warning(tmp_path, capsys):
    cfg = write_config(tmp_path, BASE.replace("[0.0, 0.5]", "[50.0]"))
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / "w")]) == 0
    assert "trusted window" in capsys.readouterr().err


def test_quick_caps(tmp_path, capsys):
    cfg = write_config(tmp_path, """
    ensemble:
      profile: {type: flat, N: 600}
    testfn: x
    run: {replicas: 500, master_seed: 1}
    """)
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / "q"), "--quick"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["config"]["replicas"] == 20
    assert summary["config"]["ensemble"]["profile"]["N"] == 200


def test_numerical_failure_exit_code(tmp_path, capsys, monkeypatch):
    from wignerlss.errors import NumericalError

    def boom(*args, **kwargs):
        raise NumericalError("replica 0 failed")

    monkeypatch.setattr(cli.hn, "run_ensemble", boom)
    cfg = write_config(tmp_path, BASE)
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / "n")]) == 3
    assert "numerical failure" in capsys.readouterr().err
