import json

import pytest
import yaml

import tubewalk.cli as cli
from tubewalk.config import (
    ConfigError,
    apply_overrides,
    builtin_config_names,
    load_builtin,
    validate,
)

SMALL = {
    "seed": 777,
    "environment": {"family": "degenerate", "atoms": [[-1.0, 0.5], [1.0, 0.5]]},
    "tube": {"alpha": 0.3, "n_list": [64, 128, 256], "g": -1.0, "h": 1.0},
    "estimator": {"method": "dp", "tolerance": 0.5},
    "gamma": {"beta": [0.0], "t": 2.0, "dt": 0.01, "grid_points": 100, "replicas": 8},
    "output": {"dir": "out"},
}


def _write(tmp_path, raw, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(raw))
    return str(path)


def test_builtin_configs_validate():
    names = builtin_config_names()
    assert set(names) == {
        "degenerate-rademacher",
        "random-shift-bernoulli",
        "random-mean-gaussian",
    }
    for name in names:
        cfg = validate(load_builtin(name))
        assert cfg.n_list and cfg.template.alpha == 0.3


def test_unknown_keys_rejected():
    for raw in (
        {**SMALL, "bogus": 1},
        {**SMALL, "environment": {**SMALL["environment"], "spread": 2}},
        {**SMALL, "tube": {**SMALL["tube"], "beta": 1}},
        {**SMALL, "estimator": {**SMALL["estimator"], "jobs": 4}},
        {**SMALL, "output": {**SMALL["output"], "format": "csv"}},
    ):
        with pytest.raises(ConfigError, match="unknown"):
            validate(raw)


def test_required_keys_and_values():
    with pytest.raises(ConfigError):
        validate({"tube": SMALL["tube"]})
    with pytest.raises(ConfigError):
        validate({**SMALL, "environment": {"family": "degenerate"}})
    both = {**SMALL, "tube": {**SMALL["tube"], "n": 10}}
    with pytest.raises(ConfigError, match="exactly one"):
        validate(both)
    bad_window = {**SMALL, "tube": {**SMALL["tube"], "start_window": [-2.0, 0.0]}}
    with pytest.raises(ConfigError):
        validate(bad_window)
    bad_method = {**SMALL, "estimator": {"method": "magic"}}
    with pytest.raises(ConfigError):
        validate(bad_method)


def test_overrides():
    raw = apply_overrides(SMALL, ["tube.alpha=0.25", "estimator.method=naive", "seed=9"])
    assert raw["tube"]["alpha"] == 0.25
    assert raw["estimator"]["method"] == "naive"
    assert raw["seed"] == 9
    assert SMALL["tube"]["alpha"] == 0.3  # original untouched
    with pytest.raises(ConfigError):
        apply_overrides(SMALL, ["no-equals-sign"])


def test_config_hash_tracks_content():
    a = validate(SMALL)
    b = validate(apply_overrides(SMALL, ["seed=9"]))
    assert a.config_hash != b.config_hash
    assert a.config_hash == validate(json.loads(json.dumps(SMALL))).config_hash


def test_cli_simulate_deterministic(tmp_path, monkeypatch):
    cfg = _write(tmp_path, SMALL)
    outs = []
    for threads, sub in (("1", "a"), ("3", "b"), ("3", "c")):
        monkeypatch.setenv("TUBEWALK_THREADS", threads)
        out = tmp_path / sub
        assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        outs.append((out / "simulate.csv").read_bytes())
    assert outs[0] == outs[1] == outs[2]
    header = outs[0].decode().splitlines()[0]
    assert header.startswith("family,method,n,alpha,f_offset,x0,p,log_p")
    assert header.endswith("master_seed,config_hash")


def test_cli_gamma_csv(tmp_path):
    cfg = _write(tmp_path, SMALL)
    out = tmp_path / "g"
    assert cli.main(["gamma", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "gamma.csv").read_text().splitlines()
    assert lines[0] == "beta,gamma_hat,ci_lo,ci_hi,t,dt,grid,replicas,master_seed,config_hash"
    assert len(lines) == 2
    rerun = tmp_path / "g2"
    assert cli.main(["gamma", "--config", cfg, "--out", str(rerun)]) == 0
    assert (out / "gamma.csv").read_bytes() == (rerun / "gamma.csv").read_bytes()


def test_cli_fit_outputs(tmp_path):
    raw = {**SMALL, "output": {"dir": "out", "svg": True}}
    cfg = _write(tmp_path, raw)
    out = tmp_path / "f"
    assert cli.main(["fit", "--config", cfg, "--out", str(out)]) == 0
    payload = json.loads((out / "fit.json").read_text())
    assert payload["schema_version"] == 1
    assert payload["check"]["fit"]["slope"] < 0
    assert payload["check"]["passed"] is True
    pts = (out / "fit_points.csv").read_text().splitlines()
    assert pts[0] == "n,n_pow,log_p,master_seed,config_hash"
    assert len(pts) == 4
    assert (out / "fit.svg").read_text().startswith("<svg")


def test_cli_report_round_trip(tmp_path):
    cfg = _write(tmp_path, SMALL)
    out = tmp_path / "r"
    assert cli.main(["report", "--config", cfg, "--out", str(out)]) == 0
    payload = json.loads((out / "report.json").read_text())
    assert payload["config_hash"] == validate(SMALL).config_hash
    # the embedded config re-runs to identical results (JSON is a YAML subset)
    embedded = tmp_path / "embedded.json"
    embedded.write_text(json.dumps(payload["config"]))
    out2 = tmp_path / "r2"
    assert cli.main(["report", "--config", str(embedded), "--out", str(out2)]) == 0
    second = json.loads((out2 / "report.json").read_text())
    assert second["simulate"] == payload["simulate"]
    assert second["gamma"] == payload["gamma"]
    assert second["fit"] == payload["fit"]


def test_cli_seed_and_set_overrides(tmp_path):
    cfg = _write(tmp_path, SMALL)
    out1 = tmp_path / "s1"
    out2 = tmp_path / "s2"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out1)]) == 0
    assert (
        cli.main(
            ["simulate", "--config", cfg, "--out", str(out2), "--set", "estimator.method=naive",
             "--set", "estimator.replicas=2000", "--seed", "31"]
        )
        == 0
    )
    a = (out1 / "simulate.csv").read_text()
    b = (out2 / "simulate.csv").read_text()
    assert "naive_mc" in b and "naive_mc" not in a
    assert ",31," in b.splitlines()[1]


def test_cli_bad_config_exit_code(tmp_path):
    cfg = _write(tmp_path, {**SMALL, "bogus": 1})
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path / "x")]) == 2
    missing = str(tmp_path / "missing.yaml")
    assert cli.main(["simulate", "--config", missing, "--out", str(tmp_path / "x")]) == 2


@pytest.mark.parametrize("name", ["degenerate-rademacher", "random-shift-bernoulli", "random-mean-gaussian"])
def test_cli_verify_builtin_configs(tmp_path, name):
    raw = load_builtin(name)
    cfg = _write(tmp_path, raw, name=f"{name}.yaml")
    assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path / name)]) == 0
    payload = json.loads((tmp_path / name / "verify.json").read_text())
    assert all(c["ok"] for c in payload["checks"])


def test_cli_fit_builtin_degenerate_within_tolerance(tmp_path):
    out = tmp_path / "fit"
    assert cli.main(["fit", "--config", "builtin:degenerate-rademacher", "--out", str(out)]) == 0
    payload = json.loads((out / "fit.json").read_text())
    assert payload["check"]["discrepancy"] <= 0.20


def test_cli_builtin_scheme_unknown_name(tmp_path):
    assert cli.main(["simulate", "--config", "builtin:nope", "--out", str(tmp_path / "x")]) == 2


def test_cli_simulate_start_sweep(tmp_path):
    raw = {
        **SMALL,
        "tube": {**SMALL["tube"], "n_list": [64], "start_window": [-0.5, 0.5], "sweep_starts": True},
    }
    cfg = _write(tmp_path, raw)
    out = tmp_path / "sweep"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "simulate.csv").read_text().splitlines()
    assert len(lines) == 12  # header + 11 start points


def test_theorem_check_with_mc_estimators(tmp_path):
    import tubewalk as tw

    tpl = tw.TubeTemplate(g=-1.5, h=1.5, alpha=0.3)
    spec = tw.EnvironmentSpec.rademacher()
    naive = tw.theorem_check(
        spec, tpl, [32, 64, 128], estimator="naive",
        estimator_params={"replicas": 20_000}, gamma_source="reference", seed=4, tolerance=2.0,
    )
    split = tw.theorem_check(
        spec, tpl, [32, 64, 128], estimator="splitting",
        estimator_params={"particles": 5_000, "checkpoints": 4},
        gamma_source="reference", seed=4, tolerance=2.0,
    )
    for rep in (naive, split):
        assert rep.fit.slope < 0
        assert all(p.estimate.stderr_log is not None for p in rep.points)


def test_simulate_and_fit_agree_on_points(tmp_path):
    cfg = _write(tmp_path, SMALL)
    out = tmp_path / "agree"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    assert cli.main(["fit", "--config", cfg, "--out", str(out)]) == 0
    sim = (out / "simulate.csv").read_text().splitlines()[1:]
    fit = (out / "fit_points.csv").read_text().splitlines()[1:]
    sim_logp = [row.split(",")[7] for row in sim]
    fit_logp = [row.split(",")[2] for row in fit]
    assert sim_logp == fit_logp


def test_cli_shared_environment_mode(tmp_path):
    cfg = _write(tmp_path, SMALL)
    out = tmp_path / "sh"
    assert (
        cli.main(
            ["simulate", "--config", cfg, "--out", str(out), "--set", "environment.shared=true",
             "--set", "environment.family=random_shift_bernoulli", "--set", "environment.d=0.5"]
        )
        == 0
    )
    rows = (out / "simulate.csv").read_text().splitlines()[1:]
    assert len(rows) == 3


def test_cli_dump_path(tmp_path):
    raw = {**SMALL, "output": {"dir": "out", "dump_path": True}}
    cfg = _write(tmp_path, raw)
    out = tmp_path / "dp"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "path.csv").read_text().splitlines()
    assert lines[0] == "i,s,m,u,gamma"
    assert len(lines) == 64 + 2
