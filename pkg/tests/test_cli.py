import json

import numpy as np
import pytest

from explosive_ar.cli import cli, parse_h
from explosive_ar.config import load_run_config
from explosive_ar.errors import BadH
from explosive_ar.export import dumps, read_path
from explosive_ar.montecarlo import run_experiment
from explosive_ar.simulate import recursion_residual


def invoke(runner, args, **kwargs):
    result = runner.invoke(cli, args, **kwargs)
    return result, (json.loads(result.stdout) if result.exit_code == 0 else None)


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert "0.1.0" in result.stdout


@pytest.mark.parametrize(
    "theta, region",
    [("0,4", "PurelyExplosive"), ("2", "PurelyExplosive"), ("0.5,0.3", "Stable"), ("4,-2", "Other")],
)
def test_classify(runner, theta, region):
    result, payload = invoke(runner, ["classify", "--theta", theta])
    assert result.exit_code == 0, result.output
    assert payload["region"] == region
    if "," in theta:
        assert payload["agreement"] is True


def test_classify_bad_theta(runner):
    result, _ = invoke(runner, ["classify", "--theta", "a,b"])
    assert result.exit_code == 2


def test_simulate_writes_files(runner, tmp_path):
    out = tmp_path / "run"
    result, payload = invoke(
        runner, ["simulate", "--theta", "0,4", "--n", "200", "--seed", "9", "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    assert payload["residual_ok"] is True
    assert payload["config"]["seed"] == 9
    path = read_path(out / "path.csv")
    assert path.n == 200
    assert np.abs(recursion_residual(path)).max() <= path.truncation_bound


def test_simulate_is_reproducible(runner, tmp_path):
    for name in ("a", "b"):
        result, _ = invoke(
            runner, ["--seed", "5", "simulate", "--theta", "2", "--n", "50", "--out", str(tmp_path / name)]
        )
        assert result.exit_code == 0, result.output
    assert (tmp_path / "a" / "path.csv").read_bytes() == (tmp_path / "b" / "path.csv").read_bytes()


def test_simulate_exit_codes(runner, tmp_path):
    out = str(tmp_path)
    assert invoke(runner, ["simulate", "--theta", "0.5", "--n", "10", "--seed", "1", "--out", out])[0].exit_code == 3
    assert invoke(runner, ["simulate", "--theta", "2", "--n", "10", "--out", out])[0].exit_code == 2
    assert invoke(runner, ["simulate", "--theta", "1,0", "--n", "10", "--seed", "1", "--out", out])[0].exit_code == 2
    result, _ = invoke(
        runner,
        ["simulate", "--theta", "2", "--n", "10", "--seed", "1", "--out", out],
        env={"EXPAR_HORIZON_CAP": "5"},
    )
    assert result.exit_code == 4


def test_moments(runner):
    result, payload = invoke(runner, ["moments", "--theta", "2"])
    assert result.exit_code == 0, result.output
    np.testing.assert_allclose(payload["structure"]["gamma"], [1 / 3, 1 / 6])
    np.testing.assert_allclose(payload["lse_cov"], [[0.75]])
    np.testing.assert_allclose(payload["corrected_cov"], [[12.0]])
    assert payload["residuals"]["passed"] is True


def test_moments_degenerate(runner):
    assert invoke(runner, ["moments", "--theta", "0,0"])[0].exit_code == 2


def test_estimate_from_file(runner, tmp_path):
    out = str(tmp_path)
    invoke(runner, ["simulate", "--theta", "2", "--n", "2000", "--seed", "3", "--out", out])
    result, payload = invoke(runner, ["estimate", "--path", str(tmp_path / "path.csv"), "--out", out])
    assert result.exit_code == 0, result.output
    assert abs(payload["theta_hat"][0] - 0.5) < 0.1
    assert (tmp_path / "estimate.csv").exists()


def test_estimate_inline(runner):
    result, payload = invoke(runner, ["estimate", "--theta", "0,4", "--n", "500", "--seed", "2"])
    assert result.exit_code == 0, result.output
    assert payload["theta_star_true"] == [0.0, 0.25]
    assert len(payload["normalized_dev_theta"]) == 2


def test_estimate_short_file(runner, tmp_path):
    (tmp_path / "p.csv").write_text("k,Y_k,Z_k\n0,0.1,\n1,0.2,0.3\n")
    result, _ = invoke(runner, ["estimate", "--path", str(tmp_path / "p.csv"), "--theta", "2"])
    assert result.exit_code == 2


def test_mc_matches_library(runner, tmp_path):
    config_file = tmp_path / "mc.toml"
    config_file.write_text(
        "[model]\ntheta = [0.0, 4.0]\n"
        "[run]\nn = 300\n"
        "[experiment]\nstatistic = \"mean_clt_y\"\nreplications = 100\nbase_seed = 11\n"
    )
    out = tmp_path / "mc"
    result, payload = invoke(runner, ["mc", "--config", str(config_file), "--out", str(out)])
    assert result.exit_code == 0, result.output
    report = run_experiment(load_run_config(config_file).experiment())
    assert payload["empirical_cov"] == report.empirical_cov.tolist()
    assert "samples" not in payload
    assert (out / "samples.csv").exists()
    assert (out / "summary.csv").exists()


def test_mc_flags(runner):
    result, payload = invoke(
        runner,
        ["mc", "--theta", "0,4", "--n", "200", "--seed", "4", "--statistic", "h_clt",
         "--h", "projection:2", "-R", "100"],
    )
    assert result.exit_code == 0, result.output
    assert payload["statistic"] == "h_clt"
    assert len(payload["target_cov"]) == 1


def test_mc_too_few_replications(runner):
    result, _ = invoke(runner, ["mc", "--theta", "2", "--n", "100", "--seed", "1", "-R", "50"])
    assert result.exit_code == 2


def test_forward_equiv(runner):
    result, payload = invoke(runner, ["forward-equiv", "--theta", "0.5", "--n", "200", "--seed", "8"])
    assert result.exit_code == 0, result.output
    assert payload["max_discrepancy"] <= 1e-10
    assert payload["within_bound"] is True
    assert invoke(runner, ["forward-equiv", "--theta", "0,4", "--n", "20", "--seed", "1"])[0].exit_code == 3
    assert invoke(runner, ["forward-equiv", "--theta", "0.5,0", "--n", "20", "--seed", "1"])[0].exit_code == 2


def test_demo(runner):
    result, payload = invoke(
        runner, ["demo", "--theta", "2", "--n", "80", "--seed", "3", "--u0-mode", "custom", "--u0", "1"]
    )
    assert result.exit_code == 0, result.output
    assert payload["mode"] == "custom"
    assert payload["saturated"] is False
    assert abs(payload["limit"][0]) > 0


def test_parse_h():
    assert parse_h("identity") == {"kind": "identity"}
    assert parse_h("projection:2") == {"kind": "projection", "index": 2}
    assert parse_h("tanh:1,2") == {"kind": "tanh", "coords": [1, 2]}
    assert parse_h('{"kind": "linear", "matrix": [[1, 1]]}')["matrix"] == [[1, 1]]
    assert parse_h(None) is None
    with pytest.raises(BadH):
        parse_h("projection:x")


def test_moments_residuals(runner):
    result, payload = invoke(runner, ["moments", "--theta", "0,4", "--sigma2", "1"])
    assert result.exit_code == 0, result.output
    residuals = payload["residuals"]
    assert max(residuals["yule_walker"], residuals["theta_star_gamma"], residuals["theta_star_sigma"]) <= 1e-9


def test_estimate_singular_file(runner, tmp_path):
    rows = "".join(f"{k},0.0,{'' if k < 1 else 0.0}\n" for k in range(0, 11))
    (tmp_path / "zero.csv").write_text("k,Y_k,Z_k\n" + rows)
    result, payload = invoke(runner, ["estimate", "--path", str(tmp_path / "zero.csv"), "--theta", "2"])
    assert result.exit_code == 0, result.output
    assert payload["gram_singular"] is True
    assert payload["theta_hat"] == [0.0]


def test_estimate_bad_files_exit_2(runner, tmp_path):
    out = str(tmp_path)
    invoke(runner, ["simulate", "--theta", "2", "--n", "30", "--seed", "3", "--out", out])
    (tmp_path / "path.json").write_text("{broken")
    assert invoke(runner, ["estimate", "--path", str(tmp_path / "path.csv")])[0].exit_code == 2

    (tmp_path / "bad.csv").write_text("k,Y_k,Z_k\n0,0.1,\n1,abc,0.2\n2,0.3,0.4\n3,0.5,0.6\n")
    result, _ = invoke(runner, ["estimate", "--path", str(tmp_path / "bad.csv"), "--theta", "2"])
    assert result.exit_code == 2


def test_classify_honours_boundary_tolerance(runner):
    result, payload = invoke(runner, ["classify", "--theta", "1.05"])
    assert payload["region"] == "PurelyExplosive"
    result, payload = invoke(runner, ["classify", "--theta", "1.05"], env={"EXPAR_BOUNDARY_TOL": "0.1"})
    assert result.exit_code == 0, result.output
    assert payload["region"] == "Other"
    assert payload["boundary"] is True


def test_output_is_strict_json():
    assert json.loads(dumps({"ks": [0.1, float("nan")], "x": float("inf")})) == {"ks": [0.1, None], "x": None}


def test_mc_uses_tolerance_from_environment(runner):
    args = ["mc", "--theta", "2", "--n", "100", "--seed", "1", "-R", "100"]
    assert invoke(runner, args)[1]["tol_cov_rel"] == 0.10
    result, payload = invoke(runner, args, env={"EXPAR_TOL_COV_REL": "0.5"})
    assert result.exit_code == 0, result.output
    assert payload["tol_cov_rel"] == 0.5
