import json

import pandas as pd
import pytest
import yaml

from target_actor_critic.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, RunManifest, dispatch, parse_schedule
from target_actor_critic.features import critic, tabular_features
from target_actor_critic.policy import policy_features_to_document, tabular_policy_features
from target_actor_critic.storage import content_hash

RUN_FLAGS = ["--horizon", "40", "--stride", "10", "--seeds", "2", "--jobs", "1"]


def test_help_and_version_exit_zero(capsys):
    assert dispatch(["--help"]) == EXIT_OK
    assert dispatch(["--version"]) == EXIT_OK
    assert "target-ac" in capsys.readouterr().out


def test_unknown_flag_is_a_usage_error(capsys):
    assert dispatch(["run", "--bogus"]) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_validate_reports_kernel_defect(two_state, write_document, capsys):
    document = two_state.to_document()
    document["kernel"][0] = [0.5, 0.4]
    path = write_document("bad.yaml", document)

    assert dispatch(["validate", str(path)]) == EXIT_FAILED
    err = capsys.readouterr().err
    assert "INVALID" in err
    assert "kernel[0, 0]" in err


def test_validate_accepts_each_document_kind(two_state, write_document, capsys):
    paths = [
        write_document("mdp.yaml", two_state.to_document()),
        write_document("phi.yaml", tabular_features(2).to_document()),
        write_document("x.yaml", policy_features_to_document(tabular_policy_features(2, 2))),
        write_document("run.yaml", {"schema_version": 1, "kind": "critic-eval", "mdp": "two-state", "horizon": 10}),
    ]

    assert dispatch(["validate", *map(str, paths)]) == EXIT_OK
    assert capsys.readouterr().out.count(": ok") == 4


def test_validate_refuses_unknown_document(write_document, capsys):
    path = write_document("other.yaml", {"name": "not a lab document"})
    assert dispatch(["validate", str(path)]) == EXIT_FAILED
    assert "unrecognised document" in capsys.readouterr().err


def test_validate_reports_unparsable_yaml(tmp_path, capsys):
    path = tmp_path / "broken.yaml"
    path.write_text("kernel: [1, 2\n  reward: {", encoding="utf-8")

    assert dispatch(["validate", str(path)]) == EXIT_FAILED
    err = capsys.readouterr().err
    assert "INVALID" in err
    assert "unparsable YAML" in err


def test_run_with_unparsable_config_fails_cleanly(tmp_path, capsys):
    path = tmp_path / "run.yaml"
    path.write_text("schema_version: 1\nkind: [critic-eval\n", encoding="utf-8")

    assert dispatch(["run", "--config", str(path), "--out", str(tmp_path / "out")]) == EXIT_FAILED
    assert "error:" in capsys.readouterr().err


def test_rank_tolerance_setting_reaches_feature_validation(monkeypatch, write_document, tmp_path, capsys):
    monkeypatch.setattr(critic, "RANK_TOL", critic.RANK_TOL)
    monkeypatch.delenv("TARGET_AC_RANK_TOL", raising=False)
    phi = write_document("phi.yaml", {"matrix": [[1.0, 0.0], [0.0, 0.1]]})
    settings = tmp_path / "lab.yaml"
    settings.write_text("RANK_TOL: 0.5\n", encoding="utf-8")

    assert dispatch(["validate", str(phi)]) == EXIT_OK
    assert dispatch(["--settings", str(settings), "validate", str(phi)]) == EXIT_FAILED
    assert "full-column-rank certificate" in capsys.readouterr().err


def test_validate_missing_file_is_a_usage_error(tmp_path):
    assert dispatch(["validate", str(tmp_path / "absent.yaml")]) == EXIT_USAGE


def test_oracle_from_feature_files_passes_checks(write_document, tmp_path):
    policy = write_document("x.yaml", policy_features_to_document(tabular_policy_features(5, 3)))
    critic = write_document("phi.yaml", tabular_features(5).to_document())
    out = tmp_path / "oracle"

    code = dispatch([
        "oracle", "--mdp", "default-garnet", "--policy", str(policy), "--features", str(critic),
        "--theta", "zeros", "--samples", "2", "--check", "--out", str(out),
    ])

    assert code == EXIT_OK
    reports = list(yaml.safe_load_all((out / "oracle.yaml").read_text(encoding="utf-8")))
    assert len(reports) == 3
    assert all(all(r["checks"].values()) for r in reports)


def test_oracle_rejects_theta_of_wrong_length(capsys):
    assert dispatch(["oracle", "--mdp", "two-state", "--theta", "1,2,3"]) == EXIT_FAILED
    assert "θ must have 4 entries" in capsys.readouterr().err


def test_run_is_reproducible_and_manifest_verifies(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert dispatch(["run", "--seed", "7", *RUN_FLAGS, "--out", str(first)]) == EXIT_OK
    assert dispatch(["run", "--seed", "7", *RUN_FLAGS, "--out", str(second)]) == EXIT_OK

    assert content_hash(first / "metrics.csv") == content_hash(second / "metrics.csv")
    manifest = RunManifest.load(first / "manifest.json")
    assert manifest.seeds == [7, 8]
    assert manifest.target_mode == "polyak"
    assert manifest.verify(first) == []

    metrics = pd.read_csv(first / "metrics.csv")
    assert list(metrics.columns[:2]) == ["replicate", "t"]
    assert sorted(metrics["replicate"].unique()) == [0, 1]


def test_manifest_detects_changed_output(tmp_path):
    out = tmp_path / "run"
    assert dispatch(["run", *RUN_FLAGS, "--out", str(out)]) == EXIT_OK
    (out / "metrics.csv").write_text("t\n0\n", encoding="utf-8")
    assert RunManifest.load(out / "manifest.json").verify(out) == ["output metrics.csv changed"]


def test_run_writes_json_tables(tmp_path):
    out = tmp_path / "json"
    assert dispatch(["run", *RUN_FLAGS, "--format", "json", "--out", str(out)]) == EXIT_OK
    rows = json.loads((out / "metrics.json").read_text(encoding="utf-8"))
    assert rows[0]["replicate"] == 0 and rows[0]["t"] == 0


def test_run_document_overrides_apply(write_document, tmp_path):
    config = write_document("run.yaml", {
        "schema_version": 1, "kind": "critic-eval", "mdp": "two-state", "horizon": 500, "seeds": 3,
        "metrics": ["critic_error_sq"],
    })
    out = tmp_path / "out"

    assert dispatch(["run", "--config", str(config), "--horizon", "20", "--seeds", "1", "--out", str(out)]) == EXIT_OK

    manifest = RunManifest.load(out / "manifest.json")
    assert manifest.config["horizon"] == 20
    assert manifest.config["seeds"] == 1
    assert list(pd.read_csv(out / "metrics.csv").columns) == [
        "replicate", "t", "critic_error_sq", "avg_critic_error", "avg_grad_norm_sq",
    ]


def test_invalid_run_document_exits_one(write_document, capsys):
    config = write_document("run.yaml", {"schema_version": 1, "learning_rate": 0.1})
    assert dispatch(["run", "--config", str(config)]) == EXIT_FAILED
    assert "learning_rate" in capsys.readouterr().err


def test_check_accepts_default_schedule(capsys):
    assert dispatch(["check", "--mdp", "two-state", "--horizon", "1000"]) == EXIT_OK
    report = yaml.safe_load(capsys.readouterr().out)
    assert report["stepsizes"]["regimes"] == ["finite-time"]
    assert report["mixing_time"] >= 1


def test_check_refuses_schedule_without_regime(capsys):
    assert dispatch(["check", "--schedule", "1,1,1,0.5,0.5,0.3"]) == EXIT_FAILED
    assert yaml.safe_load(capsys.readouterr().out)["stepsizes"]["regimes"] == ["none"]


def test_parse_schedule_needs_six_values():
    assert parse_schedule("0,0.5,0.5,0.6,0.5,0.4").c1 == 0.0
    with pytest.raises(ValueError):
        parse_schedule("1,1,1")


def test_audit_passes_on_default_instance(tmp_path, capsys):
    out = tmp_path / "audit"
    assert dispatch(["audit", "--seed", "3", "--horizon", "1000", "--out", str(out)]) == EXIT_OK
    assert (out / "audit.csv").exists()
    assert "[  ok] full_column_rank" in capsys.readouterr().out


def test_sweep_writes_fits_and_plots(tmp_path):
    out = tmp_path / "sweep"
    code = dispatch([
        "sweep", "--horizons", "10,100,1000", "--horizon", "1000", "--stride", "500", "--seeds", "2",
        "--jobs", "1", "--plot", "--out", str(out),
    ])

    assert code == EXIT_OK
    fits = json.loads((out / "rate_fit.json").read_text(encoding="utf-8"))
    assert set(fits["fits"]) | set(fits["refused"]) == {"avg_critic_error", "avg_grad_norm_sq"}
    for quantity in fits["fits"]:
        assert (out / f"{quantity}.svg").exists()
    assert RunManifest.load(out / "manifest.json").verify(out) == []
