import pytest

from target_actor_critic.config import ConfigLoader, load_run_document, load_settings, parse_run_document
from target_actor_critic.errors import InvalidConfigError
from target_actor_critic.schedules import PowerSchedule


@pytest.fixture
def clean_env(monkeypatch):
    for name in ConfigLoader.SETTINGS_MAP:
        monkeypatch.delenv(f"TARGET_AC_{name}", raising=False)
    return monkeypatch


def test_packaged_defaults_are_valid(clean_env):
    settings = load_settings()
    assert settings.validate() == (True, [])
    assert settings.get_float("RANK_TOL") == 1e-9
    assert settings.to_lab_config().jobs >= 1


def test_user_file_overrides_defaults_and_env_overrides_both(clean_env, tmp_path):
    path = tmp_path / "lab.yaml"
    path.write_text("jobs: 2\nlog_level: debug\n", encoding="utf-8")

    assert load_settings(str(path)).get_int("JOBS") == 2
    assert load_settings(str(path)).to_lab_config().log_level == "DEBUG"

    clean_env.setenv("TARGET_AC_JOBS", "3")
    assert load_settings(str(path)).to_lab_config().jobs == 3


def test_missing_settings_file_falls_back_to_defaults(clean_env, tmp_path):
    settings = load_settings(str(tmp_path / "absent.yaml"))
    assert settings.get("OUTPUT_DIR") == "results"


def test_unknown_and_bad_settings_are_flagged(clean_env, tmp_path):
    path = tmp_path / "lab.yaml"
    path.write_text("jobs: -1\nverbosity: 3\nlog_level: loud\n", encoding="utf-8")

    valid, problems = load_settings(str(path)).validate()

    assert not valid
    assert "unknown setting VERBOSITY" in problems
    assert any(p.startswith("JOBS") for p in problems)
    assert any(p.startswith("LOG_LEVEL") for p in problems)


def test_unparsable_number_falls_back(clean_env):
    clean_env.setenv("TARGET_AC_RANK_TOL", "tiny")
    assert load_settings().get_float("RANK_TOL", 1e-6) == 1e-6


def test_rank_tolerance_setting_is_resolved_and_range_checked(clean_env, tmp_path):
    path = tmp_path / "lab.yaml"
    path.write_text("rank_tol: 1.0e-6\n", encoding="utf-8")
    assert load_settings(str(path)).to_lab_config().rank_tol == 1e-6

    clean_env.setenv("TARGET_AC_RANK_TOL", "2.0")
    valid, problems = load_settings(str(path)).validate()
    assert not valid
    assert "RANK_TOL must lie in (0, 1)" in problems


def test_minimal_run_document_takes_defaults():
    run = parse_run_document({"schema_version": 1})
    assert run.kind == "full-actor-critic"
    assert run.schedule == PowerSchedule()
    assert run.validate() == []


def test_missing_schema_version_is_refused():
    with pytest.raises(InvalidConfigError) as info:
        parse_run_document({"kind": "critic-eval"})
    assert info.value.keys == ["schema_version"]


def test_wrong_schema_version_is_refused():
    with pytest.raises(InvalidConfigError):
        parse_run_document({"schema_version": 2})


def test_unknown_run_keys_are_listed():
    with pytest.raises(InvalidConfigError) as info:
        parse_run_document({"schema_version": 1, "horizon": 10, "learning_rate": 0.1, "gamma": 0.9})
    assert info.value.keys == ["gamma", "learning_rate"]


def test_rate_sweep_needs_three_horizons():
    with pytest.raises(InvalidConfigError, match="at least 3 horizons"):
        parse_run_document({"schema_version": 1, "kind": "rate-sweep", "horizons": [100, 1000]})


def test_non_increasing_horizons_are_refused():
    with pytest.raises(InvalidConfigError, match="strictly increasing"):
        parse_run_document({"schema_version": 1, "kind": "rate-sweep", "horizons": [100, 100, 1000]})


def test_unknown_metric_is_refused():
    with pytest.raises(InvalidConfigError, match="unknown metrics: regret"):
        parse_run_document({"schema_version": 1, "metrics": ["J", "regret"]})


def test_bad_source_type_is_refused():
    with pytest.raises(InvalidConfigError) as info:
        parse_run_document({"schema_version": 1, "mdp": 3})
    assert info.value.keys == ["mdp"]


def test_run_document_file_resolves_sources_against_its_directory(write_document, tmp_path):
    path = write_document(
        "run.yaml",
        {
            "schema_version": 1,
            "kind": "critic-eval",
            "critic_features": "features/phi.yaml",
            "schedule": {"c1": 0.0, "c2": 0.5, "c3": 0.5},
            "horizon": 50,
            "seeds": 2,
        },
    )

    run = load_run_document(path)

    assert run.resolve_path(run.critic_features) == tmp_path.resolve() / "features" / "phi.yaml"
    assert run.schedule.c1 == 0.0
    assert parse_run_document(run.to_document()).to_document() == run.to_document()
