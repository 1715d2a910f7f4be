import textwrap
from pathlib import Path

import pytest
from pydantic import ValidationError

from liftc.config import (
    ConfigLoader,
    EnumerativeProviderConfig,
    LiveProviderConfig,
    ReplayProviderConfig,
    RunConfig,
    Settings,
    build_run_config,
)

from .conftest import BENCHMARKS

PROFILES = textwrap.dedent(
    """
    default:
      solver_cmd: cvc5
      vc_timeout: 60
      budget:
        ps_queries: 20
        n: 2
      provider:
        kind: enum
        max_size: 5

    quick:
      vc_timeout: 5
      budget:
        n: 4
      provider:
        max_size: 3
    """
)


@pytest.fixture
def profiles(tmp_path) -> Path:
    path = tmp_path / "liftc.yaml"
    path.write_text(PROFILES, encoding="utf-8")
    return path


@pytest.fixture
def clean_env(monkeypatch):
    for name in ("SOLVER_CMD", "VC_TIMEOUT", "RUNS_DIR", "LOG_LEVEL", "CONFIG_FILE", "PROFILE", "API_KEY_ENV"):
        monkeypatch.delenv(f"LIFTC_{name}", raising=False)
    return monkeypatch


def test_settings_read_prefixed_environment(clean_env):
    clean_env.setenv("LIFTC_SOLVER_CMD", "z3 -smt2")
    clean_env.setenv("LIFTC_VC_TIMEOUT", "12.5")
    clean_env.setenv("LIFTC_RUNS_DIR", "/tmp/liftc-runs")

    settings = Settings()

    assert settings.solver_cmd == "z3 -smt2"
    assert settings.vc_timeout == 12.5
    assert settings.runs_dir == Path("/tmp/liftc-runs")
    assert settings.profile == "default"


def test_settings_defaults(clean_env):
    settings = Settings()

    assert settings.runs_dir == Path("runs")
    assert settings.solver_cmd == "cvc5"
    assert settings.config_file is None


def test_profile_merges_over_default(profiles):
    profile = ConfigLoader(profiles).get_profile("quick")

    assert profile["solver_cmd"] == "cvc5"
    assert profile["vc_timeout"] == 5
    assert profile["budget"] == {"ps_queries": 20, "n": 4}
    assert profile["provider"] == {"kind": "enum", "max_size": 3}


def test_unknown_profile_falls_back_to_default(profiles, caplog):
    profile = ConfigLoader(profiles).get_profile("nightly")

    assert profile["vc_timeout"] == 60
    assert "nightly" in caplog.text


def test_empty_profile_file(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("", encoding="utf-8")

    assert ConfigLoader(path).get_profile() == {}


def test_profile_becomes_run_config(profiles, clean_env):
    config = build_run_config(Settings(), ConfigLoader(profiles).get_profile("quick"))

    assert config.vc_timeout == 5
    assert config.budget.n == 4
    assert config.budget.inv_queries == 10
    assert isinstance(config.provider, EnumerativeProviderConfig)
    assert config.provider.max_size == 3
    assert config.out_dir == Path("runs")


def test_explicit_environment_beats_profile(profiles, clean_env):
    clean_env.setenv("LIFTC_SOLVER_CMD", "z3")

    config = build_run_config(Settings(), ConfigLoader(profiles).get_profile("quick"))

    assert config.solver_cmd == "z3"
    assert config.vc_timeout == 5


def test_overrides_beat_environment(profiles, clean_env):
    clean_env.setenv("LIFTC_SOLVER_CMD", "z3")
    overrides = {"solver_cmd": "cvc5 --incremental", "vc_timeout": None, "budget": {"ps_queries": 7}}

    config = build_run_config(Settings(), ConfigLoader(profiles).get_profile("quick"), overrides)

    assert config.solver_cmd == "cvc5 --incremental"
    assert config.vc_timeout == 5
    assert (config.budget.ps_queries, config.budget.n) == (7, 4)


def test_switching_provider_kind_drops_old_fields(profiles, clean_env):
    replay = BENCHMARKS / "scale_list" / "replay.jsonl"
    overrides = {"provider": {"kind": "replay", "path": replay}}

    config = build_run_config(Settings(), ConfigLoader(profiles).get_profile(), overrides)

    assert isinstance(config.provider, ReplayProviderConfig)
    assert config.provider.path == replay


def test_same_provider_kind_keeps_profile_fields(profiles, clean_env):
    config = build_run_config(Settings(), ConfigLoader(profiles).get_profile(), {"provider": {"prune": False}})

    assert isinstance(config.provider, EnumerativeProviderConfig)
    assert (config.provider.max_size, config.provider.prune) == (5, False)


def test_single_phase_needs_a_joint_capable_provider():
    with pytest.raises(ValidationError, match="single-phase"):
        RunConfig.model_validate({"phase": "single", "provider": {"kind": "enum"}})


def test_replay_file_must_exist(tmp_path):
    with pytest.raises(ValidationError, match="replay file not found"):
        RunConfig.model_validate({"provider": {"kind": "replay", "path": tmp_path / "missing.jsonl"}})


def test_unknown_keys_are_rejected():
    with pytest.raises(ValidationError):
        RunConfig.model_validate({"solver": "cvc5"})


@pytest.mark.parametrize(
    "fields, message",
    [
        ({"endpoint_url": "http://localhost:8000/v1/chat/completions"}, "model name"),
        ({"model_name": "some-model"}, "endpoint URL"),
    ],
)
def test_live_provider_needs_a_target(fields, message):
    with pytest.raises(ValidationError, match=message):
        LiveProviderConfig.model_validate(fields)


def test_bedrock_backend_needs_no_endpoint():
    config = LiveProviderConfig(backend="bedrock", model_name="some-model")

    assert config.endpoint_url == ""


@pytest.mark.parametrize("name", ["default", "live", "bedrock", "single-phase", "enum-noprune", "quick"])
def test_shipped_profiles_are_valid(name, clean_env):
    loader = ConfigLoader(Path(__file__).resolve().parent.parent / "config" / "liftc.yaml")

    config = build_run_config(Settings(), loader.get_profile(name))

    assert config.budget.ps_queries >= 1
