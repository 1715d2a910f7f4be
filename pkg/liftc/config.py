"""
Configuration management for liftc.

Process-level settings come from ``LIFTC_`` environment variables; run
settings are pydantic models that may be loaded from a YAML profile file.
"""
import logging
import os
from pathlib import Path
from typing import Any, Dict, Literal, Mapping, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """
    Process settings loaded from environment variables.

    Environment variables are prefixed with LIFTC_, e.g.:
    LIFTC_SOLVER_CMD="z3" runs every query through z3
    """

    model_config = SettingsConfigDict(env_prefix="LIFTC_", case_sensitive=False)

    log_level: str = "info"
    runs_dir: Path = Path("runs")
    solver_cmd: str = "cvc5"
    vc_timeout: float = Field(110.0, gt=0)
    api_key_env: str = "LLM_API_KEY"
    config_file: Optional[Path] = None
    profile: str = "default"


class Budget(BaseModel):
    """Query budgets; a query asks the provider for ``n`` candidates."""

    model_config = ConfigDict(extra="forbid")

    ps_queries: PositiveInt = 50
    inv_queries: PositiveInt = 10
    n: PositiveInt = 1
    num_iters: PositiveInt = 50


class LiveProviderConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["live"] = "live"
    backend: Literal["http", "bedrock"] = "http"
    endpoint_url: str = ""
    model_name: str = ""
    temperature: float = Field(0.7, ge=0, le=2)
    api_key_env: str = "LLM_API_KEY"
    max_tokens: PositiveInt = 2048
    request_timeout: float = Field(120.0, gt=0)
    circuit_failure_threshold: PositiveInt = 5
    circuit_reset_timeout: float = Field(30.0, gt=0)

    @model_validator(mode="after")
    def _needs_target(self) -> "LiveProviderConfig":
        if not self.model_name:
            raise ValueError("live provider needs a model name")
        if self.backend == "http" and not self.endpoint_url:
            raise ValueError("http live provider needs an endpoint URL")
        return self


class ReplayProviderConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["replay"] = "replay"
    path: Path

    @field_validator("path")
    @classmethod
    def _exists(cls, value: Path) -> Path:
        if not value.is_file():
            raise ValueError(f"replay file not found: {value}")
        return value


class EnumerativeProviderConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["enum"] = "enum"
    max_size: PositiveInt = 8
    candidate_limit: PositiveInt = 300_000
    prune: bool = True
    io_filter: bool = True


ProviderConfig = Union[LiveProviderConfig, ReplayProviderConfig, EnumerativeProviderConfig]


class RunConfig(BaseModel):
    """
    Everything one transpile run needs besides the source and the DSL.

    Attributes:
        budget: Provider query budgets
        provider: Candidate source
        solver_cmd: SMT solver command line; the script path is appended
        vc_timeout: Seconds allowed per verification condition
        phase: Two-phase search, or one joint query per iteration
        diff_samples: Differential-test inputs per candidate, 0 disables the check
        seed: Seed for the differential generator and the enumerator's pruning states
        bounded_fallback: Retry undecided conditions with bounded containers
        bound_k: Container bound for the fallback
        fuel: IR evaluation step budget
        max_parallel_solvers: Concurrent solver processes per candidate
        screen_ps: Differential-test summaries before asking for invariants
        run_timeout: Wall-clock seconds for the whole search, checked between candidates; None for no limit
        out_dir: Root for run artifacts; None disables persistence
    """

    model_config = ConfigDict(extra="forbid")

    budget: Budget = Field(default_factory=Budget)
    provider: ProviderConfig = Field(default_factory=EnumerativeProviderConfig, discriminator="kind")
    solver_cmd: str = "cvc5"
    vc_timeout: float = Field(110.0, gt=0)
    phase: Literal["two", "single"] = "two"
    diff_samples: int = Field(1000, ge=0)
    seed: int = 0
    bounded_fallback: bool = True
    bound_k: int = Field(8, ge=1)
    fuel: PositiveInt = 10**6
    max_parallel_solvers: int = Field(4, ge=1)
    screen_ps: bool = True
    run_timeout: Optional[float] = Field(None, gt=0)
    out_dir: Optional[Path] = None

    @model_validator(mode="after")
    def _joint_capable(self) -> "RunConfig":
        if self.phase == "single" and isinstance(self.provider, EnumerativeProviderConfig):
            raise ValueError("single-phase mode needs a live or replay provider")
        return self


class ConfigLoader:
    """Loads run profiles from a YAML file with a ``default`` section."""

    def __init__(self, config_file: Union[str, Path]):
        """
        Initialize the configuration loader.

        Args:
            config_file: Path to the YAML configuration file
        """
        self.config_file = Path(config_file)
        self.config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        with open(self.config_file, "r", encoding="utf-8") as file:
            data = yaml.safe_load(file)
        return data if isinstance(data, dict) else {}

    def get_profile(self, name: str = "default") -> Dict[str, Any]:
        """
        Get a profile merged over the default section.

        Args:
            name: Profile name; unknown names yield the default section

        Returns:
            Merged profile dictionary
        """
        default_config = self.config.get("default") or {}
        if name not in self.config:
            logger.warning(f"Profile '{name}' not found in {self.config_file}, using defaults")
        profile_config = self.config.get(name) or {}
        return self._deep_merge(default_config, profile_config)

    def _deep_merge(self, dict1: Mapping[str, Any], dict2: Mapping[str, Any]) -> Dict[str, Any]:
        result = dict(dict1)
        for key, value in dict2.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._deep_merge(result[key], value)
            else:
                result[key] = value
        return result


def build_run_config(
    settings: Settings,
    profile: Optional[Mapping[str, Any]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """
    Combine configuration layers into a RunConfig.

    Precedence, lowest first: model defaults, the YAML profile, explicitly set
    ``LIFTC_`` environment settings, then ``overrides`` (command-line flags).

    Raises:
        pydantic.ValidationError: The combined configuration is invalid
    """
    data: Dict[str, Any] = dict(profile or {})
    provider = dict(data.get("provider") or {})
    explicit = settings.model_fields_set
    if "solver_cmd" in explicit:
        data["solver_cmd"] = settings.solver_cmd
    if "vc_timeout" in explicit:
        data["vc_timeout"] = settings.vc_timeout
    if "api_key_env" in explicit and provider.get("kind") == "live":
        provider["api_key_env"] = settings.api_key_env
    data.setdefault("out_dir", str(settings.runs_dir))

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "provider":
            if value.get("kind", provider.get("kind")) != provider.get("kind"):
                provider = {}
            provider.update(value)
        elif key == "budget":
            data["budget"] = {**(data.get("budget") or {}), **value}
        else:
            data[key] = value
    if provider:
        data["provider"] = provider
    return RunConfig.model_validate(data)


def api_key(env_var: str) -> Optional[str]:
    return os.environ.get(env_var)
