"""Application settings with Pydantic validation and TOML/env var support."""

import tomllib
from pathlib import Path
from typing import Any, ClassVar, Literal

from pydantic import Field
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
)

OutputFormat = Literal["json", "csv", "text"]

DEFAULT_SEED = 20240617


class Settings(BaseSettings):
    """mstree configuration loaded from env vars, TOML, or defaults."""

    model_config = SettingsConfigDict(
        env_prefix="MSTREE_",
    )

    CONFIG_PATH: ClassVar[Path] = (
        Path.home() / ".config" / "mstree" / "config.toml"
    )

    # Experiments
    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2**64)
    trials: int = Field(default=10, ge=1)
    n: int = Field(default=100_000, ge=1)
    workers: int = Field(
        default=1,
        ge=1,
        description="Processes used for Monte Carlo trials",
    )

    # Compact layout (bytes per key, bytes per link, bits per byte)
    k: int = Field(default=4, ge=1, le=255)
    p: int = Field(default=4, ge=1, le=255)
    b: Literal[8] = 8

    # Output
    output_format: OutputFormat = "text"
    table_decimals: int = Field(default=3, ge=0, le=12)
    significant_digits: int = Field(default=12, ge=1, le=17)

    @classmethod
    def _load_toml_settings(cls) -> dict:
        """Load config TOML and normalize nested sections."""
        if not cls.CONFIG_PATH.exists():
            return {}

        with cls.CONFIG_PATH.open("rb") as f:
            data = tomllib.load(f)

        if not isinstance(data, dict):
            return {}

        flat_keys = {
            "seed",
            "trials",
            "n",
            "workers",
            "k",
            "p",
            "b",
            "output_format",
            "table_decimals",
            "significant_digits",
        }
        normalized = {
            k: v
            for k, v in data.items()
            if k in flat_keys and not isinstance(v, dict)
        }

        experiment = data.get("experiment")
        if isinstance(experiment, dict):
            for key in ("seed", "trials", "n", "workers"):
                if key in experiment:
                    normalized[key] = experiment[key]

        codec = data.get("codec")
        if isinstance(codec, dict):
            for key in ("k", "p", "b"):
                if key in codec:
                    normalized[key] = codec[key]

        output = data.get("output")
        if isinstance(output, dict):
            if "format" in output:
                normalized["output_format"] = output["format"]
            for key in ("table_decimals", "significant_digits"):
                if key in output:
                    normalized[key] = output[key]

        return normalized

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: "PydanticBaseSettingsSource",
        env_settings: "PydanticBaseSettingsSource",
        dotenv_settings: "PydanticBaseSettingsSource",
        file_secret_settings: "PydanticBaseSettingsSource",
    ) -> tuple[Any, ...]:
        """Load from init kwargs, then env vars, then TOML file."""
        return (init_settings, env_settings, cls._load_toml_settings)
