"""Validated per-command run configuration."""

from pathlib import Path
from typing import Any, Literal, Self

from pydantic import BaseModel, Field, model_validator

from mstree.config.settings import OutputFormat, Settings

SPECTRAL_M_MAX = 64
CMST_M_MAX = 0xFFFF


class RunConfig(BaseModel):
    """Settings defaults merged with one command's flags."""

    command: str
    m: int | None = Field(default=None, ge=2)
    m_min: int | None = Field(default=None, ge=2, le=SPECTRAL_M_MAX)
    m_max: int | None = Field(default=None, ge=2, le=SPECTRAL_M_MAX)
    n: int = Field(ge=1)
    trials: int = Field(ge=1)
    seed: int = Field(ge=0, lt=2**64)
    workers: int = Field(default=1, ge=1)
    k: int = Field(ge=1, le=255)
    p: int = Field(ge=1, le=255)
    b: Literal[8] = 8
    input_path: Path | None = None
    output_path: Path | None = None
    output_format: OutputFormat = "text"
    table_decimals: int = 3
    significant_digits: int = 12

    @model_validator(mode="after")
    def _check_range(self) -> Self:
        if (
            self.m_min is not None
            and self.m_max is not None
            and self.m_min > self.m_max
        ):
            raise ValueError(
                f"--m-min {self.m_min} is greater than --m-max {self.m_max}"
            )
        if (
            self.command.startswith("compress")
            and self.m is not None
            and self.m > CMST_M_MAX
        ):
            raise ValueError(
                f"--m {self.m} does not fit the CMST header (max {CMST_M_MAX})"
            )
        return self

    @classmethod
    def from_settings(
        cls, settings: Settings, command: str, **flags: Any,
    ) -> "RunConfig":
        """Flags left as None fall back to the loaded settings."""
        base = {
            "n": settings.n,
            "trials": settings.trials,
            "seed": settings.seed,
            "workers": settings.workers,
            "k": settings.k,
            "p": settings.p,
            "b": settings.b,
            "output_format": settings.output_format,
            "table_decimals": settings.table_decimals,
            "significant_digits": settings.significant_digits,
        }
        base.update({key: value for key, value in flags.items() if value is not None})
        return cls(command=command, **base)
