import math
from collections.abc import Mapping
from enum import Enum
from functools import lru_cache
from pathlib import Path

from dotenv import dotenv_values
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import field_validator
from pydantic_settings import BaseSettings
from pydantic_settings import SettingsConfigDict

from .models import GicChannel


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="HKGIC_")
    log_level: str = "INFO"
    tol_geom: float = Field(default=1e-9, gt=0)
    tol_claim: float = Field(default=1e-6, gt=0)
    grid_k: int = Field(default=101, ge=2)
    mu_sweep_count: int = Field(default=41, ge=1)
    mu_sweep_min_exp: float = -5.0
    mu_sweep_max_exp: float = 5.0
    output_format: OutputFormat = OutputFormat.CSV
    significant_digits: int = Field(default=12, ge=1, le=17)
    # 1 runs the split grid in-process, 0 uses every CPU
    grid_workers: int = Field(default=1, ge=0)
    default_lambda: float = Field(default=0.5, ge=0, le=1)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()


class RunConfig(BaseModel):
    """
    One command's inputs: channel, grid, weights, output and tolerances.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=True)

    p1: float = Field(gt=0, allow_inf_nan=False)
    p2: float = Field(gt=0, allow_inf_nan=False)
    a: float = Field(ge=0, allow_inf_nan=False)
    b: float = Field(ge=0, allow_inf_nan=False)
    n1: float = Field(gt=0, allow_inf_nan=False)
    n2: float = Field(gt=0, allow_inf_nan=False)
    grid_k: int = Field(ge=2)
    mu: tuple[float, ...] | None = None
    format: OutputFormat = OutputFormat.CSV
    out: Path | None = None
    tol_geom: float = Field(gt=0, allow_inf_nan=False)
    tol_claim: float = Field(gt=0, allow_inf_nan=False)
    lambda1: float = Field(default=0.5, ge=0, le=1, allow_inf_nan=False)
    lambda2: float = Field(default=0.5, ge=0, le=1, allow_inf_nan=False)

    @field_validator("mu", mode="before")
    @classmethod
    def _parse_mu(cls, value):
        if value is None or isinstance(value, (list, tuple)):
            return value
        text = str(value).strip()
        if not text:
            raise ValueError("mu list is empty")
        return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())

    @field_validator("mu")
    @classmethod
    def _check_mu(cls, value):
        if value is None:
            return value
        if len(value) == 0:
            raise ValueError("mu list is empty")
        for mu in value:
            if math.isnan(mu) or mu < 0:
                raise ValueError(f"mu values must be >= 0, got {mu}")
        return value

    @property
    def channel(self) -> GicChannel:
        return GicChannel(p1=self.p1, p2=self.p2, a=self.a, b=self.b, n1=self.n1, n2=self.n2)

    def echo(self) -> dict:
        """config fields that shape the numbers (output path excluded)"""
        echo = self.model_dump(exclude={"out"})
        echo["format"] = self.format.value
        return echo


# keys accepted in config files besides the RunConfig field names
_KEY_ALIASES = {
    "grid": "grid_k",
    "tol-geom": "tol_geom",
    "tol-claim": "tol_claim",
}


def read_config_file(path: Path) -> dict[str, str]:
    """
    Read a flat ``key = value`` file; blank lines and ``#`` comments are ignored.
    """
    if not path.is_file():
        raise FileNotFoundError(f"config file {path} not found")
    values = dotenv_values(path)
    out = {}
    for key, value in values.items():
        if value is None:
            continue
        key = key.strip().lower()
        out[_KEY_ALIASES.get(key, key).replace("-", "_")] = value
    return out


def load_run_config(path: Path | None, overrides: Mapping[str, object]) -> RunConfig:
    """
    Merge settings defaults, then the config file, then command-line overrides.
    """
    settings = get_settings()
    merged: dict[str, object] = {
        "grid_k": settings.grid_k,
        "format": settings.output_format,
        "tol_geom": settings.tol_geom,
        "tol_claim": settings.tol_claim,
        "lambda1": settings.default_lambda,
        "lambda2": settings.default_lambda,
    }
    if path is not None:
        merged.update(read_config_file(path))
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.model_validate(merged)
