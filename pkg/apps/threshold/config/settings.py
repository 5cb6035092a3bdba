"""
Configuration settings for the threshold analyzer
Handles environment variables and engine defaults
"""

import os
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

SETTINGS_FILE = Path(__file__).resolve()
PACKAGE_ROOT = SETTINGS_FILE.parents[1]
APPS_ROOT = PACKAGE_ROOT.parent
REPO_ROOT = APPS_ROOT.parent
ENV_FILE_CANDIDATES = (
    PACKAGE_ROOT / ".env",
    APPS_ROOT / ".env",
    REPO_ROOT / ".env",
)

BACKENDS = ("rational", "float")
FREE_OPERATORS = ("dirichlet", "scaled_identity")


class Settings(BaseSettings):
    """Engine defaults with environment variable support"""

    model_config = SettingsConfigDict(
        env_prefix="THRESHOLD_",
        env_file=tuple(str(path) for path in ENV_FILE_CANDIDATES),
        env_file_encoding="utf-8",
        extra="ignore",
    )

    app_name: str = Field("Threshold Resolvent Analyzer")
    app_version: str = Field("1.0.0")

    # Arithmetic
    backend: str = Field("rational")
    rank_tol: float = Field(1e-9)

    # Kernel and tail caps
    kernel_cap: int = Field(8)
    tail_cap: int = Field(6)
    free_operator: str = Field("dirichlet")

    # Numeric oracle
    cutoff_const: float = Field(40.0)
    kappas: List[float] = Field([0.4, 0.2, 0.1, 0.05])
    window: int = Field(6)
    oracle_workers: int = Field(4)

    # Logging settings
    log_level: str = Field("INFO")
    log_file: Optional[str] = Field(None)

    @field_validator("backend", mode="before")
    @classmethod
    def _normalize_backend(cls, value):
        normalized = str(value).strip().lower()
        if normalized not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {value!r}")
        return normalized

    @field_validator("free_operator", mode="before")
    @classmethod
    def _normalize_free_operator(cls, value):
        normalized = str(value).strip().lower().replace("-", "_")
        if normalized not in FREE_OPERATORS:
            raise ValueError(f"free_operator must be one of {FREE_OPERATORS}, got {value!r}")
        return normalized

    @field_validator("kappas", mode="before")
    @classmethod
    def _coerce_kappas(cls, value):
        """Accept comma separated CLI values such as '0.4,0.2,0.1'; the environment uses JSON lists."""
        if isinstance(value, str):
            value = [item for item in value.replace(" ", "").split(",") if item]
        kappas = [float(item) for item in value]
        if len(kappas) < 2:
            raise ValueError("at least two kappa values are needed for a slope fit")
        if any(k <= 0 for k in kappas):
            raise ValueError("kappa values must be positive")
        if any(later >= earlier for earlier, later in zip(kappas, kappas[1:])):
            raise ValueError("kappa values must be strictly decreasing")
        return kappas

    @field_validator("kernel_cap")
    @classmethod
    def _check_kernel_cap(cls, value: int) -> int:
        # the cascade needs M_0 .. M_5
        if value < 5:
            raise ValueError("kernel_cap must be at least 5")
        return value

    @field_validator("rank_tol")
    @classmethod
    def _check_rank_tol(cls, value: float) -> float:
        if value <= 0:
            raise ValueError("rank_tol must be positive")
        return value

    def kappa_tuple(self) -> Tuple[float, ...]:
        return tuple(self.kappas)


# Global settings instance
settings = Settings()


class DevelopmentSettings(Settings):
    """Development environment settings"""
    log_level: str = "DEBUG"


class ProductionSettings(Settings):
    """Production environment settings"""
    log_level: str = "WARNING"


def get_settings() -> Settings:
    """Get settings based on environment"""
    env = os.getenv("ENVIRONMENT", "").lower()

    if env == "production":
        return ProductionSettings()
    elif env == "development":
        return DevelopmentSettings()
    else:
        return Settings()
