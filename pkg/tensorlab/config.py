"""
Configuration for the tensorlab experiment harness

This module centralises every tunable of the laboratory: solver
tolerances, enumeration limits, degree cutoffs and the output location
of reports. All values can be overridden through ``TENSORLAB_*``
environment variables or a ``.env`` file.
"""

from functools import lru_cache
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Application settings backed by pydantic-settings

    Every field can be overridden with an environment variable carrying the
    ``TENSORLAB_`` prefix, e.g. ``TENSORLAB_SOLVER_TOL=1e-10``.
    """

    # Application
    APP_NAME: str = Field(default="tensorlab", description="Application name")
    VERSION: str = Field(default="1.0.0", description="Application version")
    ENVIRONMENT: str = Field(default="development", description="Execution environment")

    # Logging
    LOG_LEVEL: str = Field(default="INFO", description="Log level")
    LOG_JSON: bool = Field(default=False, description="Render log lines as JSON")

    # Power iteration
    SOLVER_TOL: float = Field(
        default=1e-9,
        gt=0,
        description="Convergence threshold on successive squared estimates",
    )
    SOLVER_MAX_ITER: int = Field(default=2000, ge=1, description="Iterations per start")
    SOLVER_RESTARTS: int = Field(
        default=3,
        ge=0,
        description="Random starts in addition to the identity start",
    )
    ADJOINT_PROBES: int = Field(default=10, ge=1, description="Random pairs in the adjointness probe")
    ADJOINT_TOL: float = Field(default=1e-8, gt=0, description="Relative adjointness tolerance")

    # Families
    UNITARITY_TOL: float = Field(
        default=1e-8,
        gt=0,
        description="Unitarity tolerance, multiplied by sqrt(N)",
    )

    # Alternating ascent on the PSD trace form
    ASCENT_MAX_ROUNDS: int = Field(default=500, ge=1, description="Maximum ascent rounds")
    ASCENT_REL_TOL: float = Field(default=1e-10, gt=0, description="Relative improvement threshold")

    # Oracles and enumeration limits
    DENSE_ORACLE_MAX_DIM: int = Field(
        default=8,
        ge=1,
        description="Largest matrix size for which the superoperator may be materialised",
    )
    BRUTE_FORCE_LIMIT: int = Field(default=10**7, ge=1, description="Max tuples for brute-force counting")
    ABSORPTION_LIMIT: int = Field(default=10**6, ge=1, description="Max tuples for the absorption moment")

    # Representation tower
    DEGREE_CUTOFF: int = Field(default=40, ge=1, description="Highest irrep degree in LPS towers")
    CROSS_DEGREE_CUTOFF: int = Field(default=8, ge=0, description="Highest degree in cross-term sweeps")

    # Harness
    CONTRACT_TOL: float = Field(default=1e-4, gt=0, description="Slack allowed on bound contracts")
    OUTPUT_DIR: Optional[str] = Field(default=None, description="Default directory for reports")
    JOBS: int = Field(default=1, ge=1, description="Default worker count for trial sweeps")

    model_config = SettingsConfigDict(
        env_prefix="TENSORLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """
    Return the settings singleton

    Cached so the environment is read once per process; tests clear the
    cache with ``get_settings.cache_clear()``.
    """
    return Settings()


# Per-environment logging defaults; explicit LOG_* settings win
ENVIRONMENT_CONFIGS = {
    "development": {
        "LOG_LEVEL": "INFO",
        "LOG_JSON": False,
    },
    "testing": {
        "LOG_LEVEL": "WARNING",
        "LOG_JSON": False,
    },
    "production": {
        "LOG_LEVEL": "WARNING",
        "LOG_JSON": True,
    },
}


def get_environment_config(environment: str) -> dict:
    """
    Return the overrides for an environment

    Args:
        environment: Environment name (development, testing, production)

    Returns:
        Dictionary of setting overrides
    """
    return ENVIRONMENT_CONFIGS.get(environment, ENVIRONMENT_CONFIGS["development"])
