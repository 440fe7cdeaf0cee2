"""
Application Configuration using Pydantic Settings
Defaults for grids, tolerances and output locations, overridable from the environment
"""

import math

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings with type validation"""

    # Environment
    ENVIRONMENT: str = "development"
    LOG_LEVEL: str = "INFO"
    LOG_DIR: str = "./logs"

    # Outputs
    OUTPUT_DIR: str = "./runs"

    # Grid and time step defaults (periodic truncation of the line)
    DEFAULT_HALF_LENGTH: float = 20.0 * math.pi
    DEFAULT_POINTS: int = 1024
    DEFAULT_DT: float = 1e-3

    # Tolerances
    BOUNDARY_TOLERANCE: float = 1e-10
    KERNEL_THRESHOLD: float = 1e-3
    # a uniform mode keeps 0.1 of its mass in the outer tenth
    ARTIFACT_BOUNDARY_MASS: float = 0.5
    CONDITION_LIMIT: float = 10.0
    CONSTRAINT_TOLERANCE: float = 1e-4
    NEWTON_MAX_ITER: int = 50
    NEWTON_TOLERANCE: float = 1e-13

    # Scenario guard rails
    SMALLNESS_CAP: float = 0.05
    MAX_REPROJECTIONS: int = 25

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=True,
        extra="ignore"
    )


# Global settings instance
settings = Settings()
