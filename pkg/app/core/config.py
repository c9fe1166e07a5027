"""
Application configuration using Pydantic Settings.

Loads configuration from environment variables (.env file).  Scenario files
take their defaults from here, so the experimental parameters of the nominal
water-network study (gamma = 0.6, k_max = 100, zeta = 0.001, T_s = 1) can be
changed in one place.
"""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Project Info
    PROJECT_NAME: str = "Adaptive consensus-based reference generation for open-channel networks."
    VERSION: str = "0.1.0"

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    # Protocol defaults
    DEFAULT_GAMMA: float = 0.6
    DEFAULT_ZETA: float = 0.001
    DEFAULT_K_MAX: int = 100
    SAMPLING_PERIOD: float = 1.0

    # Initial conditions and constraint waveform
    DEFAULT_TARGET_INF_NORM: float = 4.64
    DEFAULT_UPLOAD_FLOOR: float = 0.6825

    # Numerics
    DENSE_WEIGHTS_MAX_N: int = 512
    STOCHASTIC_TOL: float = 1e-12
    EIGEN_TOL: float = 1e-9
    CONTRACTION_TOL: float = 1e-12
    W_ZERO_TOL: float = 1e-14
    DETREND_CONSENSUS_TOL: float = 1e-9
    DETREND_CONSENSUS_MAX_STEPS: int = 20000

    # Distributed simulator
    SIM_WORKERS: int = 1

    # Artifacts
    CSV_FLOAT_FORMAT: str = "%.17g"

    model_config = SettingsConfigDict(env_file=".env", case_sensitive=True, extra="ignore")


# Global settings instance
settings = Settings()
