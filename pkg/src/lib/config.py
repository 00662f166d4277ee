"""Application configuration using Pydantic Settings."""

from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Logging
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "INFO"
    log_format: Literal["json", "text"] = "json"

    # Execution
    threads: int = Field(default=1, ge=1)
    sweep_points: int = Field(default=2001, ge=2)

    # Parameter diagnostics
    probe_ratio_warning: float = 0.1
    chi_literal: bool = True  # Caption chi values are taken as printed; False multiplies them by 2*pi
    pole_cond_limit: float = 1e10
    matsubara_max_terms: int = Field(default=20000, ge=1)

    # Steady state
    steady_residual_tol: float = 1e-10
    root_imag_tol: float = 1e-9

    # Spectral quadrature
    quad_rel_tol: float = 1e-7
    quad_fail_tol: float = 1e-4
    quad_limit: int = 20000
    quad_half_widths: float = 5.0
    quad_cutoff_factor: float = 1e3
    quad_tau_block: int = Field(default=16, ge=1)
    dense_grid_points: int = 1_000_000

    # Time-domain integration
    ode_method: Literal["Radau", "BDF", "LSODA"] = "Radau"
    ode_rtol: float = 1e-9
    ode_atol_scale: float = 1e-12
    ode_chunk_periods: int = 50
    ode_max_periods: int = 20000
    ode_settle_tol: float = 1e-6
    ode_envelope_tol: float = 1e-4
    ode_divergence_factor: float = 1e6
    demod_periods: int = 20
    samples_per_period: int = 32
    validation_probe_ratio: float = 1e-4


# Global settings instance
settings = Settings()
