from functools import lru_cache
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    log_level: str = "WARNING"

    # Cuadratura (valores por defecto de QuadratureConfig)
    quad_rel_tol: float = 1e-10
    quad_abs_tol: float = 1e-12
    quad_max_panels: int = 4096
    quad_truncation_mass: float = 1e-16
    quad_gauss_order: int = 20

    # Orden s-FR
    order_tolerance: float = 1e-9
    underflow_log_threshold: float = -700.0

    # Muestreador Monte-Carlo
    sampler_chunk_size: int = 65536
    sampler_workers: int = 1

    # Salida CSV de la CLI
    csv_output_dir: Path | None = None
    csv_significant_digits: int = 12

    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore", case_sensitive=False)


@lru_cache
def get_settings() -> Settings:
    return Settings()
