import logging
from typing import Optional

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    log_file: Optional[str] = None
    log_level: str = "WARNING"
    tolerance: float = 1e-9
    payment_tolerance: float = 1e-6
    regularity_grid_points: int = 10001
    lp_significant_digits: int = 12
    max_enumerated_laws: int = 1_000_000
    max_generator_vars: int = 20
    oracle_step: float = 0.5
    bisection_tolerance: float = 1e-10
    default_seed: int = 0
    default_samples: int = 1000

    @property
    def level(self) -> int:
        return logging.getLevelName(self.log_level.upper())


settings = Settings(
    _env_file=".env",
    _env_file_encoding="utf-8",
)


def configure_logging(verbose: bool = False) -> None:
    """Sets up the root logger once per process; stdout stays reserved for documents."""
    level = logging.DEBUG if verbose else settings.level
    if settings.log_file:
        logging.basicConfig(filename=settings.log_file, level=level)
    else:
        logging.basicConfig(level=level)
