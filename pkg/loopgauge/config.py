import logging
import sys
from functools import lru_cache

import structlog
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="LOOPGAUGE_", env_file=".env", extra="ignore")

    threads: int = 4
    tolerance: float = 1e-8
    iterative_tolerance: float = 1e-6
    defect_condition: float = 1e8
    rank_tolerance: float = 1e-10
    region_margin: float = 1e-10
    max_iterations: int = 100_000
    seed: int = 7
    database_url: str = "sqlite:///./loopgauge.db"
    log_level: str = "INFO"


@lru_cache
def get_settings() -> Settings:
    return Settings()


class _Stderr:
    """Whatever sys.stderr is at write time, not at configuration time."""

    def write(self, text: str) -> int:
        return sys.stderr.write(text)

    def flush(self) -> None:
        sys.stderr.flush()


def configure_logging(level: str = "INFO") -> None:
    # Logs go to stderr so JSON reports on stdout stay clean.
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.dev.ConsoleRenderer(colors=False),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            logging.getLevelName(level.upper())
        ),
        logger_factory=structlog.PrintLoggerFactory(file=_Stderr()),
        cache_logger_on_first_use=False,
    )


def resolve(value, name: str):
    """Explicit argument, else the configured default of the same name."""
    return getattr(get_settings(), name) if value is None else value
