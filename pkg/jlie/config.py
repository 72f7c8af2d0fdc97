"""
Configuration and Logging
Settings are read from the environment (prefix JLIE_) and an optional .env file
"""

import logging
import sys
from functools import lru_cache
from pathlib import Path

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables
load_dotenv()

PACKAGE_DIR = Path(__file__).resolve().parent


class Settings(BaseSettings):
    """Runtime settings for the jlie toolkit"""

    model_config = SettingsConfigDict(env_prefix="JLIE_", env_file=".env", extra="ignore")

    # Probabilistic zero-testing
    seed: int = 0
    zero_samples: int = 20
    zero_tolerance: float = 1e-30
    zero_precision_bits: int = 128
    sample_box: int = 2
    resample_budget: int = 200

    # Lie algebra closure and witness search
    max_dim: int = 12
    witness_bound: int = 3

    # Execution
    jobs: int = 1
    log_level: str = "WARNING"

    # Data files
    fixtures_dir: Path = PACKAGE_DIR / "fixtures"
    registry_path: Path = PACKAGE_DIR / "data" / "gko_table.json"


@lru_cache
def get_settings() -> Settings:
    """Cached settings instance"""
    return Settings()


def configure_logging(level: str | None = None) -> None:
    """
    Configure root logging once, writing to stderr

    stdout is reserved for JSON reports.
    """
    level_name = (level or get_settings().log_level).upper()
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, level_name, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )
