import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

from core.errors import ConfigError


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{name} must be a number, got {raw!r}")


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}")


def _env_str(name: str, default: str) -> str:
    raw = os.getenv(name)
    return default if raw is None or raw.strip() == "" else raw.strip()


@dataclass(frozen=True)
class Settings:
    rel_tol: float = 1e-12
    root_method: str = "brentq"
    n_jobs: int = 1
    percent_decimals: int = 3
    capacity_decimals: int = 3
    saturation_threshold: float = 100.05
    word_bytes: int = 8
    output_dir: str = "data/reports"
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls, dotenv_path: Optional[str] = None) -> "Settings":
        """Settings from the environment; a .env file fills in whatever is unset"""
        load_dotenv(dotenv_path=dotenv_path, override=False)

        settings = cls(
            rel_tol=_env_float("CAPACITY_REL_TOL", cls.rel_tol),
            root_method=_env_str("CAPACITY_ROOT_METHOD", cls.root_method).lower(),
            n_jobs=_env_int("CAPACITY_N_JOBS", cls.n_jobs),
            percent_decimals=_env_int("CAPACITY_PERCENT_DECIMALS", cls.percent_decimals),
            capacity_decimals=_env_int("CAPACITY_CAPACITY_DECIMALS", cls.capacity_decimals),
            saturation_threshold=_env_float("CAPACITY_SATURATION_THRESHOLD", cls.saturation_threshold),
            word_bytes=_env_int("CAPACITY_WORD_BYTES", cls.word_bytes),
            output_dir=_env_str("CAPACITY_OUTPUT_DIR", cls.output_dir),
            log_level=_env_str("CAPACITY_LOG_LEVEL", cls.log_level).upper(),
        )
        settings.validate()
        return settings

    def validate(self):
        if not self.rel_tol > 0:
            raise ConfigError("CAPACITY_REL_TOL must be positive")
        if self.root_method not in ("brentq", "bisect"):
            raise ConfigError(f"CAPACITY_ROOT_METHOD must be brentq or bisect, got {self.root_method!r}")
        if self.n_jobs == 0:
            raise ConfigError("CAPACITY_N_JOBS must be non-zero (-1 uses every core)")
        for name, value in (("CAPACITY_PERCENT_DECIMALS", self.percent_decimals),
                            ("CAPACITY_CAPACITY_DECIMALS", self.capacity_decimals)):
            if not 0 <= value <= 12:
                raise ConfigError(f"{name} must be between 0 and 12, got {value}")
        if self.word_bytes < 1:
            raise ConfigError("CAPACITY_WORD_BYTES must be positive")
        if self.log_level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ConfigError(f"CAPACITY_LOG_LEVEL {self.log_level!r} is not a logging level")
