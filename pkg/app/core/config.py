import os
from pathlib import Path

from pydantic import BaseModel, Field, field_validator

BASE_DIR = Path(__file__).resolve().parent.parent
TEMPLATES_DIR = BASE_DIR / "templates"
APP_TITLE = "erdos-lseries"

# Bump when payload layout changes; carried in every CLI metadata block
TOOL_VERSION = "1.2.0"

# Precision defaults
DEFAULT_PRECISION_BITS = 128
MIN_PRECISION_BITS = 53
GUARD_BITS = 32


class Settings(BaseModel):
    """Runtime knobs read from the environment (``.env`` is loaded by ``app.main``)."""

    model_config = {"frozen": True}

    threads: int = Field(default=1, ge=1)
    precision_bits: int = Field(default=DEFAULT_PRECISION_BITS, ge=MIN_PRECISION_BITS)
    max_precision_bits: int = Field(default=4096, ge=MIN_PRECISION_BITS)
    enumeration_max_q: int = Field(default=17, ge=3)
    log_level: str = "WARNING"
    mc_chunk: int = Field(default=10_000, ge=1)

    @field_validator("log_level")
    @classmethod
    def _upper_level(cls, v: str) -> str:
        return (v or "WARNING").upper()


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        return default


def get_settings() -> Settings:
    """Build settings from the current environment.

    Not cached: tests patch ``ERDOS_*`` variables between calls. Invalid values
    (e.g. ``ERDOS_PRECISION_BITS=12``) raise ``pydantic.ValidationError``.
    """
    return Settings(
        threads=max(1, _env_int("ERDOS_THREADS", os.cpu_count() or 1)),
        precision_bits=_env_int("ERDOS_PRECISION_BITS", DEFAULT_PRECISION_BITS),
        max_precision_bits=_env_int("ERDOS_MAX_PRECISION_BITS", 4096),
        enumeration_max_q=_env_int("ERDOS_ENUMERATION_MAX_Q", 17),
        log_level=os.getenv("ERDOS_LOG_LEVEL", "WARNING"),
        mc_chunk=_env_int("ERDOS_MC_CHUNK", 10_000),
    )
