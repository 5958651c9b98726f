# config.py - Centralized configuration management
"""
Process-level settings for the simulator (output paths, logging, workers, seed).

Run-level configuration (channel, attack, protocol) lives in the pydantic
models next to the code that consumes it; this module only covers what the
environment decides.
"""
import logging
import os
from dataclasses import dataclass
from typing import Optional

LOG_FORMAT = "%(asctime)s [%(levelname)s] [%(name)s] %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

DEFAULT_MASTER_SEED = 20240611


@dataclass
class SimulatorSettings:
    """Settings resolved from environment variables."""
    out_dir: str
    log_level: str
    workers: int
    master_seed: int
    profile: str

    @classmethod
    def from_env(cls):
        """Create SimulatorSettings based on environment variables."""
        return cls(
            out_dir=os.getenv("QNDP_OUT_DIR", "reports"),
            log_level=os.getenv("QNDP_LOG_LEVEL", "INFO").upper(),
            workers=int(os.getenv("QNDP_WORKERS", "1")),
            master_seed=int(os.getenv("QNDP_SEED", str(DEFAULT_MASTER_SEED))),
            profile=os.getenv("QNDP_PROFILE", "standard"),
        )


def configure_logging(level: str = "INFO") -> None:
    """Configure the root logger once for CLI and script use."""
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format=LOG_FORMAT,
        datefmt=LOG_DATE_FORMAT,
    )


def source_date_epoch() -> Optional[str]:
    """ISO timestamp from SOURCE_DATE_EPOCH, or None when unset."""
    raw = os.getenv("SOURCE_DATE_EPOCH")
    if not raw:
        return None
    from datetime import datetime, timezone
    return datetime.fromtimestamp(int(raw), tz=timezone.utc).isoformat()
