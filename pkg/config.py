"""
Configuration
--------------
Loads runtime settings from a .env file or environment variables.

  REMEDIAN_SEED       seed fallback for `simulate` when --seed is omitted
  REMEDIAN_THREADS    default worker cap for Monte-Carlo runs
  REMEDIAN_BATCH      replicates handed to one worker task
  REMEDIAN_LOG_LEVEL  stderr logging level (DEBUG, INFO, WARNING, ...)
"""

import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from errors import ConfigError

# Load .env manually (no python-dotenv required)
_env_path = Path(__file__).parent / ".env"
if _env_path.exists():
    with open(_env_path) as f:
        for line in f:
            line = line.strip()
            if line and not line.startswith("#") and "=" in line:
                k, v = line.split("=", 1)
                os.environ.setdefault(k.strip(), v.strip())


# Problems found while loading; raised by check() inside the CLI error handler.
_problems: List[str] = []


def _int_env(name: str, default: Optional[int]) -> Optional[int]:
    raw = os.environ.get(name, "").strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        _problems.append(f"{name} must be an integer, got {raw!r}")
        return default


REMEDIAN_SEED:      Optional[int] = _int_env("REMEDIAN_SEED", None)
REMEDIAN_THREADS:   int = _int_env("REMEDIAN_THREADS", 1)
REMEDIAN_BATCH:     int = _int_env("REMEDIAN_BATCH", 64)
REMEDIAN_LOG_LEVEL: str = os.environ.get("REMEDIAN_LOG_LEVEL", "WARNING").upper()

if REMEDIAN_THREADS < 1 or REMEDIAN_BATCH < 1:
    _problems.append("REMEDIAN_THREADS and REMEDIAN_BATCH must be positive")


def check() -> None:
    """Raise ConfigError if any setting failed to load."""
    if _problems:
        raise ConfigError("; ".join(_problems))


_handler = logging.StreamHandler()
_handler.setFormatter(logging.Formatter("%(asctime)s %(name)s %(levelname)s %(message)s"))


def configure_logging(verbose: bool = False) -> None:
    """Route the package logger to the current stderr."""
    root = logging.getLogger("remedian")
    root.setLevel(logging.DEBUG if verbose else getattr(logging, REMEDIAN_LOG_LEVEL, logging.WARNING))
    _handler.stream = sys.stderr
    if _handler not in root.handlers:
        root.addHandler(_handler)
