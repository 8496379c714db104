"""
Runtime Configuration
=====================
Defaults for every budget, cap and guard used by the toolkit. Each value can
be overridden from the environment, e.g. ``COARSEGRAPH_MAX_VERTICES=1000000``.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, replace
from functools import lru_cache

from coarsegraph.errors import ConfigError

logger = logging.getLogger(__name__)

# ============================================================
# GLOBAL CONFIGURATION
# ============================================================

ENV_PREFIX = "COARSEGRAPH_"

MAX_VERTICES = 2 ** 26          # construction resource guard
ALL_PAIRS_CAP = 2 ** 12         # hosts up to this size get a cached distance matrix
ORACLE_CAP = 10                 # exhaustive fat-minor oracle
TREEWIDTH_CAP = 12              # exact treewidth oracle
TRIPLE_ORACLE_CAP = 40          # spread-path oracle
DEFAULT_BUDGET = 1_000_000      # node expansions per search
THREADS = 1
LOG_LEVEL = "WARNING"
LOG_LEVELS = ("CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG")

SERVICE_PORT = 5000
MAX_CONTENT_LENGTH = 16 * 1024 * 1024  # 16MB max request size


@dataclass(frozen=True)
class Settings:
    max_vertices: int = MAX_VERTICES
    all_pairs_cap: int = ALL_PAIRS_CAP
    oracle_cap: int = ORACLE_CAP
    treewidth_cap: int = TREEWIDTH_CAP
    triple_oracle_cap: int = TRIPLE_ORACLE_CAP
    default_budget: int = DEFAULT_BUDGET
    threads: int = THREADS
    log_level: str = LOG_LEVEL
    port: int = SERVICE_PORT
    max_content_length: int = MAX_CONTENT_LENGTH

    def with_overrides(self, **changes) -> "Settings":
        """Return a copy with the non-None keyword values applied."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def _env_int(name: str, default: int, minimum: int = 1) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw.replace("_", ""))
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from None
    if value < minimum:
        raise ConfigError(f"{name} must be at least {minimum}, got {value}")
    return value


def load_settings() -> Settings:
    """
    Read settings from the environment.

    Raises:
        ConfigError: if a variable is present but malformed
    """
    level = os.environ.get(ENV_PREFIX + "LOG_LEVEL", LOG_LEVEL).upper()
    if level not in LOG_LEVELS:
        raise ConfigError(f"{ENV_PREFIX}LOG_LEVEL is not a logging level: {level!r}")

    return Settings(
        max_vertices=_env_int(ENV_PREFIX + "MAX_VERTICES", MAX_VERTICES),
        all_pairs_cap=_env_int(ENV_PREFIX + "ALL_PAIRS_CAP", ALL_PAIRS_CAP, minimum=0),
        oracle_cap=_env_int(ENV_PREFIX + "ORACLE_CAP", ORACLE_CAP),
        treewidth_cap=_env_int(ENV_PREFIX + "TREEWIDTH_CAP", TREEWIDTH_CAP),
        triple_oracle_cap=_env_int(ENV_PREFIX + "TRIPLE_ORACLE_CAP", TRIPLE_ORACLE_CAP),
        default_budget=_env_int(ENV_PREFIX + "DEFAULT_BUDGET", DEFAULT_BUDGET),
        threads=_env_int(ENV_PREFIX + "THREADS", THREADS),
        log_level=level,
        port=_env_int("PORT", SERVICE_PORT),
        max_content_length=_env_int(ENV_PREFIX + "MAX_CONTENT_LENGTH", MAX_CONTENT_LENGTH),
    )


# ============================================================
# INITIALIZATION (Singleton Pattern)
# ============================================================

@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Get the process-wide settings, read once from the environment."""
    settings = load_settings()
    logger.debug("Settings loaded: %s", settings)
    return settings
