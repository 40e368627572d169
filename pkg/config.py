"""
pdlab configuration
Numerical tolerances and run limits, loaded from the environment
"""

import os
import logging
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Optional

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

ENV_PREFIX = "PDLAB_"


@dataclass(frozen=True)
class LabConfig:
    """Tolerances shared by every module"""
    rank_tol: float = 1e-9
    member_tol: float = 1e-8
    minor_tol: float = 1e-10
    minor_band: float = 1e-6
    cluster_tol: float = 1e-6
    polar_tol: float = 1e-12
    polar_max_iter: int = 50
    k_tol: float = 1e-8
    fd_step: float = 1e-5
    immersion_tol: float = 1e-3
    step_floor: float = 1e-8
    tangent_tol: float = 1e-6
    tangent_probe: float = 1e-4
    diagram_tol: float = 1e-8
    bound_tol: float = 1e-8
    threads: int = 1

    def with_overrides(self, overrides: Optional[Dict[str, Any]] = None) -> "LabConfig":
        """Return a copy with the non-None entries of overrides applied"""
        if not overrides:
            return self
        known = {f.name for f in fields(self)}
        clean = {k: v for k, v in overrides.items() if v is not None and k in known}
        return replace(self, **clean)


DEFAULT_CONFIG = LabConfig()


def load_config(env_file: Optional[str] = None) -> LabConfig:
    """
    Build a LabConfig from PDLAB_* environment variables (and a .env file).
    Bad values are ignored with a warning.
    """
    load_dotenv(env_file)
    values: Dict[str, Any] = {}
    for f in fields(LabConfig):
        raw = os.getenv(ENV_PREFIX + f.name.upper())
        if raw is None or raw.strip() == "":
            continue
        cast = int if f.type in (int, "int") else float
        try:
            values[f.name] = cast(raw)
        except ValueError:
            logger.warning(f"⚠️ Ignoring {ENV_PREFIX + f.name.upper()}={raw!r}: not a number")
    config = replace(DEFAULT_CONFIG, **values)
    if config.threads < 1:
        logger.warning("⚠️ PDLAB_THREADS below 1, using a single worker")
        config = replace(config, threads=1)
    return config
