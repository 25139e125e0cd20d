"""
Numerical settings shared by every module.

Tolerances and the dense-storage limit live in one frozen ``Settings``
instance. ``QIL_MAX_DIM`` overrides the limit from the environment; the
command line replaces the instance through :func:`configure`.
"""

import logging
import os
from dataclasses import dataclass, replace

logger = logging.getLogger(__name__)

MAX_DIM_ENV = "QIL_MAX_DIM"
DEFAULT_MAX_TOTAL_DIM = 4096


def _get_int_env(key: str, default: int) -> int:
    """Get integer value from environment variable."""
    value = os.getenv(key)
    if value is None:
        return default
    try:
        return int(value)
    except ValueError:
        logger.warning(
            f"Ignoring non-integer {key}={value!r}; using {default}."
        )
        return default


@dataclass(frozen=True)
class Settings:
    tol_norm: float = 1e-9
    tol_trace: float = 1e-9
    tol_herm: float = 1e-9
    tol_unitary: float = 1e-9
    # relative to the spectral norm of the matrix under test
    tol_psd: float = 1e-8
    max_total_dim: int = DEFAULT_MAX_TOTAL_DIM

    def __post_init__(self):
        for name in ("tol_norm", "tol_trace", "tol_herm", "tol_unitary"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive.")
        if not self.tol_psd > 0:
            raise ValueError("tol_psd must be positive.")
        if self.max_total_dim < 1:
            raise ValueError("max_total_dim must be at least 1.")

    @classmethod
    def from_env(cls) -> "Settings":
        """
        Build settings from defaults plus environment overrides.
        :return: Settings with ``QIL_MAX_DIM`` applied when set.
        """
        max_dim = _get_int_env(MAX_DIM_ENV, DEFAULT_MAX_TOTAL_DIM)
        if max_dim < 1:
            logger.warning(
                f"Ignoring {MAX_DIM_ENV}={max_dim}; using "
                f"{DEFAULT_MAX_TOTAL_DIM}."
            )
            max_dim = DEFAULT_MAX_TOTAL_DIM
        return cls(max_total_dim=max_dim)


_settings = Settings.from_env()


def get_settings() -> Settings:
    """Get the process-wide settings instance."""
    return _settings


def configure(**overrides) -> Settings:
    """
    Replace the process-wide settings.
    :param overrides: Field values to change, e.g. ``max_total_dim=256``.
    :return: The new settings instance.
    """
    global _settings
    _settings = replace(_settings, **overrides)
    logger.debug(f"Settings updated: {_settings}")
    return _settings


def reset_settings() -> Settings:
    """Restore defaults (plus environment overrides)."""
    global _settings
    _settings = Settings.from_env()
    return _settings
