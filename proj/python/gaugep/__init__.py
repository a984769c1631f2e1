"""Positive-P / gauge-P phase-space simulation of long-range interacting bosons."""

from ._core import *  # noqa: F401,F403
from ._core import (  # noqa: F401
    ConfigError,
    GaugeConfig,
    GuardRefusal,
    PreconditionError,
    RunFailed,
)

__version__ = "0.1.0"
