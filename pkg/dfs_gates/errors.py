# dfs_gates/errors.py
from __future__ import annotations


class SimulationError(Exception):
    """Base class for every error raised by the simulator."""

    exit_code = 1


class ArgumentError(SimulationError, ValueError):
    """Invalid argument passed to a library operation."""

    exit_code = 2


class ModelError(SimulationError):
    """A build-time model assertion failed."""

    exit_code = 2


class ConfigError(SimulationError):
    """Config file could not be parsed or validated."""

    exit_code = 2


class InstabilityError(SimulationError):
    """Integration blew up (non-finite entries or norm above the bound)."""

    exit_code = 3

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t
