# dfs_gates/control.py
"""Scalar control c(t) multiplying the global LEO operator sum_i sigma^z_i."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .conventions import LEO_PULSE_AREA
from .errors import ArgumentError

log = logging.getLogger(__name__)

KINDS = ("none", "constant", "pulse_train")
PHASES = ("on-first", "off-first")


@dataclass(frozen=True)
class ControlSchedule:
    kind: str = "none"
    h: float = 0.0
    amplitude: float = 0.0
    tau: float = 0.0
    phase: str = "on-first"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArgumentError(f"control kind must be one of {KINDS}, got {self.kind!r}")
        if self.phase not in PHASES:
            raise ArgumentError(f"control phase must be one of {PHASES}, got {self.phase!r}")
        if not (math.isfinite(self.h) and math.isfinite(self.amplitude)):
            raise ArgumentError("control amplitudes must be finite")
        if self.kind == "pulse_train" and not (math.isfinite(self.tau) and self.tau > 0):
            raise ArgumentError(f"pulse train needs tau > 0, got {self.tau}")

    @classmethod
    def none(cls) -> "ControlSchedule":
        return cls()

    @classmethod
    def constant(cls, h: float) -> "ControlSchedule":
        return cls(kind="constant", h=float(h))

    @classmethod
    def pulse_train(cls, amplitude: float, tau: float, phase: str = "on-first") -> "ControlSchedule":
        return cls(kind="pulse_train", amplitude=float(amplitude), tau=float(tau), phase=phase)

    @property
    def active(self) -> bool:
        if self.kind == "constant":
            return self.h != 0.0
        return self.kind == "pulse_train" and self.amplitude != 0.0

    def describe(self) -> str:
        if self.kind == "constant":
            return f"constant(h={self.h:g})"
        if self.kind == "pulse_train":
            return f"pulse_train(A={self.amplitude:g},tau/pi={self.tau / math.pi:g},{self.phase})"
        return "none"


def c_at(schedule: ControlSchedule, t: float) -> float:
    """Control amplitude at time t (units of 1/J)."""
    if t < 0:
        raise ArgumentError(f"control evaluated at negative time {t}")
    if schedule.kind == "constant":
        return schedule.h
    if schedule.kind == "pulse_train":
        n = math.floor(t / schedule.tau)
        on = (n % 2 == 0) == (schedule.phase == "on-first")
        return schedule.amplitude if on else 0.0
    return 0.0


def edges(schedule: ControlSchedule, t_end: float) -> np.ndarray:
    """Discontinuities of c(t) inside (0, t_end): integer multiples of tau."""
    if schedule.kind != "pulse_train":
        return np.empty(0)
    n_max = int(math.floor(t_end / schedule.tau + 1e-9))
    out = schedule.tau * np.arange(1, n_max + 1)
    return out[out < t_end]


def period_integral(schedule: ControlSchedule) -> float:
    """Integral of c over one on-interval; warns when it is not the pi/2 pulse area."""
    if schedule.kind != "pulse_train":
        raise ArgumentError(f"period integral needs a pulse train, got {schedule.kind!r}")
    area = schedule.amplitude * schedule.tau
    if not math.isclose(area, LEO_PULSE_AREA, rel_tol=1e-9, abs_tol=1e-12):
        log.warning("pulse area A*tau = %.6g pi differs from pi/2; nonperturbative DD still "
                    "only needs a large constant", area / math.pi)
    return area
