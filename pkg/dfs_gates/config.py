# dfs_gates/config.py
"""
Run configuration: flat `key = value` lines, `#` comments, dotted section keys.

    model.kind = single-logical
    bath.alpha_z_over_pi = 0.25
    bath.override.collective-z.gamma = 2.0
"""
from __future__ import annotations

import dataclasses
import difflib
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Tuple

from .control import ControlSchedule, period_integral
from .conventions import (
    DEFAULT_DT,
    DEFAULT_F_STAR,
    DEFAULT_NORM_BOUND,
    DEFAULT_SAMPLE_EVERY,
    REPORT_THETA_GATES,
)
from .errors import ArgumentError, ConfigError
from .model import (
    BathParams,
    NoiseMix,
    SystemModel,
    build_physical_qubit_model,
    build_single_logical_model,
    build_two_logical_model,
)

MODEL_KINDS = ("single-logical", "two-logical", "physical")
GATES = {
    "single-logical": ("Tx", "Ty", "Tz"),
    "two-logical": ("TzTz",),
    "physical": ("x", "z"),
}
OVERRIDE_PARAMS = ("Gamma", "gamma", "T")


@dataclass(frozen=True)
class ModelSection:
    kind: str = "single-logical"
    gate: str = "Tx"
    J: float = 1.0
    n_pairs: Optional[int] = None


@dataclass(frozen=True)
class BathSection:
    Gamma: float = 0.005
    gamma: float = 1.0
    T: float = 50.0
    x: bool = False
    y: bool = False
    z: bool = True
    alpha_x_over_pi: float = 0.5
    alpha_y_over_pi: float = 0.5
    alpha_z_over_pi: float = 0.5
    # channel name -> ((param, value), ...), kept sorted for hashing
    overrides: Tuple[Tuple[str, Tuple[Tuple[str, float], ...]], ...] = ()


@dataclass(frozen=True)
class ControlSection:
    kind: str = "none"
    h: float = 0.0
    amplitude: float = 0.0
    tau_over_pi: float = 0.01
    phase: str = "on-first"


@dataclass(frozen=True)
class RunSection:
    theta_max_over_pi: float = 4.0
    dt: float = DEFAULT_DT
    sample_every: float = DEFAULT_SAMPLE_EVERY
    F_star: float = DEFAULT_F_STAR
    theta_gate_over_pi: Optional[float] = None
    mc_samples: int = 0
    seed: int = 0
    norm_bound: float = DEFAULT_NORM_BOUND


@dataclass(frozen=True)
class SimConfig:
    model: ModelSection = field(default_factory=ModelSection)
    bath: BathSection = field(default_factory=BathSection)
    control: ControlSection = field(default_factory=ControlSection)
    run: RunSection = field(default_factory=RunSection)


# -------------------------
# Value coercion
# -------------------------
def _to_bool(raw: str) -> bool:
    s = raw.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _to_float(raw: str) -> float:
    v = float(raw)
    if not math.isfinite(v):
        raise ValueError(f"not a finite number: {raw!r}")
    return v


def _to_int(raw: str) -> int:
    v = float(raw)
    if not v.is_integer():
        raise ValueError(f"not an integer: {raw!r}")
    return int(v)


def _optional(conv: Callable[[str], object]) -> Callable[[str], object]:
    def inner(raw: str):
        return None if raw.strip().lower() in ("none", "") else conv(raw)
    return inner


# key -> (section, field, converter, numeric)
_KEYS: Dict[str, Tuple[str, str, Callable[[str], object], bool]] = {
    "model.kind": ("model", "kind", str, False),
    "model.gate": ("model", "gate", str, False),
    "model.J": ("model", "J", _to_float, True),
    "model.n_pairs": ("model", "n_pairs", _optional(_to_int), True),
    "bath.Gamma": ("bath", "Gamma", _to_float, True),
    "bath.gamma": ("bath", "gamma", _to_float, True),
    "bath.T": ("bath", "T", _to_float, True),
    "bath.x": ("bath", "x", _to_bool, False),
    "bath.y": ("bath", "y", _to_bool, False),
    "bath.z": ("bath", "z", _to_bool, False),
    "bath.alpha_x_over_pi": ("bath", "alpha_x_over_pi", _to_float, True),
    "bath.alpha_y_over_pi": ("bath", "alpha_y_over_pi", _to_float, True),
    "bath.alpha_z_over_pi": ("bath", "alpha_z_over_pi", _to_float, True),
    "control.kind": ("control", "kind", str, False),
    "control.h": ("control", "h", _to_float, True),
    "control.amplitude": ("control", "amplitude", _to_float, True),
    "control.tau_over_pi": ("control", "tau_over_pi", _to_float, True),
    "control.phase": ("control", "phase", str, False),
    "run.theta_max_over_pi": ("run", "theta_max_over_pi", _to_float, True),
    "run.dt": ("run", "dt", _to_float, True),
    "run.sample_every": ("run", "sample_every", _to_float, True),
    "run.F_star": ("run", "F_star", _to_float, True),
    "run.theta_gate_over_pi": ("run", "theta_gate_over_pi", _optional(_to_float), True),
    "run.mc_samples": ("run", "mc_samples", _to_int, True),
    "run.seed": ("run", "seed", _to_int, True),
    "run.norm_bound": ("run", "norm_bound", _to_float, True),
}

_OVERRIDE_PREFIX = "bath.override."


def known_keys() -> List[str]:
    return list(_KEYS)


def is_numeric_key(key: str) -> bool:
    if key.startswith(_OVERRIDE_PREFIX):
        return key.rsplit(".", 1)[-1] in OVERRIDE_PARAMS
    return key in _KEYS and _KEYS[key][3]


def _split_override(key: str) -> Tuple[str, str]:
    rest = key[len(_OVERRIDE_PREFIX):]
    name, _, param = rest.rpartition(".")
    if not name or param not in OVERRIDE_PARAMS:
        raise ConfigError(f"bad override key {key!r}: expected "
                          f"bath.override.<channel>.<{'|'.join(OVERRIDE_PARAMS)}>")
    return name, param


def _set_override(bath: BathSection, name: str, param: str, value: float) -> BathSection:
    table: Dict[str, Dict[str, float]] = {n: dict(p) for n, p in bath.overrides}
    table.setdefault(name, {})[param] = value
    frozen = tuple(sorted((n, tuple(sorted(p.items()))) for n, p in table.items()))
    return dataclasses.replace(bath, overrides=frozen)


def with_value(cfg: SimConfig, key: str, value) -> SimConfig:
    """Copy of cfg with one key set; `value` may be a raw string or an already typed value."""
    if key.startswith(_OVERRIDE_PREFIX):
        name, param = _split_override(key)
        try:
            v = _to_float(str(value))
        except ValueError as e:
            raise ConfigError(f"{key}: {e}") from None
        return dataclasses.replace(cfg, bath=_set_override(cfg.bath, name, param, v))
    if key not in _KEYS:
        close = difflib.get_close_matches(key, known_keys(), n=1)
        hint = f"; did you mean {close[0]!r}?" if close else ""
        raise ConfigError(f"unknown config key {key!r}{hint}")
    section, name, conv, _ = _KEYS[key]
    try:
        v = conv("none" if value is None else str(value))
    except (ValueError, TypeError) as e:
        raise ConfigError(f"{key}: {e}") from None
    sect = dataclasses.replace(getattr(cfg, section), **{name: v})
    return dataclasses.replace(cfg, **{section: sect})


# -------------------------
# Parsing
# -------------------------
def parse_config(text: str, source: str = "<string>") -> SimConfig:
    cfg = SimConfig()
    seen: Dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, raw = body.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first on line {seen[key]})")
        seen[key] = lineno
        try:
            cfg = with_value(cfg, key, raw)
        except ConfigError as e:
            raise ConfigError(f"{source}:{lineno}: {e}") from None
    validate(cfg)
    return cfg


def load_config(path: str | Path) -> SimConfig:
    p = Path(path)
    text = p.read_text(encoding="utf-8")  # OSError propagates (exit 4)
    return parse_config(text, source=str(p))


def validate(cfg: SimConfig):
    m, b, c, r = cfg.model, cfg.bath, cfg.control, cfg.run
    if m.kind not in MODEL_KINDS:
        raise ConfigError(f"model.kind must be one of {MODEL_KINDS}, got {m.kind!r}")
    if m.gate not in GATES[m.kind]:
        raise ConfigError(f"model.gate for {m.kind} must be one of {GATES[m.kind]}, got {m.gate!r}")
    expected_pairs = {"single-logical": 1, "two-logical": 2, "physical": None}[m.kind]
    if m.n_pairs is not None and m.n_pairs != expected_pairs:
        raise ConfigError(f"model.n_pairs = {m.n_pairs} disagrees with model.kind = {m.kind}")
    if not m.J > 0:
        raise ConfigError(f"model.J must be > 0, got {m.J}")
    for axis in "xyz":
        a = getattr(b, f"alpha_{axis}_over_pi")
        if not 0.0 <= a <= 0.5:
            raise ConfigError(f"bath.alpha_{axis}_over_pi must lie in [0, 0.5], got {a}")
    if not r.theta_max_over_pi > 0 or not r.sample_every > 0 or not r.dt > 0:
        raise ConfigError("run.theta_max_over_pi, run.sample_every and run.dt must be > 0")
    if not 0 < r.F_star < 1:
        raise ConfigError(f"run.F_star must lie in (0, 1), got {r.F_star}")
    if r.theta_gate_over_pi is not None and not r.theta_gate_over_pi > 0:
        raise ConfigError(f"run.theta_gate_over_pi must be > 0, got {r.theta_gate_over_pi}")
    if r.mc_samples < 0 or r.seed < 0:
        raise ConfigError("run.mc_samples and run.seed must be >= 0")
    if m.kind == "physical" and c.kind != "none":
        raise ConfigError("control is not supported on the physical-qubit model")


# -------------------------
# Canonical form and provenance
# -------------------------
def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def canonical_lines(cfg: SimConfig) -> List[str]:
    lines = []
    for key, (section, name, _, _) in _KEYS.items():
        lines.append(f"{key} = {_fmt(getattr(getattr(cfg, section), name))}")
    for chan, params in cfg.bath.overrides:
        for param, value in params:
            lines.append(f"{_OVERRIDE_PREFIX}{chan}.{param} = {_fmt(value)}")
    return lines


def config_hash(cfg: SimConfig) -> str:
    text = "\n".join(canonical_lines(cfg)) + "\n"
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


def defaults_epilog() -> str:
    return "config keys and defaults:\n" + "\n".join(f"  {ln}" for ln in canonical_lines(SimConfig()))


# -------------------------
# Builders
# -------------------------
def _overrides(cfg: SimConfig) -> Mapping[str, BathParams]:
    b = cfg.bath
    out = {}
    for name, params in b.overrides:
        vals = {"Gamma": b.Gamma, "gamma": b.gamma, "T": b.T}
        vals.update(dict(params))
        out[name] = BathParams(**vals)
    return out


def build_model(cfg: SimConfig) -> SystemModel:
    validate(cfg)
    m, b = cfg.model, cfg.bath
    if m.kind == "physical":
        if b.overrides:
            raise ConfigError("channel overrides are not supported on the physical-qubit model")
        return build_physical_qubit_model(m.gate, m.J, b.Gamma, b.gamma, b.T)
    mix = NoiseMix(alpha_x=b.alpha_x_over_pi * math.pi, alpha_y=b.alpha_y_over_pi * math.pi,
                   alpha_z=b.alpha_z_over_pi * math.pi, x=b.x, y=b.y, z=b.z)
    try:
        if m.kind == "single-logical":
            return build_single_logical_model(m.gate, m.J, mix, b.Gamma, b.gamma, b.T,
                                              overrides=_overrides(cfg))
        return build_two_logical_model(m.J, mix, b.Gamma, b.gamma, b.T, overrides=_overrides(cfg))
    except ArgumentError as e:
        raise ConfigError(str(e)) from None


def build_schedule(cfg: SimConfig) -> ControlSchedule:
    c = cfg.control
    try:
        if c.kind == "constant":
            return ControlSchedule.constant(c.h)
        if c.kind == "pulse_train":
            schedule = ControlSchedule.pulse_train(c.amplitude, c.tau_over_pi * math.pi, c.phase)
            if schedule.active:
                period_integral(schedule)
            return schedule
        return ControlSchedule(kind=c.kind, phase=c.phase)
    except ArgumentError as e:
        raise ConfigError(str(e)) from None


def theta_gates(cfg: SimConfig) -> Tuple[float, ...]:
    if cfg.run.theta_gate_over_pi is None:
        return REPORT_THETA_GATES
    return (cfg.run.theta_gate_over_pi * math.pi,)
