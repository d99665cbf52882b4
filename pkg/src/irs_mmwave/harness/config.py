"""Experiment configuration: system dimensions, link budget, sampler settings.

Configs are plain JSON objects whose keys carry their units
(``p_tx_dbm``, ``d_ti_range_m``); unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..channel import DIRECT_PENETRATION_DB, ArrayConfig, UpaGeometry
from ..metrics import LinkBudget
from ..pipeline import ARCHITECTURES, DESIGNS


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` maps field names to messages."""

    def __init__(self, errors: dict[str, str]):
        self.errors = dict(errors)
        lines = "; ".join(f"{k}: {v}" for k, v in self.errors.items())
        super().__init__(f"invalid config ({lines})")


_SHAPE_FIELDS = ("tx_shape", "rx_shape", "irs_shape")
_RANGE_FIELDS = ("d_ti_range_m", "d_ir_range_m")


@dataclass(frozen=True)
class SystemConfig:
    tx_shape: tuple[int, int] = (8, 8)
    rx_shape: tuple[int, int] = (4, 4)
    irs_shape: tuple[int, int] = (16, 16)
    spacing_wavelengths: float = 0.5
    n_t_rf: int = 4
    n_r_rf: int = 4
    n_streams: int = 4
    n_path: int = 8
    p_tx_dbm: float = 40.0
    noise_dbm: float = -91.0
    subcarriers: int = 1
    angle_range: float = 1.0
    estimation_error_deg: float = 0.0
    d_ti_range_m: tuple[float, float] = (50.0, 60.0)
    d_ir_range_m: tuple[float, float] = (10.0, 20.0)
    d_tr_offset_m: float = 10.0
    shadowing: bool = True
    penetration_db: float = DIRECT_PENETRATION_DB
    designs: tuple[str, ...] = DESIGNS
    architectures: tuple[str, ...] = ARCHITECTURES
    trials: int = 500
    seed: int = 0

    def __post_init__(self):
        # JSON gives lists; store tuples so configs stay hashable
        for name in _SHAPE_FIELDS + _RANGE_FIELDS + ("designs", "architectures"):
            value = getattr(self, name)
            if isinstance(value, list):
                object.__setattr__(self, name, tuple(value))
        errors = self.validate()
        if errors:
            raise ConfigError(errors)

    def validate(self) -> dict[str, str]:
        err: dict[str, str] = {}
        for name in _SHAPE_FIELDS:
            shape = getattr(self, name)
            if len(shape) != 2 or any(not _is_int(s) or s < 1 for s in shape):
                err[name] = f"expected two positive integers, got {shape!r}"
        for name in ("n_t_rf", "n_r_rf", "n_streams", "n_path", "subcarriers", "trials"):
            if not _is_int(getattr(self, name)) or getattr(self, name) < 1:
                err[name] = "must be a positive integer"
        if not _is_int(self.seed) or self.seed < 0:
            err["seed"] = "must be a non-negative integer"
        if not self.spacing_wavelengths > 0:
            err["spacing_wavelengths"] = "must be positive"
        if not 0 < self.angle_range <= 1:
            err["angle_range"] = "must lie in (0, 1]"
        if not self.estimation_error_deg >= 0:
            err["estimation_error_deg"] = "must be non-negative"
        for name in _RANGE_FIELDS:
            lo_hi = getattr(self, name)
            if len(lo_hi) != 2 or not 0 < lo_hi[0] <= lo_hi[1]:
                err[name] = f"expected 0 < low <= high, got {lo_hi!r}"
        if not self.d_tr_offset_m >= 0:
            err["d_tr_offset_m"] = "must be non-negative"
        elif "d_ti_range_m" not in err and "d_ir_range_m" not in err:
            if self.d_ti_range_m[0] + self.d_ir_range_m[0] - self.d_tr_offset_m <= 0:
                err["d_tr_offset_m"] = "direct-link distance could be non-positive"
        if not self.penetration_db >= 0:
            err["penetration_db"] = "must be non-negative"
        bad = [d for d in self.designs if d not in DESIGNS]
        if bad or not self.designs:
            err["designs"] = f"choose from {DESIGNS}, got {self.designs!r}"
        bad = [a for a in self.architectures if a not in ARCHITECTURES]
        if bad or not self.architectures:
            err["architectures"] = f"choose from {ARCHITECTURES}, got {self.architectures!r}"
        if not any(k in err for k in ("tx_shape", "rx_shape", "n_t_rf", "n_r_rf", "n_streams")):
            n_t = self.tx_shape[0] * self.tx_shape[1]
            n_r = self.rx_shape[0] * self.rx_shape[1]
            if not self.n_streams <= self.n_t_rf <= n_t:
                err["n_t_rf"] = f"need n_streams <= n_t_rf <= {n_t}"
            if not self.n_streams <= self.n_r_rf <= n_r:
                err["n_r_rf"] = f"need n_streams <= n_r_rf <= {n_r}"
        return err

    @property
    def arrays(self) -> ArrayConfig:
        s = self.spacing_wavelengths
        return ArrayConfig(UpaGeometry(*self.tx_shape, spacing=s), UpaGeometry(*self.rx_shape, spacing=s),
                           UpaGeometry(*self.irs_shape, spacing=s))

    @property
    def link(self) -> LinkBudget:
        return LinkBudget.from_dbm(self.p_tx_dbm, self.noise_dbm)

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return {f.name: _jsonable(getattr(self, f.name)) for f in dataclasses.fields(self)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SystemConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError({k: "unknown field" for k in unknown})
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "SystemConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _jsonable(value):
    return list(value) if isinstance(value, tuple) else value


def square_shape(n_elements: int) -> tuple[int, int]:
    g = UpaGeometry.square(int(n_elements))
    return (g.horizontal, g.vertical)


# Sweepable parameters: name -> function(config, value) -> config
SWEEPS = {
    "p_tx_dbm": lambda c, x: c.replace(p_tx_dbm=float(x)),
    "irs_elements": lambda c, x: c.replace(irs_shape=square_shape(int(x))),
    "n_path": lambda c, x: c.replace(n_path=int(x)),
    "angle_range": lambda c, x: c.replace(angle_range=float(x)),
    "estimation_error_deg": lambda c, x: c.replace(estimation_error_deg=float(x)),
    "subcarriers": lambda c, x: c.replace(subcarriers=int(x)),
}


def apply_sweep(config: SystemConfig, param: str, value) -> SystemConfig:
    if param not in SWEEPS:
        raise ConfigError({"sweep": f"unknown sweep parameter {param!r}; choose from {sorted(SWEEPS)}"})
    return SWEEPS[param](config, value)


@dataclass(frozen=True)
class ExperimentSpec:
    """A named sweep: base config overrides plus the swept values."""

    sweep_param: str
    values: tuple
    overrides: dict = field(default_factory=dict)


EXPERIMENTS = {
    "fig2": ExperimentSpec("p_tx_dbm", (20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0)),
    "fig3": ExperimentSpec("irs_elements", (16, 36, 64, 100, 144, 196, 256)),
    "fig4": ExperimentSpec("n_path", (1, 2, 4, 6, 8, 10)),
    "fig6": ExperimentSpec("angle_range", (0.1, 0.25, 0.5, 0.75, 1.0)),
    "fig7": ExperimentSpec("estimation_error_deg", (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)),
    "fig8": ExperimentSpec("p_tx_dbm", (20.0, 30.0, 40.0, 50.0), {"subcarriers": 16}),
    "fig8-k64": ExperimentSpec("p_tx_dbm", (20.0, 30.0, 40.0, 50.0), {"subcarriers": 64}),
}
