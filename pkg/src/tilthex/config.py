"""Single-file YAML configuration for the whole lab.

One document holds vehicle parameters, actuator geometry, OCP weights and
bounds, solver settings, adaptive-layer and estimator tuning, PID gains,
the reference trajectory, and simulation options. Every key has a default;
a config file only needs the keys it overrides. See the README for the
documented key set.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from .allocation import ActuatorGeometry
from .ekf import EkfConfig
from .l1 import L1Config
from .nmpc import ConstraintSet, OcpWeights, SolverConfig
from .pid import PidGains
from .trajectory import TrajectorySpec
from .vehicle import VehicleParams


@dataclass
class SimConfig:
    """Closed-loop simulation options."""

    control_rate: float = 100.0
    plant_dt: float = 1e-3
    use_allocation: bool = True
    allocation_mismatch: bool = False
    force_max: np.ndarray = field(default_factory=lambda: np.array([80.0, 80.0, 100.0]))
    torque_max: np.ndarray = field(default_factory=lambda: np.full(3, 20.0))
    com_shift: np.ndarray = field(default_factory=lambda: np.full(3, 0.01))
    meas_noise: np.ndarray = field(default_factory=lambda: np.zeros(12))
    rmse_skip: float = 0.0
    divergence_radius: float = 50.0
    backup_enabled: bool = True
    backup_recover_steps: int = 10
    backup_error_radius: float = 10.0
    use_jit_plant: bool = True

    def __post_init__(self):
        self.force_max = np.asarray(self.force_max, dtype=float)
        self.torque_max = np.asarray(self.torque_max, dtype=float)
        self.com_shift = np.asarray(self.com_shift, dtype=float)
        self.meas_noise = np.asarray(self.meas_noise, dtype=float)
        period = 1.0 / self.control_rate
        ratio = period / self.plant_dt
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("control period must be a multiple of plant_dt")

    @property
    def control_period(self) -> float:
        return 1.0 / self.control_rate

    @property
    def substeps(self) -> int:
        return round(self.control_period / self.plant_dt)

    @property
    def wrench_envelope(self) -> np.ndarray:
        return np.concatenate([self.force_max, self.torque_max])


@dataclass
class SweepConfig:
    groups: tuple = ("A", "B", "C", "D")
    controllers: tuple = ("nominal", "l1", "ekf")
    periods: tuple = (15.0, 20.0, 30.0)
    duration: float | None = None  # defaults to one trajectory period


@dataclass
class LabConfig:
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    geometry: ActuatorGeometry = field(default_factory=ActuatorGeometry)
    weights: OcpWeights = field(default_factory=OcpWeights.from_blocks)
    constraints: ConstraintSet = field(default_factory=ConstraintSet.defaults)
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(max_iters=2))
    l1: L1Config = field(default_factory=L1Config)
    ekf: EkfConfig = field(default_factory=EkfConfig)
    pid: PidGains = field(default_factory=PidGains)
    trajectory: TrajectorySpec = field(default_factory=TrajectorySpec)
    sim: SimConfig = field(default_factory=SimConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)


def default_config() -> LabConfig:
    cfg = LabConfig()
    cfg.vehicle.geometry = cfg.geometry
    return cfg


_SECTION_TYPES = {
    "vehicle": VehicleParams,
    "geometry": ActuatorGeometry,
    "weights": OcpWeights,
    "constraints": ConstraintSet,
    "solver": SolverConfig,
    "l1": L1Config,
    "ekf": EkfConfig,
    "pid": PidGains,
    "trajectory": TrajectorySpec,
    "sim": SimConfig,
    "sweep": SweepConfig,
}

# constructor-only dataclass fields (everything else is derived state)
_SKIP_FIELDS = {"geometry"}


def _plain(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def to_dict(cfg: LabConfig) -> dict:
    out = {}
    for section, cls in _SECTION_TYPES.items():
        obj = getattr(cfg, section)
        sec = {}
        for f in fields(cls):
            if not f.init or f.name in _SKIP_FIELDS:
                continue
            sec[f.name] = _plain(getattr(obj, f.name))
        out[section] = sec
    return out


def from_dict(data: dict) -> LabConfig:
    cfg = LabConfig()
    data = data or {}
    unknown = set(data) - set(_SECTION_TYPES)
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    for section, cls in _SECTION_TYPES.items():
        if section not in data:
            continue
        overrides = data[section] or {}
        names = {f.name for f in fields(cls) if f.init and f.name not in _SKIP_FIELDS}
        bad = set(overrides) - names
        if bad:
            raise ValueError(f"unknown keys in [{section}]: {sorted(bad)}")
        base = {name: getattr(getattr(cfg, section), name) for name in names}
        base.update(overrides)
        if cls in (SweepConfig,):
            for key in ("groups", "controllers", "periods"):
                if key in base and base[key] is not None:
                    base[key] = tuple(base[key])
        setattr(cfg, section, cls(**base))
    cfg.vehicle.geometry = cfg.geometry
    return cfg


def load_config(path: str | Path | None) -> LabConfig:
    """Load a YAML config; None or a missing 'null' document gives defaults."""
    if path is None:
        cfg = LabConfig()
        cfg.vehicle.geometry = cfg.geometry
        return cfg
    with open(path) as fh:
        data = yaml.safe_load(fh)
    return from_dict(data)


def save_config(cfg: LabConfig, path: str | Path):
    with open(path, "w") as fh:
        yaml.safe_dump(to_dict(cfg), fh, sort_keys=True)
