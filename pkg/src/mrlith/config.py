"""Run configuration: typed fields, presets and key=value round-tripping."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields, replace

from .errors import ConfigurationError
from .field import WirePair, ZeemanModel
from .io import format_record, read_record
from .noise import NoiseRealization
from .quantum import DephasingParams
from .readout import FretParams
from .sequence import ERASE_MODES, CompileConfig

WORKERS_ENV = "MRL_WORKERS"


@dataclass(frozen=True)
class RunConfig:
    """Every knob of a pipeline run.  ``seed`` has no default on purpose."""

    seed: int
    mode: str = "2d"
    pattern: str = "builtin:atm"
    fov_nm: float = 150.0
    pitch_nm: float = 3.0
    chirp_start_nm: float = 40.0
    chirp_end_nm: float = 20.0
    center_x_nm: float = 0.0
    center_y_nm: float = 0.0
    x_current_a: float = 0.1
    x_separation_um: float = 2.0
    y_current_a: float = 0.1
    y_separation_um: float = 2.0
    gyromagnetic_mhz_per_gauss: float = 2.8
    zero_field_splitting_mhz: float = 2870.0
    t2_us: float = 20.0
    double_quantum_factor: float = 2.0
    fluctuation: float = 0.1
    noise_mode: str = "pulse"
    noise_scope: str = "spin"
    tau_a_us: float = 5.6
    sigma_a_us: float = 1.5
    n_a: int = 7000
    tau_b_us: float = 5.6
    n_b: int = 7000
    tau_1d_us: float = 20.0
    n_1d: int = 7000
    erase_mode: str = "reverse"
    column_order: str = "ascending"
    skip_empty: bool = True
    rabi_ceiling_mhz: float = 10.0
    frame: str = "interaction"
    r0_nm: float = 5.0
    depth_nm: float = 5.0
    readout_contrast: float = 1.0
    surface_pitch_nm: float = 0.0
    resist_threshold: float = 0.5
    workers: int = 1
    out: str = "out"
    write_waveforms: bool = True

    def __post_init__(self):
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.mode not in ("1d", "2d"):
            raise ConfigurationError(f"mode must be '1d' or '2d', got {self.mode!r}")
        positive = ("fov_nm", "pitch_nm", "chirp_start_nm", "chirp_end_nm", "x_current_a", "x_separation_um",
                    "y_current_a", "y_separation_um", "gyromagnetic_mhz_per_gauss", "t2_us", "tau_a_us",
                    "sigma_a_us", "tau_b_us", "tau_1d_us", "rabi_ceiling_mhz", "r0_nm", "readout_contrast",
                    "resist_threshold", "n_a", "n_b", "n_1d", "workers")
        for name in positive:
            v = getattr(self, name)
            if not (v > 0) or (isinstance(v, float) and math.isnan(v)):
                raise ConfigurationError(f"{name} must be positive, got {v!r}")
        for name in ("fluctuation", "depth_nm", "surface_pitch_nm", "double_quantum_factor"):
            if not getattr(self, name) >= 0:
                raise ConfigurationError(f"{name} must be >= 0, got {getattr(self, name)!r}")
        if self.fluctuation >= 1:
            raise ConfigurationError("fluctuation must be below 1 so amplitudes keep their sign")
        if self.readout_contrast > 1:
            raise ConfigurationError("readout_contrast must be <= 1")
        if self.erase_mode not in ERASE_MODES:
            raise ConfigurationError(f"erase_mode must be one of {ERASE_MODES}")
        if self.frame not in ("interaction", "carrier"):
            raise ConfigurationError("frame must be 'interaction' or 'carrier'")
        # remaining enums are validated by the objects built from them
        self.noise()
        self.compile_config()

    # ------------------------------------------------------------ derived objects

    @property
    def zeeman(self):
        return ZeemanModel(self.gyromagnetic_mhz_per_gauss, self.zero_field_splitting_mhz)

    @property
    def x_wires(self):
        return WirePair.centered("x", self.x_separation_um, self.x_current_a)

    @property
    def y_wires(self):
        return WirePair.centered("y", self.y_separation_um, self.y_current_a)

    def compile_config(self):
        return CompileConfig(
            x_wires=self.x_wires, y_wires=self.y_wires, zeeman=self.zeeman,
            center_nm=(self.center_x_nm, self.center_y_nm),
            tau_a=self.tau_a_us, sigma_a=self.sigma_a_us, n_a=self.n_a, tau_b=self.tau_b_us, n_b=self.n_b,
            erase_mode=self.erase_mode, column_order=self.column_order, skip_empty=self.skip_empty,
            rabi_ceiling=self.rabi_ceiling_mhz,
        )

    def dephasing(self):
        return DephasingParams(self.t2_us, self.double_quantum_factor)

    def noise(self):
        return NoiseRealization(self.seed, self.fluctuation, self.noise_mode, self.noise_scope)

    def fret(self):
        return FretParams(self.r0_nm, self.depth_nm, self.readout_contrast)

    @property
    def surface_pitch(self):
        return self.surface_pitch_nm if self.surface_pitch_nm > 0 else self.pitch_nm / 3.0

    # ------------------------------------------------------------ records

    def to_record(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def echo(self):
        return format_record(self.to_record())

    def with_overrides(self, **kw):
        return replace(self, **kw)


_FIELDS = {f.name: f for f in fields(RunConfig)}


def _convert(name, text):
    kind = _FIELDS[name].type
    try:
        if kind == "int":
            return int(text, 0)
        if kind == "float":
            return float(text)
        if kind == "bool":
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
    except ValueError:
        raise ConfigurationError(f"config key {name}: cannot parse {text!r} as {kind}") from None
    return text


PRESETS = {
    # chirped grating in a single 20 us multi-tone pulse, 50 mA wires
    "grating1d": dict(mode="1d", pattern="builtin:grating", pitch_nm=1.0, fov_nm=150.0,
                      x_current_a=0.05, y_current_a=0.05, t2_us=20.0, fluctuation=0.1),
    # T on a 9 x 9 lattice
    "t2d": dict(mode="2d", pattern="builtin:t", pitch_nm=3.0, t2_us=20.0, fluctuation=0.1),
    "t2d_ideal": dict(mode="2d", pattern="builtin:t", pitch_nm=3.0, t2_us=math.inf, fluctuation=0.0),
    # full logo at 100 mA
    "atm2d": dict(mode="2d", pattern="builtin:atm", pitch_nm=3.0, x_current_a=0.1, y_current_a=0.1,
                  t2_us=20.0, fluctuation=0.1),
    # emitter materials; only the readout contrast differs
    "nv": dict(readout_contrast=0.3),
    "siv": dict(readout_contrast=1.0),
    "st1": dict(readout_contrast=0.5),
}


def build_config(record=None, presets=(), **overrides):
    """Defaults, then presets in order, then ``record`` entries, then keyword overrides."""
    values = {}
    record = dict(record or {})
    for name in list(presets) + [p.strip() for p in record.pop("preset", "").split(",") if p.strip()]:
        if name not in PRESETS:
            raise ConfigurationError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
        values.update(PRESETS[name])
    for key, text in record.items():
        if key not in _FIELDS:
            raise ConfigurationError(f"unknown config key {key!r}")
        values[key] = _convert(key, text)
    values.update({k: v for k, v in overrides.items() if v is not None})
    if "seed" not in values:
        raise ConfigurationError("a seed is required (config key 'seed' or --seed)")
    if "workers" not in values and os.environ.get(WORKERS_ENV):
        values["workers"] = _convert("workers", os.environ[WORKERS_ENV])
    return RunConfig(**values)


def load_config(path=None, presets=(), **overrides):
    return build_config(read_record(path) if path else {}, presets, **overrides)
