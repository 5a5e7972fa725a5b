"""Gradient + pulse schedules that write 1D profiles and 2D pixel patterns.

A 2D pattern is written one column at a time with four steps:

    A   narrowband pi pulse on |-1> <-> |0>, X gradient on: the column goes to |0>
    B   multi-tone pulse on |0> <-> |+1>, Y gradient on: pattern rows go to |+1>
    -A  erase of A: unselected rows of the column return to |-1>
    -B  erase of B: the parked rows come back to |0>

leaving the column's pattern in the bright state and every other spin
where it was.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, ResolvabilityError
from .field import WirePair, ZeemanModel, detuning_at
from .lattice import GAP_FILL, axis_positions
from .pulses import (
    DEFAULT_RABI_CEILING,
    PatternProfile,
    Pulse,
    gaussian_pi_pulse,
    gaussian_spectral_fwhm,
    mirror_pulse,
    negate_pulse,
    pattern_to_spectrum,
    resonant_tone,
    spectrum_to_waveform,
)
from .quantum import pure_state
from .units import nm_to_um

# How the erase steps (-A, -B) are built:
#   reverse        negated, spectrally mirrored pulse under the flipped gradient;
#                  this is the exact time-reversed inverse of the forward step
#   literal        negated samples under the flipped gradient
#   same_gradient  negated samples with the forward gradient
ERASE_MODES = ("reverse", "literal", "same_gradient")

# A column pulse's spectral FWHM may use at most this fraction of the column spacing.
COLUMN_BANDWIDTH_FILL = 0.8


@dataclass(frozen=True)
class PatternGrid:
    """Per-pixel targets; ``values[row, col]`` with ``height`` rows along y."""

    values: np.ndarray
    pitch: float = 3.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ConfigurationError(f"pattern grid must be a non-empty 2D array, got shape {v.shape}")
        if not np.all(np.isfinite(v)) or np.any((v < 0) | (v > 1)):
            raise DomainError("pattern values must lie in [0, 1]")
        if not self.pitch > 0:
            raise ConfigurationError("pattern pitch must be positive")
        object.__setattr__(self, "values", v)

    @property
    def width(self):
        return self.values.shape[1]

    @property
    def height(self):
        return self.values.shape[0]

    def x_positions(self, center=0.0):
        return axis_positions(self.width, self.pitch, center)

    def y_positions(self, center=0.0):
        return axis_positions(self.height, self.pitch, center)

    def column(self, j, center=0.0):
        return PatternProfile(self.y_positions(center), self.values[:, j])

    def nonempty_columns(self):
        return [j for j in range(self.width) if np.any(self.values[:, j] > 0)]


@dataclass(frozen=True)
class SequenceStep:
    x_gradient: int
    y_gradient: int
    pulse: Pulse

    def __post_init__(self):
        if self.x_gradient not in (-1, 0, 1) or self.y_gradient not in (-1, 0, 1):
            raise ConfigurationError("gradient settings must be -1, 0 or +1")
        if self.pulse.samples.size and (self.x_gradient != 0) == (self.y_gradient != 0):
            raise ConfigurationError("exactly one gradient must be on while a pulse plays")

    @property
    def duration(self):
        return self.pulse.duration


@dataclass(frozen=True)
class PulseSequence:
    steps: tuple = ()
    initial_level: int = -1
    skipped_columns: tuple = ()

    @property
    def total_duration(self):
        return float(sum(s.duration for s in self.steps))

    @property
    def initial_state(self):
        return pure_state(self.initial_level)

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True)
class CompileConfig:
    """Wires, timings and synthesis options for both compilers."""

    x_wires: WirePair = field(default_factory=lambda: WirePair.centered("x", 2.0, 0.1))
    y_wires: WirePair = field(default_factory=lambda: WirePair.centered("y", 2.0, 0.1))
    zeeman: ZeemanModel = field(default_factory=ZeemanModel)
    center_nm: tuple = (0.0, 0.0)
    tau_a: float = 5.6
    sigma_a: float = 1.5
    n_a: int = 7000
    tau_b: float = 5.6
    n_b: int = 7000
    erase_mode: str = "reverse"
    column_order: str = "ascending"
    skip_empty: bool = True
    rabi_ceiling: float = DEFAULT_RABI_CEILING

    def __post_init__(self):
        if self.erase_mode not in ERASE_MODES:
            raise ConfigurationError(f"erase mode must be one of {ERASE_MODES}, got {self.erase_mode!r}")
        if self.column_order not in ("ascending", "descending"):
            raise ConfigurationError(f"column order must be ascending or descending, got {self.column_order!r}")


def _check_fit(positions_nm, wires, label):
    half = 0.5 * wires.separation * GAP_FILL
    if np.any(np.abs(nm_to_um(positions_nm) - wires.midpoint) >= half):
        raise ConfigurationError(f"pattern extent along {label} does not fit the wire gap with a 10% margin")


def erase_step(step: SequenceStep, mode):
    """The step that undoes ``step`` under the chosen erase convention."""
    if mode == "reverse":
        return SequenceStep(-step.x_gradient, -step.y_gradient, negate_pulse(mirror_pulse(step.pulse)))
    if mode == "literal":
        return SequenceStep(-step.x_gradient, -step.y_gradient, negate_pulse(step.pulse))
    return SequenceStep(step.x_gradient, step.y_gradient, negate_pulse(step.pulse))


def compile_1d(profile: PatternProfile, cfg: CompileConfig, tau=20.0, n_steps=7000, empty_as_zero_pulse=True):
    """Single +X step whose multi-tone channel-1 pulse writes ``profile``."""
    if cfg.x_wires.polarity != 1:
        raise ConfigurationError("compile with the +X wire pair; polarity is set per step")
    _check_fit(profile.positions, cfg.x_wires, "x")
    if not np.any(profile.values > 0) and not empty_as_zero_pulse:
        return PulseSequence()
    spectrum = pattern_to_spectrum(profile, cfg.x_wires, cfg.zeeman, tau, channel=1)
    pulse = spectrum_to_waveform(spectrum, tau, n_steps, channel=1, label="B", rabi_ceiling=cfg.rabi_ceiling)
    return PulseSequence((SequenceStep(1, 0, pulse),))


def column_detunings(grid: PatternGrid, cfg: CompileConfig):
    xs = grid.x_positions(cfg.center_nm[0])
    return np.atleast_1d(detuning_at(nm_to_um(xs), cfg.x_wires, cfg.zeeman))


def check_column_resolvability(grid: PatternGrid, cfg: CompileConfig):
    """Raise if the column pulse bandwidth overlaps adjacent columns."""
    det = column_detunings(grid, cfg)
    if det.size < 2:
        return
    fwhm = gaussian_spectral_fwhm(cfg.sigma_a)
    spacing = np.abs(np.diff(det))
    bad = np.nonzero(fwhm > COLUMN_BANDWIDTH_FILL * spacing)[0]
    if bad.size:
        pairs = ", ".join(f"{j}-{j + 1}" for j in bad[:8])
        raise ResolvabilityError(
            f"pulse A bandwidth {fwhm:.3g} MHz exceeds {COLUMN_BANDWIDTH_FILL} x column spacing "
            f"(min {spacing.min():.3g} MHz) for columns {pairs}"
        )


def compile_2d(grid: PatternGrid, cfg: CompileConfig):
    """Four steps (A, B, -A, -B) per non-empty column, left to right by default."""
    if cfg.x_wires.polarity != 1 or cfg.y_wires.polarity != 1:
        raise ConfigurationError("compile with +X/+Y wire pairs; polarity is set per step")
    _check_fit(grid.x_positions(cfg.center_nm[0]), cfg.x_wires, "x")
    _check_fit(grid.y_positions(cfg.center_nm[1]), cfg.y_wires, "y")
    check_column_resolvability(grid, cfg)

    det = column_detunings(grid, cfg)
    columns = grid.nonempty_columns() if cfg.skip_empty else list(range(grid.width))
    skipped = tuple(j for j in range(grid.width) if j not in columns)
    if cfg.column_order == "descending":
        columns = columns[::-1]

    steps = []
    for j in columns:
        a = gaussian_pi_pulse(resonant_tone(det[j], 1), cfg.sigma_a, cfg.tau_a, cfg.n_a, channel=1,
                              label=f"A{j}", rabi_ceiling=cfg.rabi_ceiling)
        # the erase pair squares a partial B rotation, so encode sqrt(f)
        col = grid.column(j, cfg.center_nm[1])
        col = PatternProfile(col.positions, np.sqrt(col.values))
        spectrum = pattern_to_spectrum(col, cfg.y_wires, cfg.zeeman, cfg.tau_b, channel=2, drop_zero=True)
        b = spectrum_to_waveform(spectrum, cfg.tau_b, cfg.n_b, channel=2, label=f"B{j}",
                                 rabi_ceiling=cfg.rabi_ceiling)
        step_a = SequenceStep(1, 0, a)
        step_b = SequenceStep(0, 1, b)
        steps += [step_a, step_b, erase_step(step_a, cfg.erase_mode), erase_step(step_b, cfg.erase_mode)]
    return PulseSequence(tuple(steps), -1, skipped)


@dataclass(frozen=True)
class ScheduleReport:
    steps: int = 0
    duration_us: float = 0.0
    energy_ch1: float = 0.0
    energy_ch2: float = 0.0
    x_duty: float = 0.0
    y_duty: float = 0.0
    skipped_columns: int = 0

    def as_dict(self):
        return dict(self.__dict__)


def schedule_report(seq: PulseSequence):
    """Totals over the step list; duty is the fraction of time each gradient is on."""
    if not seq.steps:
        return ScheduleReport(skipped_columns=len(seq.skipped_columns))
    duration = seq.total_duration
    energy = {1: 0.0, 2: 0.0}
    x_on = y_on = 0.0
    for s in seq.steps:
        energy[s.pulse.channel] += s.pulse.energy
        if s.x_gradient:
            x_on += s.duration
        if s.y_gradient:
            y_on += s.duration
    return ScheduleReport(
        steps=len(seq.steps),
        duration_us=duration,
        energy_ch1=energy[1],
        energy_ch2=energy[2],
        x_duty=x_on / duration if duration else 0.0,
        y_duty=y_on / duration if duration else 0.0,
        skipped_columns=len(seq.skipped_columns),
    )


def per_column_duration(seq: PulseSequence):
    """Mean duration of one written column (4 steps)."""
    if not seq.steps:
        return 0.0
    return seq.total_duration / (len(seq.steps) / 4)
