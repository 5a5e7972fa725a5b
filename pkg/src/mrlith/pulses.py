"""Microwave drive synthesis.

Two kinds of waveform are built here: narrowband Gaussian pi pulses that
select one gradient slice, and multi-tone pulses whose spectrum places one
line on every target position with the Rabi amplitude that leaves the
requested excitation behind.  Waveforms are sampled at interval midpoints
with the phase reference at the pulse center, so a pulse with real line
amplitudes satisfies ``samples[::-1] == samples.conj()``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, DomainError, ParseError
from .field import WirePair, ZeemanModel, detuning_at
from .units import TWO_PI, nm_to_um

DEFAULT_RABI_CEILING = 10.0
WAVEFORM_HEADER = ("t_us", "re_MHz", "im_MHz")


@dataclass(frozen=True, eq=False)
class Pulse:
    """Complex Rabi envelope (cyclic MHz) on one transition channel.

    Channel 1 drives |-1> <-> |0>, channel 2 drives |0> <-> |+1>.  Sample
    ``n`` is held over ``[n dt, (n + 1) dt)``.
    """

    channel: int
    samples: np.ndarray
    dt: float
    label: str = ""

    def __post_init__(self):
        if self.channel not in (1, 2):
            raise ConfigurationError(f"pulse channel must be 1 or 2, got {self.channel}")
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim != 1:
            raise ConfigurationError("pulse samples must be one-dimensional")
        if not np.all(np.isfinite(samples)):
            raise ConfigurationError(f"pulse {self.label!r} has non-finite samples")
        if not self.dt > 0:
            raise ConfigurationError(f"pulse sample spacing must be positive, got {self.dt}")
        object.__setattr__(self, "samples", samples)

    @property
    def n_steps(self):
        return self.samples.size

    @property
    def duration(self):
        return self.samples.size * self.dt

    @property
    def times(self):
        """Sample start times in us."""
        return np.arange(self.samples.size) * self.dt

    @property
    def peak(self):
        return float(np.max(np.abs(self.samples))) if self.samples.size else 0.0

    @property
    def energy(self):
        """Integral of |Omega|^2 dt, MHz^2 us."""
        return float(np.sum(np.abs(self.samples) ** 2) * self.dt)

    @property
    def area(self):
        """Integral of 2 pi |Omega| dt in rad."""
        return float(TWO_PI * np.sum(np.abs(self.samples)) * self.dt)

    def equals(self, other):
        return (self.channel == other.channel and self.dt == other.dt and self.label == other.label
                and np.array_equal(self.samples, other.samples))


@dataclass(frozen=True)
class PatternProfile:
    """Target excitation probabilities ``values`` at ``positions`` (nm)."""

    positions: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        pos = np.atleast_1d(np.asarray(self.positions, dtype=float))
        val = np.atleast_1d(np.asarray(self.values, dtype=float))
        if pos.shape != val.shape:
            raise ConfigurationError("profile positions and values differ in length")
        if pos.size > 1 and np.any(np.diff(pos) <= 0):
            raise ConfigurationError("profile positions must be strictly increasing")
        if np.any((val < 0) | (val > 1)) or not np.all(np.isfinite(val)):
            raise DomainError("profile values must lie in [0, 1]")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "values", val)


def sample_times(duration, n_steps):
    """Midpoint times relative to the pulse center."""
    dt = duration / n_steps
    return (np.arange(n_steps) + 0.5 - 0.5 * n_steps) * dt


def resonant_tone(detuning, channel):
    """Drive frequency offset (MHz) that is resonant with a spin whose
    Hamiltonian detuning on ``channel`` is ``detuning``.

    The drive enters above the diagonal, so the |-1> level (row 0) sees the
    conjugate phase: channel 1 resonates at ``-detuning``.
    """
    return -detuning if channel == 1 else detuning


def excitation_probability(omega, tau):
    """Bright-state probability after a resonant drive of ``omega`` for ``tau``."""
    return 0.5 * (1.0 - np.cos(TWO_PI * np.asarray(omega) * tau))


def invert_rabi(f, tau):
    """Rabi frequency (cyclic MHz) leaving probability ``f`` after ``tau`` us."""
    f_arr = np.asarray(f, dtype=float)
    if np.any((f_arr < 0) | (f_arr > 1)) or not np.all(np.isfinite(f_arr)):
        raise DomainError(f"excitation probability must lie in [0, 1], got {f}")
    if not tau > 0:
        raise DomainError(f"pulse duration must be positive, got {tau}")
    out = np.arccos(1.0 - 2.0 * f_arr) / (TWO_PI * tau)
    return float(out) if out.ndim == 0 else out


def pattern_to_spectrum(profile: PatternProfile, wires: WirePair, zeeman: ZeemanModel, tau,
                        channel=1, drop_zero=False):
    """One (tone MHz, amplitude MHz) line per profile sample.

    Tones are the drive offsets resonant with each position's detuning.
    """
    detunings = np.atleast_1d(detuning_at(nm_to_um(profile.positions), wires, zeeman))
    if detunings.size > 1:
        steps = np.diff(detunings)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise ConfigurationError("detuning is not monotone across the profile; positions cannot be addressed")
    amplitudes = np.atleast_1d(invert_rabi(profile.values, tau))
    tones = resonant_tone(detunings, channel)
    lines = [(float(nu), float(a)) for nu, a in zip(tones, amplitudes)]
    if drop_zero:
        lines = [line for line in lines if line[1] != 0.0]
    return lines


def required_steps(spectrum, tau):
    """Twice the Nyquist sample count for the highest tone."""
    if not spectrum:
        return 1
    top = max(abs(nu) for nu, _ in spectrum)
    return max(1, math.ceil(2.0 * (2.0 * top * tau)))


def spectrum_to_waveform(spectrum, tau, n_steps, channel=1, label="B", rabi_ceiling=DEFAULT_RABI_CEILING):
    """Sum of tones ``a exp(i 2 pi nu (t - tau/2))`` sampled at ``n_steps`` midpoints."""
    if not tau > 0 or n_steps < 1:
        raise ConfigurationError("waveform needs a positive duration and at least one step")
    need = required_steps(spectrum, tau)
    if n_steps < need:
        raise ConfigurationError(f"{n_steps} steps undersample the spectrum; need n_steps >= {need}")
    t = sample_times(tau, n_steps)
    samples = np.zeros(n_steps, dtype=complex)
    for nu, a in spectrum:
        if a != 0.0:
            samples += a * np.exp(1j * TWO_PI * nu * t)
    pulse = Pulse(channel, samples, tau / n_steps, label)
    _check_ceiling(pulse, rabi_ceiling)
    return pulse


def gaussian_envelope(sigma, total_duration, n_steps):
    t = sample_times(total_duration, n_steps)
    return np.exp(-0.5 * (t / sigma) ** 2)


def gaussian_spectral_fwhm(sigma):
    """FWHM (MHz) of the amplitude spectrum of exp(-t^2 / 2 sigma^2)."""
    return math.sqrt(2.0 * math.log(2.0)) / (math.pi * sigma)


def gaussian_pi_pulse(center_detuning, sigma, total_duration, n_steps, channel=1, label="A",
                      area=math.pi, rabi_ceiling=DEFAULT_RABI_CEILING):
    """Truncated Gaussian pulse at drive offset ``center_detuning`` (MHz).

    The amplitude is normalized on the sampled envelope so that
    ``sum(2 pi |Omega| dt) == area``.
    """
    if not sigma > 0:
        raise ConfigurationError(f"Gaussian width must be positive, got {sigma}")
    if total_duration < 3.0 * sigma:
        raise ConfigurationError(
            f"total duration {total_duration} us truncates a sigma={sigma} us Gaussian; need >= {3 * sigma} us"
        )
    if n_steps < 1:
        raise ConfigurationError("pulse needs at least one step")
    dt = total_duration / n_steps
    t = sample_times(total_duration, n_steps)
    env = gaussian_envelope(sigma, total_duration, n_steps)
    amp = area / (TWO_PI * np.sum(env) * dt)
    samples = amp * env * np.exp(1j * TWO_PI * center_detuning * t)
    pulse = Pulse(channel, samples, dt, label)
    _check_ceiling(pulse, rabi_ceiling)
    return pulse


def _check_ceiling(pulse, ceiling):
    if ceiling is not None and pulse.peak > ceiling:
        raise ConfigurationError(
            f"pulse {pulse.label!r} peaks at {pulse.peak:.4g} MHz, above the {ceiling:g} MHz Rabi ceiling"
        )


def _negated_label(label):
    if label.startswith("-"):
        return label[1:]
    return "-" + label if label else label


def negate_pulse(p: Pulse):
    return Pulse(p.channel, -p.samples, p.dt, _negated_label(p.label))


def mirror_pulse(p: Pulse):
    """Reflect the spectrum about the carrier (complex conjugate envelope).

    For a center-referenced pulse with real line amplitudes this is also
    its time reversal.
    """
    return Pulse(p.channel, p.samples.conj(), p.dt, p.label)


def apply_amplitude_noise(p: Pulse, fluctuation, rng: np.random.Generator, per_sample=False):
    """Scale by ``1 + u``, ``u ~ U[-fluctuation, fluctuation]``, once per pulse
    (or independently per sample)."""
    if fluctuation < 0:
        raise ConfigurationError(f"amplitude fluctuation must be >= 0, got {fluctuation}")
    if fluctuation == 0:
        return p
    size = p.samples.size if per_sample else None
    factor = 1.0 + fluctuation * (2.0 * rng.random(size) - 1.0)
    return replace(p, samples=p.samples * factor)


def export_waveform(p: Pulse):
    """Header row followed by (t_us, Re, Im) rows."""
    rows = [WAVEFORM_HEADER]
    for t, s in zip(p.times, p.samples):
        rows.append((repr(float(t)), repr(float(s.real)), repr(float(s.imag))))
    return rows


def write_waveform(p: Pulse, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(export_waveform(p))


def read_waveform(path, channel=1, label="", dt=None):
    """Inverse of :func:`write_waveform`; ``dt`` is required for pulses shorter than two samples."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != WAVEFORM_HEADER:
        raise ParseError(f"{path}: expected waveform header {','.join(WAVEFORM_HEADER)}", line=1)
    times = []
    samples = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise ParseError(f"{path}: expected 3 columns", line=lineno)
        try:
            t, re, im = (float(v) for v in row)
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}", line=lineno) from None
        times.append(t)
        samples.append(complex(re, im))
    if dt is None:
        if len(times) < 2:
            raise ParseError(f"{path}: cannot infer the sample spacing of a {len(times)}-sample waveform")
        dt = times[1] - times[0]
    return Pulse(channel, np.array(samples, dtype=complex), dt, label)
