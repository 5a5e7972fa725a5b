"""Gradient fields of parallel wire pairs and the Zeeman detunings they imprint.

Two parallel line currents in the same direction produce a field that
vanishes at their midpoint and grows almost linearly between them; this
module treats the component parallel to the bias field as a scalar.
Positions along the gradient axis are in um, matching how wire layouts are
specified; everything downstream of :func:`detuning_at` is in MHz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .units import (
    GYROMAGNETIC_MHZ_PER_GAUSS,
    MU0_OVER_2PI,
    NM_PER_UM,
    tesla_to_gauss,
)

_M_PER_UM = 1.0e-6


@dataclass(frozen=True)
class WirePair:
    """Two equal, co-directed line currents bounding the field of view.

    ``polarity`` is the sign toggle used for the negative-gradient steps.
    """

    axis: str = "x"
    wire_positions: tuple[float, float] = (-1.0, 1.0)
    current: float = 0.05
    polarity: int = 1

    def __post_init__(self):
        if self.axis not in ("x", "y"):
            raise ConfigurationError(f"wire axis must be 'x' or 'y', got {self.axis!r}")
        x1, x2 = self.wire_positions
        if not (math.isfinite(x1) and math.isfinite(x2)) or x1 == x2:
            raise ConfigurationError(f"wire positions must be distinct and finite, got {self.wire_positions}")
        if not self.current > 0:
            raise ConfigurationError(f"wire current must be positive, got {self.current}")
        if self.polarity not in (1, -1):
            raise ConfigurationError(f"polarity must be +1 or -1, got {self.polarity}")
        if x1 > x2:
            object.__setattr__(self, "wire_positions", (x2, x1))

    @classmethod
    def centered(cls, axis="x", separation_um=2.0, current=0.05, center_um=0.0):
        half = 0.5 * separation_um
        return cls(axis, (center_um - half, center_um + half), current)

    @property
    def midpoint(self):
        return 0.5 * (self.wire_positions[0] + self.wire_positions[1])

    @property
    def separation(self):
        return self.wire_positions[1] - self.wire_positions[0]

    def flipped(self):
        return WirePair(self.axis, self.wire_positions, self.current, -self.polarity)

    def with_polarity(self, polarity):
        return WirePair(self.axis, self.wire_positions, self.current, polarity)

    def contains(self, x_um, margin=0.0):
        """True where ``x_um`` lies inside the gap, shrunk by ``margin`` of the half-gap."""
        half = 0.5 * self.separation * (1.0 - margin)
        return np.abs(np.asarray(x_um, dtype=float) - self.midpoint) < half


@dataclass(frozen=True)
class ZeemanModel:
    gyromagnetic_factor: float = GYROMAGNETIC_MHZ_PER_GAUSS
    zero_field_splitting: float = 2870.0

    def __post_init__(self):
        if not self.gyromagnetic_factor > 0:
            raise ConfigurationError("gyromagnetic factor must be positive")


@dataclass(frozen=True)
class ResolutionQuery:
    linewidth: float
    zeeman_gradient: float

    def __post_init__(self):
        if self.linewidth < 0 or self.zeeman_gradient < 0:
            raise DomainError("linewidth and Zeeman gradient must be non-negative")


def wire_field(x, wires: WirePair):
    """Field in Gauss at ``x`` (um) along the gradient axis.

    Odd about the midpoint and increasing across the gap for polarity +1.
    Raises DomainError for any point outside the open inter-wire gap.
    """
    x = np.asarray(x, dtype=float)
    x1, x2 = wires.wire_positions
    if np.any((x <= x1) | (x >= x2)):
        raise DomainError(f"position outside the wire gap ({x1}, {x2}) um; the line-current field is singular there")
    d1 = (x - x1) * _M_PER_UM
    d2 = (x - x2) * _M_PER_UM
    b = -wires.polarity * tesla_to_gauss(MU0_OVER_2PI * wires.current * (1.0 / d1 + 1.0 / d2))
    return b if b.ndim else float(b)


def midpoint_gradient(wires: WirePair):
    """Closed-form dB/dx at the midpoint, Gauss/um: 2 k I / r^2 with r the half-gap."""
    r_m = 0.5 * wires.separation * _M_PER_UM
    return wires.polarity * tesla_to_gauss(2.0 * MU0_OVER_2PI * wires.current / r_m**2) * _M_PER_UM


def field_gradient(x, wires: WirePair, step=1e-4):
    """Central-difference dB/dx in Gauss/um (step in um)."""
    x = np.asarray(x, dtype=float)
    return (wire_field(x + step, wires) - wire_field(x - step, wires)) / (2.0 * step)


def detuning_at(x, wires: WirePair, zeeman: ZeemanModel = ZeemanModel()):
    """Rotating-frame detuning in cyclic MHz at ``x`` (um)."""
    return zeeman.gyromagnetic_factor * wire_field(x, wires)


def transition_frequency(x, wires: WirePair, zeeman: ZeemanModel = ZeemanModel()):
    """Lab-frame transition frequency in MHz, the carrier plus the local shift."""
    return zeeman.zero_field_splitting + detuning_at(x, wires, zeeman)


def zeeman_gradient(gradient_gauss_per_um, zeeman: ZeemanModel = ZeemanModel()):
    """Convert a field gradient in Gauss/um to a detuning gradient in MHz/nm."""
    return zeeman.gyromagnetic_factor * gradient_gauss_per_um / NM_PER_UM


def linewidth_from_t2(t2_us):
    """Lorentzian full width 1/(pi T2) in MHz; zero for T2 = inf."""
    if not t2_us > 0:
        raise DomainError(f"T2 must be positive, got {t2_us}")
    return 1.0 / (math.pi * t2_us)


def resolution_limit(q: ResolutionQuery):
    """Narrowest writable line in nm: linewidth over detuning gradient."""
    if not q.zeeman_gradient > 0:
        raise DomainError("resolution limit needs a positive Zeeman gradient")
    return q.linewidth / q.zeeman_gradient
