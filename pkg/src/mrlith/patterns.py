"""Built-in target patterns."""

from __future__ import annotations

from importlib import resources

import numpy as np

from .errors import ConfigurationError
from .io import load_pattern, parse_ascii_pattern
from .lattice import axis_positions
from .sequence import PatternGrid


def chirped_grating(fov_nm=150.0, pitch_nm=1.0, period_start=40.0, period_end=20.0):
    """Binary 1D grating whose period changes linearly across the field of view.

    Returned as a single-row grid; the first line is centered on the left edge.
    """
    if not (fov_nm > 0 and pitch_nm > 0 and period_start > 0 and period_end > 0):
        raise ConfigurationError("grating dimensions and periods must be positive")
    n = int(round(fov_nm / pitch_nm)) + 1
    s = axis_positions(n, pitch_nm) - axis_positions(n, pitch_nm)[0]
    length = s[-1] if n > 1 else 1.0
    if period_end == period_start:
        cycles = s / period_start
    else:
        slope = (period_end - period_start) / length
        cycles = np.log1p(slope * s / period_start) / slope
    return PatternGrid((np.cos(2 * np.pi * cycles) >= 0).astype(float)[None, :], pitch_nm)


def letter_t(size=9, pitch_nm=3.0):
    """A T made of 3x3 blocks: full-width top bar, one-block stem."""
    if size % 3 or size < 3:
        raise ConfigurationError("letter size must be a positive multiple of 3")
    b = size // 3
    g = np.zeros((size, size))
    g[:b, :] = 1.0
    g[b:, b:2 * b] = 1.0
    return PatternGrid(g, pitch_nm)


def atm_logo(pitch_nm=3.0):
    """24 x 60 pixel "ATM" fixture (letters stacked along y)."""
    text = resources.files("mrlith").joinpath("data/atm.txt").read_text(encoding="ascii")
    return parse_ascii_pattern(text, pitch_nm, "atm.txt")


BUILTINS = ("grating", "t", "atm")


def resolve_pattern(source, pitch_nm, fov_nm=150.0, chirp=(40.0, 20.0)):
    """``builtin:<name>`` or a file path."""
    if source.startswith("builtin:"):
        name = source.split(":", 1)[1]
        if name == "grating":
            return chirped_grating(fov_nm, pitch_nm, *chirp)
        if name == "t":
            return letter_t(9, pitch_nm)
        if name == "atm":
            return atm_logo(pitch_nm)
        raise ConfigurationError(f"unknown built-in pattern {name!r}; choose from {', '.join(BUILTINS)}")
    return load_pattern(source, pitch_nm)
