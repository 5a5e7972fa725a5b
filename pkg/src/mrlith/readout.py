"""FRET-delivered surface dose, resist thresholding and pattern metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, MeasurementError


@dataclass(frozen=True)
class FretParams:
    r0: float = 5.0
    emitter_depth: float = 5.0
    readout_contrast: float = 1.0

    def __post_init__(self):
        if not self.r0 > 0:
            raise ConfigurationError(f"FRET radius must be positive, got {self.r0}")
        if self.emitter_depth < 0:
            raise ConfigurationError(f"emitter depth must be >= 0, got {self.emitter_depth}")
        if not 0 < self.readout_contrast <= 1:
            raise ConfigurationError(f"readout contrast must lie in (0, 1], got {self.readout_contrast}")


@dataclass(frozen=True)
class ExposureMap:
    """Relative dose on a rectilinear surface grid; ``dose[iy, ix]``."""

    x: np.ndarray
    y: np.ndarray
    dose: np.ndarray

    @property
    def pitch(self):
        if self.x.size > 1:
            return float(self.x[1] - self.x[0])
        return float(self.y[1] - self.y[0]) if self.y.size > 1 else 0.0

    def row(self, y_nm):
        """Dose profile along x at the grid row nearest ``y_nm``."""
        return self.dose[int(np.argmin(np.abs(self.y - y_nm)))]

    def column(self, x_nm):
        return self.dose[:, int(np.argmin(np.abs(self.x - x_nm)))]

    def sample(self, xs, ys):
        """Dose at the grid points nearest each (x, y) pair."""
        ix = np.abs(self.x[None, :] - np.asarray(xs, dtype=float)[:, None]).argmin(axis=1)
        iy = np.abs(self.y[None, :] - np.asarray(ys, dtype=float)[:, None]).argmin(axis=1)
        return self.dose[iy, ix]


def fret_efficiency(r, r0):
    """Transfer efficiency 1 / (1 + (r/r0)^6)."""
    if not r0 > 0:
        raise ConfigurationError(f"FRET radius must be positive, got {r0}")
    q = (np.asarray(r, dtype=float) / r0) ** 6
    out = 1.0 / (1.0 + q)
    return float(out) if out.ndim == 0 else out


def surface_axis(positions, pitch, margin=0.0):
    lo = float(np.min(positions)) - margin
    hi = float(np.max(positions)) + margin
    n = int(round((hi - lo) / pitch)) + 1 if hi > lo else 1
    return lo + np.arange(n) * pitch


def exposure_map(populations, sites, params: FretParams = FretParams(), surface_pitch=1.0, margin=0.0):
    """Dose at each surface point summed over all emitters.

    Each spin contributes ``(c p + 1 - c) * e(R)`` with ``c`` the readout
    contrast and ``p`` its bright population, at distance ``R`` from a
    surface point with the emitter ``emitter_depth`` below the surface.
    """
    if len(sites) == 0:
        raise ConfigurationError("exposure map needs at least one emitter")
    p = np.asarray(populations, dtype=float)
    if p.shape != (len(sites),):
        raise ConfigurationError("one population per site is required")
    sx = np.array([s.x_nm for s in sites])
    sy = np.array([s.y_nm for s in sites])
    c = params.readout_contrast
    weight = c * p + (1.0 - c)
    xs = surface_axis(sx, surface_pitch, margin)
    ys = surface_axis(sy, surface_pitch, margin)
    depth2 = params.emitter_depth**2
    inv_r0_2 = 1.0 / params.r0**2
    dose = np.empty((ys.size, xs.size))
    dx2 = (xs[:, None] - sx[None, :]) ** 2
    for iy, yv in enumerate(ys):
        r2 = dx2 + ((yv - sy) ** 2 + depth2)[None, :]
        eff = 1.0 / (1.0 + (r2 * inv_r0_2) ** 3)
        dose[iy] = (eff * weight[None, :]).sum(axis=1)
    return ExposureMap(xs, ys, dose)


def resist_threshold(emap: ExposureMap, threshold):
    """Exposed where dose >= threshold."""
    if not threshold > 0:
        raise ConfigurationError(f"resist threshold must be positive, got {threshold}")
    return emap.dose >= threshold


def _nearest_peak(profile, start):
    """Index of the local maximum closest to ``start``."""
    y = profile
    left = np.concatenate(([-np.inf], y[:-1]))
    right = np.concatenate((y[1:], [-np.inf]))
    peaks = np.nonzero((y >= left) & (y >= right) & (y > y.min()))[0]
    if peaks.size == 0:
        raise MeasurementError("profile has no local maximum")
    return int(peaks[np.argmin(np.abs(peaks - start))])


def fwhm(profile, pitch, peak=None):
    """Full width at half maximum in the units of ``pitch``.

    Half-maximum crossings are linearly interpolated.  ``peak`` picks the
    feature to measure: an index to climb from to the nearest local maximum;
    by default the global maximum.
    """
    y = np.asarray(profile, dtype=float)
    if y.size < 3:
        raise MeasurementError("profile too short to measure a width")
    i0 = int(np.argmax(y)) if peak is None else _nearest_peak(y, peak)
    half = 0.5 * y[i0]
    if not half > 0:
        raise MeasurementError("profile has no positive maximum")

    i = i0
    while i > 0 and y[i - 1] >= half:
        i -= 1
    if i == 0:
        raise MeasurementError("no half-maximum crossing left of the peak")
    left = (i - 1) + (half - y[i - 1]) / (y[i] - y[i - 1])

    i = i0
    while i < y.size - 1 and y[i + 1] >= half:
        i += 1
    if i == y.size - 1:
        raise MeasurementError("no half-maximum crossing right of the peak")
    right = i + (y[i] - half) / (y[i] - y[i + 1])
    return (right - left) * pitch


def contrast(values, on_mask):
    """(mean on - mean off) / (mean on + mean off); nan when undefined."""
    v = np.asarray(values, dtype=float).ravel()
    m = np.asarray(on_mask, dtype=bool).ravel()
    if m.all() or not m.any():
        return math.nan
    on = v[m].mean()
    off = v[~m].mean()
    return float((on - off) / (on + off)) if on + off > 0 else math.nan


def correlation(a, b):
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.std() == 0 or b.std() == 0:
        return math.nan
    return float(np.corrcoef(a, b)[0, 1])


@dataclass(frozen=True)
class PatternMetrics:
    contrast: float
    mae: float
    correlation: float

    @property
    def contrast_defined(self):
        return not math.isnan(self.contrast)


def pattern_metrics(emap: ExposureMap, target_values, xs, ys):
    """Compare the dose at the target pixel centers (``xs``, ``ys`` in nm)
    with the target values, after normalizing dose to its maximum."""
    target = np.asarray(target_values, dtype=float).ravel()
    d = emap.sample(np.ravel(xs), np.ravel(ys))
    top = d.max()
    dn = d / top if top > 0 else d
    return PatternMetrics(
        contrast=contrast(dn, target > 0.5),
        mae=float(np.mean(np.abs(dn - target))),
        correlation=correlation(dn, target),
    )
