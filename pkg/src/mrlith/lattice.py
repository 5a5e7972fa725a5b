"""Spin lattice sites and their local detunings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .field import WirePair, ZeemanModel, detuning_at
from .units import nm_to_um

# half-extent of the lattice may use at most this fraction of the half-gap
GAP_FILL = 0.9


@dataclass(frozen=True)
class SpinSite:
    """One emitter: position on the surface plane, depth below it, and the
    detunings it sees under the +X and +Y gradients (cyclic MHz)."""

    index: int
    x_nm: float
    y_nm: float
    depth_nm: float = 5.0
    delta_x: float = 0.0
    delta_y: float = 0.0

    def detunings(self, x_gradient, y_gradient):
        return x_gradient * self.delta_x, y_gradient * self.delta_y


def axis_positions(count, pitch_nm, center_nm=0.0):
    return center_nm + (np.arange(count) - 0.5 * (count - 1)) * pitch_nm


def _check_inside(positions_nm, wires, label):
    if wires is None:
        return
    if not np.all(wires.contains(nm_to_um(positions_nm), margin=1.0 - GAP_FILL)):
        raise ConfigurationError(
            f"{label} lattice extent [{positions_nm.min():g}, {positions_nm.max():g}] nm does not fit "
            f"inside the {label} wire gap with a 10% margin"
        )


def build_lattice(width, height, pitch_nm, x_wires: WirePair | None, y_wires: WirePair | None = None,
                  zeeman: ZeemanModel = ZeemanModel(), depth_nm=5.0, center_nm=(0.0, 0.0)):
    """Square lattice of ``width x height`` sites, row-major, centered on ``center_nm``.

    Column ``j`` sits at x index ``j``, row ``i`` at y index ``i``.
    """
    if width < 1 or height < 1:
        raise ConfigurationError("lattice dimensions must be >= 1")
    if not pitch_nm > 0:
        raise ConfigurationError("lattice pitch must be positive")
    xs = axis_positions(width, pitch_nm, center_nm[0])
    ys = axis_positions(height, pitch_nm, center_nm[1])
    _check_inside(xs, x_wires, "x")
    if height > 1 or y_wires is not None:
        _check_inside(ys, y_wires, "y")
    dx = detuning_at(nm_to_um(xs), x_wires.with_polarity(1), zeeman) if x_wires else np.zeros(width)
    dy = detuning_at(nm_to_um(ys), y_wires.with_polarity(1), zeeman) if y_wires else np.zeros(height)
    dx = np.atleast_1d(dx)
    dy = np.atleast_1d(dy)
    sites = []
    for i in range(height):
        for j in range(width):
            sites.append(SpinSite(i * width + j, float(xs[j]), float(ys[i]), depth_nm, float(dx[j]), float(dy[i])))
    return sites
