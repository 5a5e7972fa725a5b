"""Three-level spin dynamics under the driven, dephased master equation.

Basis order is (|-1>, |0>, |+1>); index 1 is the optically bright state.
Detunings and Rabi frequencies are stored in cyclic MHz.  A drive of Rabi
frequency ``Omega`` flops a resonant spin as ``sin^2(pi Omega t)``, so a pi
pulse has ``integral 2 pi Omega dt = pi`` and the Hamiltonian carries
``pi * Omega`` off the diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import _kernels
from .errors import ConfigurationError, StabilityError
from .noise import NO_NOISE, NoiseRealization
from .units import TWO_PI

LEVELS = (-1, 0, 1)
BRIGHT = 1

# largest phase (rad) a single RK4 step may accumulate from any Hamiltonian entry
STABILITY_LIMIT = 0.1
# interaction frame: largest drive-phase advance per step
FRAME_PHASE_LIMIT = 1.0

Envelope = Union[complex, float, Callable[[float], complex]]


def pure_state(level):
    """Projector onto sublevel ``level`` in {-1, 0, +1}."""
    rho = np.zeros((3, 3), dtype=complex)
    k = LEVELS.index(level)
    rho[k, k] = 1.0
    return rho


def mixed_state():
    return np.eye(3, dtype=complex) / 3.0


def hermiticity_defect(rho):
    return float(np.max(np.abs(rho - rho.conj().T)))


def check_density_matrix(rho, herm_tol=1e-10, trace_tol=1e-9):
    """Raise ValueError if ``rho`` is not a valid 3x3 density matrix."""
    rho = np.asarray(rho)
    if rho.shape != (3, 3):
        raise ValueError(f"density matrix must be 3x3, got {rho.shape}")
    if hermiticity_defect(rho) > herm_tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {np.trace(rho).real} != 1")
    d = np.diag(rho).real
    if np.any(d < -trace_tol) or np.any(d > 1 + trace_tol):
        raise ValueError("density matrix populations outside [0, 1]")


def _value(envelope, t):
    return complex(envelope(t)) if callable(envelope) else complex(envelope)


@dataclass(frozen=True)
class HamiltonianParams:
    """Static detunings and drive envelopes; envelopes may be constants or
    functions of time in us."""

    delta1: float = 0.0
    delta2: float = 0.0
    omega1: Envelope = 0.0
    omega2: Envelope = 0.0


@dataclass(frozen=True)
class DephasingParams:
    t2: float = math.inf
    double_quantum_factor: float = 2.0

    def __post_init__(self):
        if not self.t2 > 0:
            raise ConfigurationError(f"T2 must be positive or inf, got {self.t2}")

    @property
    def rate(self):
        return 0.0 if math.isinf(self.t2) else 1.0 / self.t2

    @property
    def double_quantum_rate(self):
        return self.double_quantum_factor * self.rate


NO_DEPHASING = DephasingParams()


def build_hamiltonian(p: HamiltonianParams, t=0.0):
    """H/hbar in rad/us at time ``t``."""
    o1 = _value(p.omega1, t)
    o2 = _value(p.omega2, t)
    h = np.zeros((3, 3), dtype=complex)
    h[0, 0] = TWO_PI * p.delta1
    h[2, 2] = TWO_PI * p.delta2
    h[0, 1] = math.pi * o1
    h[1, 0] = math.pi * o1.conjugate()
    h[1, 2] = math.pi * o2
    h[2, 1] = math.pi * o2.conjugate()
    return h


def dephasing_term(rho, d: DephasingParams = NO_DEPHASING):
    """The subtracted relaxation term: coherences with |0> at 1/T2, the
    (-1, +1) coherence at ``double_quantum_factor``/T2, populations untouched."""
    rates = np.array([
        [0.0, d.rate, d.double_quantum_rate],
        [d.rate, 0.0, d.rate],
        [d.double_quantum_rate, d.rate, 0.0],
    ])
    return rates * rho


def derivative(rho, h, d: DephasingParams = NO_DEPHASING):
    return -1j * (h @ rho - rho @ h) - dephasing_term(rho, d)


def rk4_step(rho, params: HamiltonianParams, t, dt, dephasing: DephasingParams = NO_DEPHASING,
             limit=STABILITY_LIMIT):
    """One classical RK4 step of the master equation, re-Hermitized."""
    if not dt > 0:
        raise ConfigurationError(f"step size must be positive, got {dt}")
    h0 = build_hamiltonian(params, t)
    hm = build_hamiltonian(params, t + 0.5 * dt)
    h1 = build_hamiltonian(params, t + dt)
    scale = max(np.max(np.abs(h0)), np.max(np.abs(hm)), np.max(np.abs(h1)))
    if dt * scale > limit:
        raise StabilityError(
            f"step size dt={dt:g} us gives dt*max|H|={dt * scale:.3g} rad > {limit}; "
            f"use dt <= {limit / scale:.3g} us"
        )
    k1 = derivative(rho, h0, dephasing)
    k2 = derivative(rho + 0.5 * dt * k1, hm, dephasing)
    k3 = derivative(rho + 0.5 * dt * k2, hm, dephasing)
    k4 = derivative(rho + dt * k3, h1, dephasing)
    out = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return 0.5 * (out + out.conj().T)


def substeps_for(dt, delta1, delta2, peak_rabi, channel, frame):
    """Smallest per-sample subdivision that honours the step guards."""
    coupling = math.pi * peak_rabi
    if frame == "carrier":
        scale = max(abs(TWO_PI * delta1), abs(TWO_PI * delta2), coupling)
        return max(1, math.ceil(dt * scale / STABILITY_LIMIT))
    driven = delta1 if channel == 1 else delta2
    n_drive = math.ceil(dt * coupling / STABILITY_LIMIT)
    n_phase = math.ceil(dt * abs(TWO_PI * driven) / FRAME_PHASE_LIMIT)
    return max(1, n_drive, n_phase)


_FRAMES = {"carrier": _kernels.CARRIER, "interaction": _kernels.INTERACTION}


def evolve_pulse(rho, samples, dt, channel, delta1=0.0, delta2=0.0,
                 dephasing: DephasingParams = NO_DEPHASING, frame="interaction", substeps=None):
    """Propagate through a zero-order-held drive ``samples`` (cyclic MHz) on ``channel``."""
    if frame not in _FRAMES:
        raise ConfigurationError(f"unknown integration frame {frame!r}")
    if channel not in (1, 2):
        raise ConfigurationError(f"channel must be 1 or 2, got {channel}")
    samples = np.ascontiguousarray(samples, dtype=np.complex128)
    if samples.size == 0:
        return np.array(rho, dtype=complex)
    if substeps is None:
        peak = float(np.max(np.abs(samples)))
        substeps = substeps_for(dt, delta1, delta2, peak, channel, frame)
    return _kernels.evolve_pulse(
        np.ascontiguousarray(rho, dtype=np.complex128), math.pi * samples, channel, float(dt), int(substeps),
        float(delta1), float(delta2), dephasing.rate, dephasing.double_quantum_rate, _FRAMES[frame],
    )


def evolve_spin(initial, seq, site, noise: NoiseRealization = NO_NOISE,
                dephasing: DephasingParams = NO_DEPHASING, frame="interaction"):
    """Final density matrix of ``site`` after every step of ``seq``.

    Gradient switching is instantaneous, so the state is carried unchanged
    from the end of one step to the start of the next.
    """
    rho = np.array(initial, dtype=complex)
    for k, step in enumerate(seq.steps):
        pulse = step.pulse
        if pulse.samples.size == 0:
            continue
        d1, d2 = site.detunings(step.x_gradient, step.y_gradient)
        samples = pulse.samples * noise.factor(site.index, k, pulse.samples.size)
        rho = evolve_pulse(rho, samples, pulse.dt, pulse.channel, d1, d2, dephasing, frame)
    return rho


def populations(rho):
    """Sublevel populations in basis order (-1, 0, +1)."""
    return np.clip(np.real(np.diag(rho)), 0.0, 1.0)


def bright_population(rho):
    return float(min(1.0, max(0.0, np.real(rho[BRIGHT, BRIGHT]))))


def rabi_population(omega, delta, t):
    """Closed-form two-level excitation probability from a ground start."""
    omega_eff = math.hypot(omega, delta)
    if omega_eff == 0:
        return 0.0
    return (omega / omega_eff) ** 2 * math.sin(math.pi * omega_eff * t) ** 2


def rabi_peak(omega, delta):
    """Maximum excitation of a detuned constant drive: Omega^2/(Omega^2 + Delta^2)."""
    if omega == 0 and delta == 0:
        return 0.0
    return omega**2 / (omega**2 + delta**2)
