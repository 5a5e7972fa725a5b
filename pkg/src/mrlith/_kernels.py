"""Compiled RK4 propagation of one three-level density matrix through one pulse.

The state is carried as three real populations and three complex
coherences (upper triangle); the lower triangle is implied by Hermiticity,
so the propagated matrix is Hermitian by construction.  The drive is
zero-order held over each sample interval, as an AWG would play it.

Frame 0 integrates in the carrier frame, where the static detunings sit on
the diagonal.  Frame 1 integrates in the interaction frame of those
detunings: their phases are applied exactly and RK4 only has to follow the
drive, then the coherences are rotated back at the end of the pulse.
"""

import cmath
import math

import numpy as np
from numba import njit

CARRIER = 0
INTERACTION = 1


@njit(cache=True, inline="always")
def _deriv(p0, p1, p2, c01, c02, c12, a, b, e0, e2, g1, g2):
    ac = a.conjugate()
    bc = b.conjugate()
    z0 = a * c01.conjugate()
    z1 = ac * c01
    z2 = b * c12.conjugate()
    z3 = bc * c12
    d0 = 2.0 * z0.imag
    d1 = 2.0 * z1.imag + 2.0 * z2.imag
    d2 = 2.0 * z3.imag
    d01 = -1j * (e0 * c01 + a * (p1 - p0) - c02 * bc) - g1 * c01
    d02 = -1j * ((e0 - e2) * c02 + a * c12 - c01 * b) - g2 * c02
    d12 = -1j * (ac * c02 + b * (p2 - p1) - e2 * c12) - g1 * c12
    return d0, d1, d2, d01, d02, d12


@njit(cache=True)
def evolve_pulse(rho, coupling, channel, dt, substeps, delta1, delta2, g1, g2, frame):
    """Propagate ``rho`` (3x3, modified copy returned) through one pulse.

    ``coupling`` holds the off-diagonal Hamiltonian entry per sample in
    rad/us; ``delta1``/``delta2`` are cyclic MHz; ``g1``/``g2`` are the
    single- and double-quantum dephasing rates in 1/us.
    """
    two_pi = 2.0 * math.pi
    p0 = rho[0, 0].real
    p1 = rho[1, 1].real
    p2 = rho[2, 2].real
    c01 = rho[0, 1]
    c02 = rho[0, 2]
    c12 = rho[1, 2]

    w1 = two_pi * delta1
    w2 = two_pi * delta2
    if frame == CARRIER:
        e0 = w1
        e2 = w2
        omega = 0.0
    else:
        e0 = 0.0
        e2 = 0.0
        # coupling phase rotates at +w1 on channel 1 and -w2 on channel 2
        omega = w1 if channel == 1 else -w2

    h = dt / substeps
    half = 0.5 * h
    step_phase = cmath.exp(1j * omega * half)
    n = coupling.shape[0]
    zero = 0.0 + 0.0j

    for k in range(n):
        c = coupling[k]
        ph = cmath.exp(1j * omega * (k * dt))
        for s in range(substeps):
            ph_mid = ph * step_phase
            ph_end = ph_mid * step_phase
            if channel == 1:
                a_s = c * ph
                a_m = c * ph_mid
                a_e = c * ph_end
                b_s = zero
                b_m = zero
                b_e = zero
            else:
                a_s = zero
                a_m = zero
                a_e = zero
                b_s = c * ph
                b_m = c * ph_mid
                b_e = c * ph_end

            k1 = _deriv(p0, p1, p2, c01, c02, c12, a_s, b_s, e0, e2, g1, g2)
            k2 = _deriv(p0 + half * k1[0], p1 + half * k1[1], p2 + half * k1[2],
                        c01 + half * k1[3], c02 + half * k1[4], c12 + half * k1[5],
                        a_m, b_m, e0, e2, g1, g2)
            k3 = _deriv(p0 + half * k2[0], p1 + half * k2[1], p2 + half * k2[2],
                        c01 + half * k2[3], c02 + half * k2[4], c12 + half * k2[5],
                        a_m, b_m, e0, e2, g1, g2)
            k4 = _deriv(p0 + h * k3[0], p1 + h * k3[1], p2 + h * k3[2],
                        c01 + h * k3[3], c02 + h * k3[4], c12 + h * k3[5],
                        a_e, b_e, e0, e2, g1, g2)
            sixth = h / 6.0
            p0 += sixth * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
            p1 += sixth * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
            p2 += sixth * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
            c01 += sixth * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
            c02 += sixth * (k1[4] + 2.0 * k2[4] + 2.0 * k3[4] + k4[4])
            c12 += sixth * (k1[5] + 2.0 * k2[5] + 2.0 * k3[5] + k4[5])
            ph = ph_end

    if frame != CARRIER:
        total = n * dt
        c01 *= cmath.exp(-1j * w1 * total)
        c12 *= cmath.exp(1j * w2 * total)
        c02 *= cmath.exp(-1j * (w1 - w2) * total)

    out = np.empty((3, 3), dtype=np.complex128)
    out[0, 0] = p0
    out[1, 1] = p1
    out[2, 2] = p2
    out[0, 1] = c01
    out[0, 2] = c02
    out[1, 2] = c12
    out[1, 0] = c01.conjugate()
    out[2, 0] = c02.conjugate()
    out[2, 1] = c12.conjugate()
    return out
