"""Unit conventions and the only place unit conversions happen.

Internal units: lengths in nm, currents in A, fields in Gauss,
frequencies in cyclic MHz, times in us.  Angular rates (rad/us) appear
only inside Hamiltonians, which multiply cyclic MHz by ``TWO_PI``.
"""

import math

TWO_PI = 2.0 * math.pi

NM_PER_UM = 1.0e3
M_PER_NM = 1.0e-9
GAUSS_PER_TESLA = 1.0e4

# mu0 / (2 pi) in T m / A
MU0_OVER_2PI = 2.0e-7

# Zeeman shift of the m = +-1 sublevels
GYROMAGNETIC_MHZ_PER_GAUSS = 2.8


def um_to_nm(value):
    return value * NM_PER_UM


def nm_to_um(value):
    return value / NM_PER_UM


def tesla_to_gauss(value):
    return value * GAUSS_PER_TESLA


def gauss_per_um(gauss_per_nm):
    return gauss_per_nm * NM_PER_UM


def line_current_field_gauss(current_a, distance_nm):
    """Field magnitude of an infinite line current, signed by ``distance_nm``."""
    return tesla_to_gauss(MU0_OVER_2PI * current_a / (distance_nm * M_PER_NM))
