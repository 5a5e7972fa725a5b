import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mrlith.errors import ConfigurationError, StabilityError
from mrlith.lattice import SpinSite
from mrlith.pulses import Pulse, gaussian_pi_pulse, gaussian_spectral_fwhm, resonant_tone
from mrlith.quantum import (
    DephasingParams,
    HamiltonianParams,
    bright_population,
    build_hamiltonian,
    check_density_matrix,
    dephasing_term,
    evolve_pulse,
    evolve_spin,
    hermiticity_defect,
    mixed_state,
    pure_state,
    rabi_peak,
    rk4_step,
)
from mrlith.sequence import PulseSequence, SequenceStep

from oracles import max_rabi_deviation, rabi_detuned, rabi_resonant, two_level_exact


def test_hamiltonian_examples():
    np.testing.assert_array_equal(build_hamiltonian(HamiltonianParams()), np.zeros((3, 3)))
    h = build_hamiltonian(HamiltonianParams(0.3, -0.2, 1.5, 0.7))
    expected = np.array([
        [2 * math.pi * 0.3, math.pi * 1.5, 0],
        [math.pi * 1.5, 0, math.pi * 0.7],
        [0, math.pi * 0.7, 2 * math.pi * -0.2],
    ])
    np.testing.assert_array_equal(h, expected)
    assert np.array_equal(h, h.T)
    h = build_hamiltonian(HamiltonianParams(omega1=2j))
    assert h[0, 1] == math.pi * 2j and h[1, 0] == -math.pi * 2j
    assert hermiticity_defect(h) == 0.0
    h = build_hamiltonian(HamiltonianParams(omega1=lambda t: t), t=0.5)
    assert h[0, 1] == math.pi * 0.5


def test_dephasing_examples():
    rho = pure_state(-1) * 0.3 + pure_state(0) * 0.7 + 0j
    rho[0, 1] = 0.2 + 0.1j
    rho[1, 0] = np.conj(rho[0, 1])
    np.testing.assert_array_equal(dephasing_term(rho, DephasingParams()), np.zeros((3, 3)))
    single = np.zeros((3, 3), complex)
    single[0, 1] = 0.25
    single[1, 0] = 0.25
    lt = dephasing_term(single, DephasingParams(t2=20.0))
    expected = np.zeros((3, 3))
    expected[0, 1] = expected[1, 0] = 0.25 / 20.0
    np.testing.assert_allclose(lt, expected, rtol=1e-15)
    np.testing.assert_array_equal(dephasing_term(np.diag([0.2, 0.5, 0.3]) + 0j, DephasingParams(1.0)), 0)
    dq = np.zeros((3, 3), complex)
    dq[0, 2] = dq[2, 0] = 1.0
    assert dephasing_term(dq, DephasingParams(10.0))[0, 2] == pytest.approx(0.2)
    with pytest.raises(ConfigurationError):
        DephasingParams(0.0)


def test_rk4_zero_hamiltonian_keeps_state():
    rho = mixed_state()
    rho[0, 2] = 0.1
    rho[2, 0] = 0.1
    out = rk4_step(rho, HamiltonianParams(), 0.0, 0.01)
    np.testing.assert_allclose(out, rho, atol=0)


def test_rk4_stability_guard_names_dt():
    with pytest.raises(StabilityError, match="dt=0.5"):
        rk4_step(pure_state(-1), HamiltonianParams(omega1=1.0), 0.0, 0.5)
    with pytest.raises(ConfigurationError):
        rk4_step(pure_state(-1), HamiltonianParams(), 0.0, 0.0)


def test_rk4_step_resonant_rabi():
    omega, dt = 0.8, 0.01
    p = HamiltonianParams(omega1=omega)
    rho = pure_state(-1)
    t = 0.0
    errs = []
    for _ in range(300):
        rho = rk4_step(rho, p, t, dt)
        t += dt
        errs.append(abs(rho[1, 1].real - rabi_resonant(omega, t)))
    assert max(errs) < 1e-6


@pytest.mark.parametrize("frame", ["interaction", "carrier"])
def test_kernel_resonant_pi_pulse(frame):
    omega = 2.0
    n = 400
    rho = evolve_pulse(pure_state(-1), np.full(n, omega), 1 / (2 * omega) / n, 1, frame=frame)
    assert rho[1, 1].real >= 1 - 1e-6


def test_kernel_matches_eq_forward_map_at_100_times():
    omega = 1.3
    times = np.linspace(0.01, 2.0, 100)
    dt = 0.002
    for t in times:
        n = int(round(t / dt))
        rho = evolve_pulse(pure_state(-1), np.full(n, omega), t / n, 1)
        assert abs(rho[1, 1].real - rabi_resonant(omega, t)) < 1e-6


def test_detuned_peak_half():
    omega = delta = 1.0
    dt = 0.001
    rho = pure_state(-1)
    best = 0.0
    for _ in range(1000):
        rho = evolve_pulse(rho, np.full(1, omega), dt, 1, delta1=delta)
        best = max(best, rho[1, 1].real)
    assert best == pytest.approx(0.5, abs=1e-4)
    assert rabi_peak(1.0, 1.0) == 0.5


@given(st.floats(0.2, 3.0), st.floats(-3.0, 3.0), st.floats(0.05, 1.5))
def test_kernel_matches_exact_two_level(omega, delta, t):
    n = 1000
    rho = evolve_pulse(pure_state(-1), np.full(n, omega), t / n, 1, delta1=delta)
    assert rho[1, 1].real == pytest.approx(rabi_detuned(omega, delta, t), abs=1e-6)
    assert rho[2, 2].real < 1e-12


@pytest.mark.parametrize("channel", [1, 2])
def test_channel_two_and_level_isolation(channel):
    start = pure_state(0) if channel == 2 else pure_state(-1)
    rho = evolve_pulse(start, np.full(300, 1.0), 0.5 / 300, channel)
    assert rho[1, 1].real < 1e-6 if channel == 2 else rho[1, 1].real > 1 - 1e-6
    idle = 2 if channel == 1 else 0
    assert rho[idle, idle].real < 1e-12


@pytest.mark.parametrize("n", [20, 40, 80, 160])
def test_rk4_order(n):
    """Halving the step cuts the worst deviation from the resonant solution ~16x."""
    assert max_rabi_deviation(n) / max_rabi_deviation(2 * n) >= 8


def test_interaction_and_carrier_frames_agree(rng):
    samples = rng.normal(size=500) + 1j * rng.normal(size=500)
    a = evolve_pulse(pure_state(-1), samples, 0.002, 1, delta1=5.0, delta2=-3.0, frame="interaction")
    b = evolve_pulse(pure_state(-1), samples, 0.002, 1, delta1=5.0, delta2=-3.0, frame="carrier")
    # the carrier frame follows the detuning phase with RK4 and is the looser of the two
    np.testing.assert_allclose(a, b, atol=2e-6)


def test_kernel_matches_exact_propagator_for_shaped_drive(rng):
    samples = 2 * (rng.normal(size=300) + 1j * rng.normal(size=300))
    rho = evolve_pulse(pure_state(-1), samples, 0.003, 1, delta1=1.7)
    psi = two_level_exact(samples, 0.003, 1.7)
    assert rho[0, 0].real == pytest.approx(abs(psi[0]) ** 2, abs=1e-6)
    assert rho[0, 1] == pytest.approx(psi[0] * np.conj(psi[1]), abs=1e-6)


def test_free_dephasing_decay():
    rho = np.full((3, 3), 1 / 3, dtype=complex)
    out = evolve_pulse(rho, np.zeros(1000), 0.01, 1, dephasing=DephasingParams(t2=4.0))
    assert out[0, 1] == pytest.approx(np.exp(-10 / 4) / 3, rel=1e-8)
    assert out[0, 2] == pytest.approx(np.exp(-2 * 10 / 4) / 3, rel=1e-8)
    np.testing.assert_allclose(np.diag(out).real, 1 / 3, atol=1e-15)


def test_evolve_pulse_rejects_bad_arguments():
    with pytest.raises(ConfigurationError):
        evolve_pulse(pure_state(-1), np.ones(3), 0.01, 3)
    with pytest.raises(ConfigurationError):
        evolve_pulse(pure_state(-1), np.ones(3), 0.01, 1, frame="lab")
    np.testing.assert_array_equal(evolve_pulse(pure_state(-1), np.zeros(0), 0.01, 1), pure_state(-1))


def _single_step(pulse, gx=1):
    return PulseSequence((SequenceStep(gx, 0, pulse),))


def test_evolve_spin_empty_sequence():
    rho0 = mixed_state()
    np.testing.assert_array_equal(evolve_spin(rho0, PulseSequence(), SpinSite(0, 0, 0)), rho0)


def test_gaussian_pulse_resonant_and_far_detuned():
    det = 12.0
    p = gaussian_pi_pulse(resonant_tone(det, 1), 1.5, 5.6, 7000, channel=1)
    site = SpinSite(0, 0.0, 0.0, delta_x=det)
    rho = evolve_spin(pure_state(-1), _single_step(p), site)
    assert bright_population(rho) >= 1 - 1e-3
    far = det + 10 * gaussian_spectral_fwhm(1.5)
    rho = evolve_spin(pure_state(-1), _single_step(p), SpinSite(1, 0.0, 0.0, delta_x=far))
    psi = two_level_exact(p.samples, p.dt, far)
    assert bright_population(rho) <= 0.01
    assert bright_population(rho) == pytest.approx(abs(psi[1]) ** 2, abs=1e-6)


def test_bright_population_examples():
    assert bright_population(pure_state(0)) == 1.0
    assert bright_population(pure_state(-1)) == 0.0
    assert bright_population(mixed_state()) == pytest.approx(1 / 3)


def test_check_density_matrix():
    check_density_matrix(mixed_state())
    with pytest.raises(ValueError):
        check_density_matrix(np.eye(3))
    bad = mixed_state()
    bad[0, 1] = 0.1
    with pytest.raises(ValueError):
        check_density_matrix(bad)


drives = st.lists(st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False),
                  min_size=1, max_size=6)


@given(drives, st.floats(-20, 20), st.floats(-20, 20), st.sampled_from([1, 2]),
       st.sampled_from([math.inf, 5.0, 20.0]))
def test_trace_and_hermiticity_preserved(levels, d1, d2, channel, t2):
    samples = np.repeat(np.array(levels), 50)
    rho0 = mixed_state()
    rho0[0, 1] = rho0[1, 0] = 0.1
    rho = evolve_pulse(rho0, samples, 0.004, channel, d1, d2, DephasingParams(t2))
    assert abs(np.trace(rho).real - 1) < 1e-12
    assert hermiticity_defect(rho) < 1e-12
    check_density_matrix(rho)


@given(drives, st.floats(-20, 20), st.floats(-20, 20))
def test_unitary_without_dephasing(levels, d1, d2):
    # default pulse sampling: 5.6 us over 7000 steps
    samples = np.repeat(np.array(levels), 200)
    rho0 = np.diag([0.6, 0.3, 0.1]).astype(complex)
    rho = evolve_pulse(rho0, samples, 0.0008, 1, d1, d2)
    rho = evolve_pulse(rho, samples[::-1], 0.0008, 2, d1, d2)
    np.testing.assert_allclose(np.linalg.eigvalsh(rho), [0.1, 0.3, 0.6], atol=1e-6)


@given(drives, st.floats(-20, 20))
def test_two_level_reduction(levels, d1):
    rho = evolve_pulse(pure_state(-1), np.repeat(np.array(levels), 30), 0.004, 1, d1, 7.0)
    assert rho[2, 2].real < 1e-12


@given(drives, st.floats(-20, 20), st.floats(1.0, 100.0), st.sampled_from([1, 2]))
def test_dephased_state_stays_physical(levels, d1, t2, channel):
    rho = evolve_pulse(pure_state(-1 if channel == 1 else 0), np.repeat(np.array(levels), 50), 0.004, channel,
                       d1, -d1, DephasingParams(t2))
    assert abs(np.trace(rho).real - 1) < 1e-12
    assert hermiticity_defect(rho) < 1e-12
    assert np.linalg.eigvalsh(rho).min() > -1e-9
