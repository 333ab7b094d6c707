import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aagate.engine import SimOptions, simulate, two_spin_ket
from aagate.phase import (
    BlochLoop,
    NonCyclicError,
    SelfIntersectionError,
    block_identity_fidelity,
    conditional_phase,
    extract_gate_unitary,
    gate_fidelity,
    ideal_gate,
    pancharatnam_phase,
    phase_decomposition,
    slice_circuit,
    solid_angle,
    toggling_trajectory,
)
from aagate.qcore import DOWN, PLUS, UP, UndefinedPhaseError, bloch_vector
from aagate.seqlang import fig2_program, resolve
from aagate.sysmodel import CHLOROFORM
from oracles import brute_force_conditional_phase, brute_force_gate, circ_dist

TAU = CHLOROFORM.tau


def run(theta, b="up", instantaneous=True, samples=2000):
    tl = resolve(fig2_program(), {"theta": theta}, CHLOROFORM, instantaneous=instantaneous)
    ket = UP if b == "up" else DOWN
    _, traj = simulate(tl, CHLOROFORM, init=two_spin_ket(PLUS, ket), opts=SimOptions(dt_record=TAU / samples))
    return traj


def cap(alpha, n=4000, reverse=False):
    """Circle of constant polar angle ``alpha`` about +z, counter-clockwise."""
    phi = np.linspace(0, 2 * np.pi, n + 1)
    if reverse:
        phi = phi[::-1]
    return np.column_stack([np.sin(alpha) * np.cos(phi), np.sin(alpha) * np.sin(phi),
                            np.full_like(phi, np.cos(alpha))])


# ---- solid angle ------------------------------------------------------------

@pytest.mark.parametrize("alpha", [0.1, 0.7, np.pi / 3, 2.0])
def test_cap_solid_angle(alpha):
    # the enclosed region is only defined modulo the full sphere
    expected = 2 * np.pi * (1 - np.cos(alpha))
    assert circ_dist(solid_angle(cap(alpha)) / 2, expected / 2) < 1e-5
    assert circ_dist(solid_angle(cap(alpha, reverse=True)) / 2, -expected / 2) < 1e-5


def test_equator_encloses_hemisphere():
    assert abs(solid_angle(cap(np.pi / 2))) == pytest.approx(2 * np.pi, abs=1e-9)


def test_constant_loop_has_no_area():
    P = np.tile([1.0, 0, 0], (50, 1))
    assert solid_angle(P) == 0.0
    kets = np.tile(PLUS, (50, 1))
    assert pancharatnam_phase(kets) == 0.0


def test_figure_eight_rejected():
    t = np.linspace(0, 2 * np.pi, 2001) + 1e-3  # crossing falls between samples
    x, y = 0.5 * np.sin(t), 0.5 * np.sin(t) * np.cos(t)
    P = np.column_stack([x, y, np.sqrt(1 - x**2 - y**2)])
    with pytest.raises(SelfIntersectionError):
        solid_angle(P)
    solid_angle(P, check_simple=False)  # still computable when asked


def test_open_loop_rejected():
    with pytest.raises(NonCyclicError):
        solid_angle(cap(0.5)[:-100])


# ---- slice circuit ---------------------------------------------------------

@pytest.mark.parametrize("theta, omega, gamma", [
    (np.pi / 8, np.pi / 2, np.pi / 4),
    (np.pi / 4, np.pi, np.pi / 2),
    (3 * np.pi / 8, 3 * np.pi / 2, 3 * np.pi / 4),
])
def test_slice_circuit_values(theta, omega, gamma):
    loop = slice_circuit(theta)
    assert loop.is_closed
    assert abs(solid_angle(loop)) == pytest.approx(omega, abs=1e-9)
    assert abs(pancharatnam_phase(loop)) == pytest.approx(gamma, abs=1e-6)


def test_slice_circuit_passes_through_minus_x():
    loop = slice_circuit(np.pi / 5, samples_per_arc=100)
    np.testing.assert_allclose(loop.points[100], [-1, 0, 0], atol=1e-12)


# ---- Pancharatnam phase ---------------------------------------------------

def test_pancharatnam_errors():
    with pytest.raises(UndefinedPhaseError):
        pancharatnam_phase(np.array([UP, DOWN, UP]))
    with pytest.raises(ValueError):
        pancharatnam_phase(np.array([UP, UP]))
    with pytest.raises(ValueError):
        pancharatnam_phase(BlochLoop(cap(0.3)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([np.pi / 16, np.pi / 8, np.pi / 4, 3 * np.pi / 8]))
def test_pancharatnam_gauge_invariance(seed, theta):
    loop = slice_circuit(theta, samples_per_arc=500)
    phases = np.random.default_rng(seed).uniform(-np.pi, np.pi, len(loop.states))
    regauged = loop.states * np.exp(1j * phases)[:, None]
    assert circ_dist(pancharatnam_phase(regauged), pancharatnam_phase(loop)) < 1e-12


# ---- decomposition on the simulated trajectory ---------------------------

def test_toggling_loop_closes_on_plus_x():
    loop = toggling_trajectory(run(np.pi / 4), "up")
    assert loop.is_closed
    np.testing.assert_allclose(loop.points[0], [1, 0, 0], atol=1e-12)
    np.testing.assert_allclose(loop.points[-1], [1, 0, 0], atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(loop.points, axis=1), 1, atol=1e-12)


def test_down_branch_loop_is_a_point():
    loop = toggling_trajectory(run(np.pi / 3, "down"), "down")
    np.testing.assert_allclose(loop.points, np.tile([1.0, 0, 0], (len(loop.points), 1)), atol=1e-12)
    rep = phase_decomposition(run(np.pi / 3, "down"), "down")
    assert rep.total_phase == 0 and rep.solid_angle == 0


def test_theta_zero_has_no_phase():
    rep = phase_decomposition(run(0.0), "up")
    assert abs(rep.total_phase) < 1e-12 and abs(rep.geometric_phase) < 1e-12
    assert abs(rep.solid_angle) < 1e-12


@pytest.mark.parametrize("theta", [np.pi / 16, np.pi / 8, np.pi / 4, 3 * np.pi / 8, np.pi / 2])
@pytest.mark.parametrize("b", ["up", "down"])
def test_dynamic_phase_vanishes(theta, b):
    rep = phase_decomposition(run(theta, b), b)
    assert len(rep.segment_dynamic) == 2
    assert max(abs(v) for v in rep.segment_dynamic) < 1e-9


@pytest.mark.parametrize("n", range(1, 17))
def test_three_routes_agree(n):
    theta = n * np.pi / 16
    rep = phase_decomposition(run(theta), "up")
    assert circ_dist(rep.geometric_phase, rep.pancharatnam) < 1e-9
    assert circ_dist(rep.geometric_phase, rep.winding * rep.solid_angle) < 1e-9
    assert circ_dist(rep.geometric_phase, rep.total_phase) < 1e-9
    assert circ_dist(rep.geometric_phase, 2 * theta) < 1e-9


def test_winding_tag_sign():
    rep = phase_decomposition(run(np.pi / 8), "up")
    assert rep.winding == -0.5
    assert rep.geometric_phase == pytest.approx(rep.winding * rep.solid_angle, abs=1e-9)


def test_finite_pulse_trajectory_is_rejected():
    with pytest.raises(ValueError, match="finite pulses"):
        phase_decomposition(run(np.pi / 4, instantaneous=False), "up")


def test_csv_row():
    row = phase_decomposition(run(np.pi / 4), "up").csv_row(np.pi / 4)
    assert row["theta"] == np.pi / 4
    assert {"total", "dynamic", "geometric", "pancharatnam", "solid_angle_half"} <= set(row)


# ---- gate extraction -------------------------------------------------------

@pytest.mark.parametrize("theta", [np.pi / 3, 0.123, 2.5])
def test_gate_matches_brute_force(theta):
    tl = resolve(fig2_program(), {"theta": theta}, CHLOROFORM, instantaneous=True)
    U = extract_gate_unitary(tl, CHLOROFORM)
    np.testing.assert_allclose(U, brute_force_gate(theta), atol=1e-10)
    assert circ_dist(conditional_phase(U), brute_force_conditional_phase(theta)) < 1e-10
    assert gate_fidelity(U, ideal_gate(2 * theta)) > 1 - 1e-12
    assert block_identity_fidelity(U) > 1 - 1e-12


def test_ideal_gate_spectrum():
    beta = 0.77
    ev = np.linalg.eigvals(ideal_gate(beta))
    expected = [1, 1, np.exp(1j * beta), np.exp(-1j * beta)]
    assert sorted(np.angle(ev)) == pytest.approx(sorted(np.angle(expected)), abs=1e-12)
    assert conditional_phase(ideal_gate(beta)) == pytest.approx(beta, abs=1e-12)


def test_gate_fidelity_examples():
    assert gate_fidelity(np.eye(4), ideal_gate(np.pi / 2)) == pytest.approx(0.5)
    assert gate_fidelity(np.eye(4), np.exp(0.3j) * np.eye(4)) == pytest.approx(1)
    with pytest.raises(ValueError):
        gate_fidelity(np.eye(4), 2 * np.eye(4))
    with pytest.raises(ValueError):
        gate_fidelity(np.eye(4), np.eye(2))


def test_pi_over_4_is_cnot_up_to_phase():
    tl = resolve(fig2_program(), {"theta": np.pi / 4}, CHLOROFORM, instantaneous=True)
    U = extract_gate_unitary(tl, CHLOROFORM)
    cnot = np.eye(4, dtype=complex)
    cnot[:2, :2] = [[0, 1], [1, 0]]
    # b=up block is i*X, b=down is 1: CNOT followed by a phase gate on b
    phase_b = np.kron(np.diag([1j, 1]), np.eye(2))
    assert abs(U[0, 1]) == pytest.approx(1, abs=1e-12) and abs(U[0, 0]) < 1e-12
    assert gate_fidelity(U, ideal_gate(np.pi / 2)) > 1 - 1e-12
    assert gate_fidelity(U, phase_b @ cnot) > 1 - 1e-12


def test_bloch_vector_checkpoint_helper():
    # sanity for the analytic intermediate state e^{-i(pi/2 - theta)} |->
    theta = 0.4
    ket = np.exp(-1j * (np.pi / 2 - theta)) * np.array([1, -1]) / np.sqrt(2)
    np.testing.assert_allclose(bloch_vector(ket), [-1, 0, 0], atol=1e-15)
