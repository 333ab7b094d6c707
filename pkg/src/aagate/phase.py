"""Geometric content of a cyclic run: Bloch loops, phases, gate unitaries.

Three independent routes give the geometric phase of the target spin:

* ``phase_decomposition``: total phase minus the integrated energy,
* ``pancharatnam_phase``: the discrete Bargmann invariant of the sampled states,
* ``solid_angle``: half the oriented area enclosed on the Bloch sphere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import SimOptions, Trajectory, simulate
from .qcore import (
    PLUS,
    UndefinedPhaseError,
    bloch_vector,
    is_unitary,
    overlap_phase,
    wrap_phase,
)
from .seqlang import EventTimeline
from .sysmodel import FrameSpec, SpinSystem, block_slice

CLOSURE_TOL = 1e-6


class NonCyclicError(ValueError):
    """The toggling-frame path does not return to its starting ray."""


class SelfIntersectionError(ValueError):
    """A Bloch loop crosses itself, so its enclosed area is ambiguous."""


@dataclass(frozen=True)
class BlochLoop:
    """Sampled closed path on the Bloch sphere, optionally with its kets."""

    points: np.ndarray
    states: np.ndarray | None = None
    times: np.ndarray | None = None

    @property
    def closure_gap(self) -> float:
        return float(np.linalg.norm(self.points[0] - self.points[-1]))

    @property
    def is_closed(self) -> bool:
        return self.closure_gap <= CLOSURE_TOL


@dataclass(frozen=True)
class PhaseReport:
    """Phase bookkeeping for one control branch of a cyclic run.

    ``winding`` is the spin projection ``m`` (+-1/2) for which
    ``geometric_phase == m * solid_angle`` modulo 2 pi.
    """

    total_phase: float
    dynamic_phase: float
    geometric_phase: float
    pancharatnam: float
    solid_angle: float
    winding: float
    segment_dynamic: tuple[float, ...] = ()

    def csv_row(self, theta: float) -> dict:
        return {
            "theta": theta,
            "omega": 4 * theta,
            "total": self.total_phase,
            "dynamic": self.dynamic_phase,
            "geometric": self.geometric_phase,
            "pancharatnam": self.pancharatnam,
            "solid_angle_half": self.solid_angle / 2,
        }


def _toggling_states(traj: Trajectory, b_state: str) -> np.ndarray:
    if traj.is_density:
        raise ValueError("toggling-frame phases need a pure-state trajectory")
    if not traj.instantaneous:
        raise ValueError("toggling frame is undefined inside finite pulses")
    sl = block_slice(b_state)
    blocks = traj.states[:, sl]
    norms = np.linalg.norm(blocks, axis=1)
    if np.any(norms <= 1e-12):
        raise ValueError(f"control block {b_state!r} is unpopulated")
    rot = traj.rotations[:, sl, sl]
    # undo the accumulated pulse frame: psi_tog = R^dagger psi_rot
    return np.einsum("kji,kj->ki", rot.conj(), blocks) / norms[:, None]


def toggling_trajectory(traj: Trajectory, b_state: str) -> BlochLoop:
    """Conditional target-spin path in the pulse (toggling) frame."""
    states = _toggling_states(traj, b_state)
    points = np.array([bloch_vector(s) for s in states])
    return BlochLoop(points, states, traj.times.copy())


def _segment_energy_integrals(traj: Trajectory, states: np.ndarray, b_state: str) -> list[float]:
    """``integral <psi|H_tog|psi> dt`` for every segment of nonzero length."""
    sl = block_slice(b_state)
    out = []
    for seg in traj.segments:
        if seg.end <= seg.start:
            continue
        idx = np.nonzero((traj.times >= seg.start) & (traj.times <= seg.end))[0]
        R = seg.rotation[sl, sl]
        H_tog = R.conj().T @ seg.hamiltonian[sl, sl] @ R
        e = np.real(np.einsum("ki,ij,kj->k", states[idx].conj(), H_tog, states[idx]))
        t = traj.times[idx]
        out.append(float(np.sum(0.5 * (e[1:] + e[:-1]) * np.diff(t))))
    return out


def phase_decomposition(traj: Trajectory, b_state: str) -> PhaseReport:
    """Split the cyclic phase of one control branch into dynamic and geometric parts.

    Raises
    ------
    NonCyclicError
        If the toggling-frame Bloch path does not close within 1e-6.
    """
    loop = toggling_trajectory(traj, b_state)
    if not loop.is_closed:
        raise NonCyclicError(f"closure gap {loop.closure_gap:.3g} exceeds {CLOSURE_TOL}")
    states = loop.states
    total = overlap_phase(states[0], states[-1])
    seg_int = _segment_energy_integrals(traj, states, b_state)
    dynamic = -float(np.sum(seg_int))
    geometric = wrap_phase(total - dynamic)
    omega = solid_angle(loop)
    return PhaseReport(
        total_phase=total,
        dynamic_phase=dynamic,
        geometric_phase=geometric,
        pancharatnam=pancharatnam_phase(loop),
        solid_angle=omega,
        winding=_winding(geometric, omega),
        segment_dynamic=tuple(-v for v in seg_int),
    )


def _winding(geometric: float, omega: float) -> float:
    if abs(omega) < 1e-9:
        return 0.5
    plus = abs(wrap_phase(geometric - omega / 2))
    minus = abs(wrap_phase(geometric + omega / 2))
    return 0.5 if plus <= minus else -0.5


def pancharatnam_phase(loop) -> float:
    """Discrete geometric phase ``arg prod_k <psi_{k+1}|psi_k>`` of a closed chain.

    The chain wraps around (the last state is compared with the first), so
    the value is invariant under independent phase changes of every sample.
    Accepts a :class:`BlochLoop` carrying states or an ``(N, d)`` array.

    Raises
    ------
    UndefinedPhaseError
        If two consecutive samples are orthogonal.
    """
    states = loop.states if isinstance(loop, BlochLoop) else loop
    if states is None:
        raise ValueError("loop carries no states")
    states = np.asarray(states, dtype=complex)
    if len(states) < 3:
        raise ValueError("need at least 3 samples")
    nxt = np.roll(states, -1, axis=0)
    ov = np.einsum("ki,ki->k", nxt.conj(), states)
    mag = np.abs(ov)
    if np.any(mag <= 1e-9):
        raise UndefinedPhaseError("consecutive samples are orthogonal")
    return wrap_phase(np.angle(np.prod(ov / mag)))


def _arcs_cross(P: np.ndarray, eps: float = 1e-9) -> bool:
    """Proper crossing test between all non-adjacent great-circle arcs."""
    A = P
    B = np.roll(P, -1, axis=0)
    n = np.cross(A, B)
    m = len(P)
    s_a = n @ A.T  # s_a[i, j] = n_i . A_j
    s_b = n @ B.T
    straddle = (s_a * s_b < 0) & (np.abs(s_a) > eps) & (np.abs(s_b) > eps)
    mid = A + B
    same_side = (mid @ mid.T) > 0
    cross = straddle & straddle.T & same_side
    i, j = np.triu_indices(m, k=2)
    keep = ~((i == 0) & (j == m - 1))
    return bool(np.any(cross[i[keep], j[keep]]))


def solid_angle(loop, check_simple: bool = True, max_check_points: int = 512) -> float:
    """Oriented solid angle enclosed by a closed Bloch loop.

    Sums the signed spherical excess of the triangle fan from a reference
    direction (loop centroid, or the best-fit plane normal when the loop is
    a great circle). Counter-clockwise loops seen from outside the sphere
    are positive. Result lies in ``(-4 pi, 4 pi)``.
    """
    P = loop.points if isinstance(loop, BlochLoop) else np.asarray(loop, dtype=float)
    P = P / np.linalg.norm(P, axis=1, keepdims=True)
    if np.linalg.norm(P[0] - P[-1]) > CLOSURE_TOL:
        raise NonCyclicError("loop is not closed")
    if len(P) > 1:
        P = P[:-1]
    if len(P) < 3:
        return 0.0
    if check_simple:
        stride = max(1, int(np.ceil(len(P) / max_check_points)))
        if _arcs_cross(P[::stride]):
            raise SelfIntersectionError("loop crosses itself")
    centroid = P.mean(axis=0)
    if np.linalg.norm(centroid) > 0.1:
        ref = centroid / np.linalg.norm(centroid)
    else:
        ref = np.linalg.svd(P, full_matrices=False)[2][-1]
    Q = np.roll(P, -1, axis=0)
    num = np.einsum("ij,ij->i", P, np.cross(Q, ref[None, :]))
    den = 1.0 + P @ ref + Q @ ref + np.einsum("ij,ij->i", P, Q)
    total = float(np.sum(2.0 * np.arctan2(num, den)))
    return float(np.fmod(total, 4 * np.pi))


def extract_gate_unitary(
    timeline: EventTimeline,
    sys: SpinSystem,
    frame: FrameSpec | None = None,
    opts: SimOptions | None = None,
) -> np.ndarray:
    """Full 4x4 propagator of ``timeline``, one basis column per simulation."""
    base = opts or SimOptions()
    run = SimOptions(
        instantaneous_pulses=base.instantaneous_pulses,
        relaxation=False,
        dt_integrate=base.dt_integrate,
        record=False,
    )
    cols = [simulate(timeline, sys, frame, np.eye(4, dtype=complex)[:, k], run)[0] for k in range(4)]
    U = np.column_stack(cols)
    if not is_unitary(U):
        raise ValueError("extracted propagator is not unitary")
    return U


def ideal_gate(beta: float) -> np.ndarray:
    """Controlled geometric-phase gate: ``[[cos b, i sin b], [i sin b, cos b]]`` on b=up, identity on b=down."""
    U = np.eye(4, dtype=complex)
    U[0, 0] = U[1, 1] = np.cos(beta)
    U[0, 1] = U[1, 0] = 1j * np.sin(beta)
    return U


def gate_fidelity(U: np.ndarray, V: np.ndarray) -> float:
    """Global-phase-invariant overlap ``|Tr(U^dagger V)| / d``."""
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    if U.shape != V.shape:
        raise ValueError(f"dimension mismatch: {U.shape} vs {V.shape}")
    if not (is_unitary(U, 1e-8) and is_unitary(V, 1e-8)):
        raise ValueError("gate_fidelity expects unitary inputs")
    return float(abs(np.trace(U.conj().T @ V)) / U.shape[0])


def conditional_phase(U: np.ndarray) -> float:
    """Relative phase the gate imprints on ``|+>_a`` when b is up versus down.

    Equals ``beta`` for ``ideal_gate(beta)`` regardless of global phase.
    """
    up = np.kron([1, 0], PLUS)
    down = np.kron([0, 1], PLUS)
    return wrap_phase(np.angle(np.vdot(up, U @ up)) - np.angle(np.vdot(down, U @ down)))


def block_identity_fidelity(U: np.ndarray) -> float:
    """How close the b=down block of ``U`` is to the identity, up to phase."""
    blk = np.asarray(U)[2:, 2:]
    return float(abs(np.trace(blk)) / 2)


def slice_circuit(theta: float, samples_per_arc: int = 2000) -> BlochLoop:
    """Analytic slice circuit: two half-turns of ``|+>`` about tilted axes.

    The axes are ``(0, -sin t, cos t)`` then ``(0, -sin t, -cos t)``; kets
    carry the phase of ``exp(-i phi n.sigma/2)``.
    """
    s, c = np.sin(theta), np.cos(theta)
    phis = np.linspace(0.0, np.pi, samples_per_arc + 1)
    kets = []
    start = PLUS
    for k, n in enumerate(((0.0, -s, c), (0.0, -s, -c))):
        nsig = np.array([[n[2], n[0] - 1j * n[1]], [n[0] + 1j * n[1], -n[2]]])
        arc = [
            (np.cos(p / 2) * np.eye(2) - 1j * np.sin(p / 2) * nsig) @ start
            for p in (phis if k == 0 else phis[1:])
        ]
        kets.extend(arc)
        start = arc[-1]
    kets = np.array(kets)
    return BlochLoop(np.array([bloch_vector(k) for k in kets]), kets)


__all__ = [
    "BlochLoop",
    "PhaseReport",
    "NonCyclicError",
    "SelfIntersectionError",
    "UndefinedPhaseError",
    "toggling_trajectory",
    "phase_decomposition",
    "pancharatnam_phase",
    "solid_angle",
    "extract_gate_unitary",
    "ideal_gate",
    "gate_fidelity",
    "conditional_phase",
    "block_identity_fidelity",
    "slice_circuit",
]
