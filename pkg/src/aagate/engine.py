"""Piecewise-constant propagation of two-spin states through a timeline.

States are plain numpy arrays: a length-4 ket (pure) or a 4x4 density
matrix, both in control-major ordering (spin b first).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .qcore import angular_momentum, bloch_vector, embed, expm_hermitian
from .seqlang import EventTimeline
from .sysmodel import (
    FrameSpec,
    SpinSystem,
    block_slice,
    canonical_frame,
    pulse_hamiltonian,
    pulse_rotation,
    rotating_frame_hamiltonian,
)

_A_INDEX = np.array([0, 1, 0, 1])
_B_INDEX = np.array([0, 0, 1, 1])


@dataclass
class SimOptions:
    """Knobs for :func:`simulate`.

    ``dt_record`` defaults to ``tau/200`` with ``tau = 1/(2J)``.
    """

    instantaneous_pulses: bool = False
    relaxation: bool = False
    dt_record: float | None = None
    dt_integrate: float = 1e-7
    promote: bool = True
    record: bool = True

    def __post_init__(self):
        if self.dt_record is not None and not self.dt_record > 0:
            raise ValueError("dt_record must be positive")
        if not self.dt_integrate > 0:
            raise ValueError("dt_integrate must be positive")


@dataclass(frozen=True)
class SegmentRecord:
    """Timeline segment as executed: its generator and the pulse frame in force."""

    start: float
    end: float
    kind: str
    hamiltonian: np.ndarray
    rotation: np.ndarray
    instantaneous: bool


@dataclass(frozen=True)
class Trajectory:
    """Sampled run.

    ``rotations[k]`` is the product of all ideal pulse rotations applied up
    to ``times[k]``; samples at a pulse instant hold the post-pulse state.
    """

    times: np.ndarray
    states: np.ndarray
    hamiltonians: np.ndarray
    rotations: np.ndarray
    segments: tuple[SegmentRecord, ...]
    dt_record: float
    instantaneous: bool

    @property
    def is_density(self) -> bool:
        return self.states.ndim == 3

    def __len__(self) -> int:
        return len(self.times)


def is_density(state: np.ndarray) -> bool:
    return np.ndim(state) == 2


def to_density(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    return state if is_density(state) else np.outer(state, state.conj())


def two_spin_ket(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product ket of target ``a`` and control ``b`` (control-major)."""
    return np.kron(np.asarray(b, dtype=complex), np.asarray(a, dtype=complex))


def apply_unitary(U: np.ndarray, state: np.ndarray) -> np.ndarray:
    if is_density(state):
        return U @ state @ U.conj().T
    return U @ state


def _damping_rates(sys: SpinSystem) -> np.ndarray:
    da = (_A_INDEX[:, None] != _A_INDEX[None, :]).astype(float)
    db = (_B_INDEX[:, None] != _B_INDEX[None, :]).astype(float)
    return da / sys.T2_a + db / sys.T2_b


def phase_damping_step(rho: np.ndarray, dt: float, sys: SpinSystem) -> np.ndarray:
    """Independent T2 dephasing of both spins over ``dt``.

    A coherence flipping only spin ``ch`` is scaled by ``exp(-dt/T2_ch)``;
    zero- and double-quantum coherences by the product of both factors.
    Populations are untouched.
    """
    if dt < 0:
        raise ValueError("dt must be >= 0")
    return rho * np.exp(-dt * _damping_rates(sys))


def pseudo_pure_state(epsilon: float) -> np.ndarray:
    """``(1 - eps) * 1/4 + eps * |up up><up up|``."""
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    rho = (1 - epsilon) * np.eye(4, dtype=complex) / 4
    rho[0, 0] += epsilon
    return rho


def prepare_plus(state: np.ndarray, channel: str) -> np.ndarray:
    """90 degree y rotation on ``channel``: takes +z to +x."""
    U = expm_hermitian(embed(angular_momentum("y"), channel), np.pi / 2)
    return apply_unitary(U, np.asarray(state, dtype=complex))


def conditional_state(state: np.ndarray, b_state: str) -> np.ndarray:
    """Normalized state of spin a inside one control block.

    Returns a ket for pure input and a unit-trace 2x2 block for density input.
    """
    sl = block_slice(b_state)
    if is_density(state):
        blk = state[sl, sl]
        tr = np.real(np.trace(blk))
        if tr <= 1e-12:
            raise ValueError(f"control block {b_state!r} is unpopulated")
        return blk / tr
    blk = state[sl]
    nrm = np.linalg.norm(blk)
    if nrm <= 1e-12:
        raise ValueError(f"control block {b_state!r} is unpopulated")
    return blk / nrm


def simulate(
    timeline: EventTimeline,
    sys: SpinSystem,
    frame: FrameSpec | None = None,
    init: np.ndarray | None = None,
    opts: SimOptions | None = None,
) -> tuple[np.ndarray, Trajectory | None]:
    """Propagate ``init`` through ``timeline`` in the rotating frame.

    Delays use the exact propagator of the rotating-frame Hamiltonian;
    instantaneous pulses apply ``exp(-i angle n.I)`` at a point in time;
    finite pulses step through ``pulse_hamiltonian`` in increments of at most
    ``dt_integrate``. With relaxation enabled, :func:`phase_damping_step` is
    interleaved after every step (pure inputs are promoted to density
    matrices unless ``opts.promote`` is false).

    Returns
    -------
    final : ndarray
    traj : Trajectory or None
        ``None`` when ``opts.record`` is false.
    """
    frame = frame or canonical_frame(sys)
    opts = opts or SimOptions()
    if init is None:
        raise ValueError("an initial state is required")
    state = np.array(init, dtype=complex)
    if state.shape not in ((4,), (4, 4)):
        raise ValueError(f"expected a two-spin state, got shape {state.shape}")
    if opts.relaxation and not is_density(state):
        if not opts.promote:
            raise ValueError("relaxation requires a density matrix (promotion disabled)")
        state = to_density(state)
    if opts.instantaneous_pulses:
        timeline = timeline.instantaneous()
    dt_record = opts.dt_record or sys.tau / 200

    H_free = rotating_frame_hamiltonian(sys, frame)
    rot = np.eye(4, dtype=complex)
    times, states, hams, rots, seg_records = [], [], [], [], []
    all_instant = all(s.duration == 0 for s in timeline.segments if s.kind == "pulse")

    def record(t, H):
        if not opts.record:
            return
        if times and times[-1] == t:
            states[-1], hams[-1], rots[-1] = state.copy(), H, rot.copy()
            return
        times.append(t)
        states.append(state.copy())
        hams.append(H)
        rots.append(rot.copy())

    def step_many(H, t0, duration, n):
        nonlocal state
        h = duration / n
        U = expm_hermitian(H, h)
        for k in range(n):
            state = apply_unitary(U, state)
            if opts.relaxation:
                state = phase_damping_step(state, h, sys)
            yield t0 + duration if k == n - 1 else t0 + (k + 1) * h

    record(0.0, H_free)
    for seg in timeline.segments:
        if seg.kind == "pulse" and seg.duration == 0:
            R = pulse_rotation(seg.pulse)
            state = apply_unitary(R, state)
            rot = R @ rot
            seg_records.append(SegmentRecord(seg.start, seg.end, "pulse", H_free, rot.copy(), True))
            record(seg.start, H_free)
        elif seg.kind == "pulse":
            H = pulse_hamiltonian(seg.pulse, sys, frame)
            n = max(1, math.ceil(seg.duration / opts.dt_integrate - 1e-9))
            for _ in step_many(H, seg.start, seg.duration, n):
                pass
            seg_records.append(SegmentRecord(seg.start, seg.end, "pulse", H, rot.copy(), False))
            rot = pulse_rotation(seg.pulse) @ rot
            record(seg.end, H)
        elif seg.duration > 0:
            seg_records.append(SegmentRecord(seg.start, seg.end, "delay", H_free, rot.copy(), True))
            n = max(1, math.ceil(seg.duration / dt_record - 1e-9))
            for t in step_many(H_free, seg.start, seg.duration, n):
                record(t, H_free)

    traj = None
    if opts.record:
        traj = Trajectory(
            times=np.array(times),
            states=np.array(states),
            hamiltonians=np.array(hams),
            rotations=np.array(rots),
            segments=tuple(seg_records),
            dt_record=dt_record,
            instantaneous=all_instant,
        )
    return state, traj


def write_trajectory_csv(traj: Trajectory, path: str | Path) -> Path:
    """Export a trajectory: time, amplitudes (or density entries), Bloch vectors.

    Conditional Bloch vectors of spin a are reported for both control
    blocks; an unpopulated block yields NaN.
    """
    path = Path(path)
    if traj.is_density:
        amp_cols = [f"rho{i}{j}_{part}" for i in range(4) for j in range(4) for part in ("re", "im")]
    else:
        amp_cols = [f"psi{i}_{part}" for i in range(4) for part in ("re", "im")]
    bloch_cols = [f"bloch_{b}_{ax}" for b in ("up", "down") for ax in "xyz"]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", *amp_cols, *bloch_cols])
        for t, st in zip(traj.times, traj.states):
            flat = st.reshape(-1)
            amps = [v for z in flat for v in (z.real, z.imag)]
            blochs = []
            for b in ("up", "down"):
                try:
                    blochs.extend(bloch_vector(conditional_state(st, b)))
                except ValueError:
                    blochs.extend([float("nan")] * 3)
            writer.writerow([repr(float(t)), *map(repr, map(float, amps)), *map(repr, map(float, blochs))])
    return path
