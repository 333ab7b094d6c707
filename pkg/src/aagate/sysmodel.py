"""Two-spin sample description and the Hamiltonians it generates.

Angular frequencies are in rad/s, the scalar coupling ``J`` in Hz. The
engine always works in a rotating frame; lab-frame Larmor frequencies are
kept so the frame offsets can be computed explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qcore import angular_momentum, embed, expm_hermitian

TWO_PI = 2.0 * np.pi

AXIS_PHASES = {"x": 0.0, "y": np.pi / 2, "-x": np.pi, "-y": 3 * np.pi / 2}


@dataclass(frozen=True)
class SpinSystem:
    """Heteronuclear spin pair: target ``a`` (1H) and control ``b`` (13C).

    Attributes
    ----------
    omega_a, omega_b : float
        Larmor angular frequencies (rad/s).
    J : float
        Scalar coupling constant (Hz).
    T2_a, T2_b : float
        Transverse relaxation times (s).
    channels : dict
        Human-readable nucleus names for each spin label.
    """

    omega_a: float = TWO_PI * 500e6
    omega_b: float = TWO_PI * 125e6
    J: float = 214.9
    T2_a: float = 0.4
    T2_b: float = 0.3
    channels: dict = field(default_factory=lambda: {"a": "1H", "b": "13C"}, compare=False)

    def __post_init__(self):
        if not self.J > 0:
            raise ValueError(f"J must be positive, got {self.J}")
        if not (self.T2_a > 0 and self.T2_b > 0):
            raise ValueError("T2 times must be positive")
        if self.omega_a == self.omega_b:
            raise ValueError("omega_a and omega_b must differ (heteronuclear pair)")

    @property
    def tau(self) -> float:
        """Free-evolution delay ``1/(2J)`` of the gate sequence."""
        return 1.0 / (2.0 * self.J)

    def T2(self, channel: str) -> float:
        return {"a": self.T2_a, "b": self.T2_b}[channel]


CHLOROFORM = SpinSystem()


@dataclass(frozen=True)
class FrameSpec:
    """Rotation rates (rad/s) of the reference frame of each spin.

    ``offset_a``/``offset_b`` optionally pin ``omega - frame_freq`` exactly;
    at ~3e9 rad/s the absolute frame frequency alone loses ~5e-7 rad/s.
    """

    frame_freq_a: float
    frame_freq_b: float
    offset_a: float | None = None
    offset_b: float | None = None

    @classmethod
    def from_offsets(cls, sys: SpinSystem, offset_a: float, offset_b: float) -> "FrameSpec":
        return cls(sys.omega_a - offset_a, sys.omega_b - offset_b, offset_a, offset_b)

    def offsets(self, sys: SpinSystem) -> tuple[float, float]:
        off_a = sys.omega_a - self.frame_freq_a if self.offset_a is None else self.offset_a
        off_b = sys.omega_b - self.frame_freq_b if self.offset_b is None else self.offset_b
        return off_a, off_b


def canonical_frame(sys: SpinSystem) -> FrameSpec:
    """Experiment frame: spin a carrier shifted down by ``pi J``, b on resonance."""
    return FrameSpec.from_offsets(sys, np.pi * sys.J, 0.0)


@dataclass(frozen=True)
class PulseSpec:
    """A resonant RF pulse on one channel.

    ``duration == 0`` denotes an ideal instantaneous rotation.
    """

    channel: str
    phase: float
    angle: float
    duration: float = 0.0

    def __post_init__(self):
        if self.channel not in ("a", "b"):
            raise ValueError(f"channel must be 'a' or 'b', got {self.channel!r}")
        if self.duration < 0:
            raise ValueError(f"pulse duration must be >= 0, got {self.duration}")

    @property
    def nutation_rate(self) -> float:
        """``omega_1 = angle / duration`` (rad/s); finite pulses only."""
        if self.duration == 0:
            raise ValueError("nutation rate undefined for an instantaneous pulse")
        return self.angle / self.duration

    @property
    def axis(self) -> np.ndarray:
        return np.array([np.cos(self.phase), np.sin(self.phase), 0.0])

    def with_duration(self, duration: float) -> "PulseSpec":
        return PulseSpec(self.channel, self.phase, self.angle, duration)


def _zz(sys: SpinSystem) -> np.ndarray:
    return TWO_PI * sys.J * embed(angular_momentum("z"), "a") @ embed(angular_momentum("z"), "b")


def lab_hamiltonian(sys: SpinSystem) -> np.ndarray:
    """``omega_a Iz^a + omega_b Iz^b + 2 pi J Iz^a Iz^b``."""
    Iz = angular_momentum("z")
    return sys.omega_a * embed(Iz, "a") + sys.omega_b * embed(Iz, "b") + _zz(sys)


def rotating_frame_hamiltonian(sys: SpinSystem, frame: FrameSpec) -> np.ndarray:
    """Lab Hamiltonian with each spin's frame rotation subtracted.

    Offsets are formed as scalars before building the matrix so the Larmor
    terms cancel exactly.
    """
    Iz = angular_momentum("z")
    off_a, off_b = frame.offsets(sys)
    return off_a * embed(Iz, "a") + off_b * embed(Iz, "b") + _zz(sys)


def conditional_hamiltonian(sys: SpinSystem, frame: FrameSpec, b_state: str) -> np.ndarray:
    """2x2 Hamiltonian of spin a inside the ``b_state`` block ('up' or 'down')."""
    H = rotating_frame_hamiltonian(sys, frame)
    sl = block_slice(b_state)
    return H[sl, sl]


def block_slice(b_state: str) -> slice:
    """Index range of the control-spin block in control-major ordering."""
    if b_state == "up":
        return slice(0, 2)
    if b_state == "down":
        return slice(2, 4)
    raise ValueError(f"b_state must be 'up' or 'down', got {b_state!r}")


def pulse_field(pulse: PulseSpec) -> np.ndarray:
    """RF generator ``cos(phi) Ix + sin(phi) Iy`` on the pulse channel (4x4)."""
    gen = np.cos(pulse.phase) * angular_momentum("x") + np.sin(pulse.phase) * angular_momentum("y")
    return embed(gen, pulse.channel)


def pulse_hamiltonian(pulse: PulseSpec, sys: SpinSystem, frame: FrameSpec) -> np.ndarray:
    """Rotating-frame Hamiltonian during a finite pulse.

    The free term (offsets and coupling) stays on; the RF adds
    ``omega_1 (cos(phi) Ix + sin(phi) Iy)`` on the pulse channel.
    """
    if pulse.duration <= 0:
        raise ValueError("pulse_hamiltonian requires a finite-duration pulse")
    return rotating_frame_hamiltonian(sys, frame) + pulse.nutation_rate * pulse_field(pulse)


def pulse_rotation(pulse: PulseSpec) -> np.ndarray:
    """Ideal rotation ``exp(-i angle (n.I))`` on the pulse channel (4x4)."""
    return expm_hermitian(pulse_field(pulse), pulse.angle)
