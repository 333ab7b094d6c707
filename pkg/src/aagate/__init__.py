"""Simulation of a nonadiabatic geometric controlled-phase gate on a 1H-13C spin pair."""

from .engine import SimOptions, Trajectory, prepare_plus, pseudo_pure_state, simulate, two_spin_ket
from .phase import (
    BlochLoop,
    PhaseReport,
    extract_gate_unitary,
    gate_fidelity,
    ideal_gate,
    pancharatnam_phase,
    phase_decomposition,
    slice_circuit,
    solid_angle,
    toggling_trajectory,
)
from .harness import run_decoherence_compare, run_fig3_sweep, run_gate_check
from .readout import measure_beta, spectrum, synthesize_fid
from .seqlang import EventTimeline, PulseProgram, SeqError, fig2_program, parse, resolve
from .sysmodel import CHLOROFORM, FrameSpec, PulseSpec, SpinSystem, canonical_frame

__version__ = "0.1.0"
