"""Command-line entry point: ``aagate <subcommand> [flags]``.

Every subcommand writes CSV files into ``--out`` and prints a short summary.
"""

from __future__ import annotations

import argparse
import sys as _sys
from pathlib import Path

import numpy as np

from . import harness
from .engine import SimOptions, simulate, two_spin_ket, write_trajectory_csv
from .qcore import PLUS
from .readout import readout_state, spectrum, synthesize_fid, write_fid_csv, write_spectrum_csv
from .seqlang import SeqError, load_program, resolve
from .sysmodel import CHLOROFORM


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--theta", type=float, default=None, help="slice angle (rad)")
    p.add_argument("--finite-pulses", action="store_true", help="use the programmed pulse widths")
    p.add_argument("--relaxation", action="store_true", help="enable T2 phase damping")
    p.add_argument("--epsilon", type=float, default=1.0, help="pseudo-pure polarization fraction")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory for CSV files")
    p.add_argument("--fid-duration", type=float, default=1.0, help="acquisition time (s)")
    p.add_argument("--fid-dt", type=float, default=1e-4, help="dwell time (s)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="aagate", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[common], help="run a .seq program")
    sim.add_argument("program", type=Path)
    sim.add_argument("--init", choices=("plus-up", "plus-down", "readout"), default="readout",
                     help="initial state: |+>_a|up>_b, |+>_a|down>_b, or the pseudo-pure readout state")

    sub.add_parser("fig3-sweep", parents=[common], help="phase vs solid angle sweep")
    sub.add_parser("gate-check", parents=[common], help="compare the extracted gate with the ideal one")
    sub.add_parser("decoherence-compare", parents=[common], help="coherence retention table")
    return parser


def _cmd_simulate(args) -> None:
    prog = load_program(args.program)
    overrides = {"theta": args.theta} if args.theta is not None else {}
    tl = resolve(prog, overrides, CHLOROFORM, instantaneous=not args.finite_pulses)
    if args.init == "readout":
        init = readout_state(args.epsilon)
    else:
        b = np.array([1, 0]) if args.init == "plus-up" else np.array([0, 1])
        init = two_spin_ket(PLUS, b)
    final, traj = simulate(tl, CHLOROFORM, init=init, opts=SimOptions(relaxation=args.relaxation))
    args.out.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(traj, args.out / "trajectory.csv")
    rho = final if final.ndim == 2 else np.outer(final, final.conj())
    fid = synthesize_fid(rho, CHLOROFORM, args.fid_duration, args.fid_dt, args.relaxation)
    write_fid_csv(fid, args.out / "fid.csv")
    write_spectrum_csv(spectrum(fid), args.out / "spectrum.csv")
    print(f"segments: {len(tl.segments)}  total duration: {tl.total_duration:.6e} s  samples: {len(traj)}")
    print(f"wrote trajectory.csv, fid.csv, spectrum.csv to {args.out}")


def _cmd_sweep(args) -> None:
    res = harness.run_fig3_sweep(finite_pulses=args.finite_pulses, relaxation=args.relaxation,
                                 epsilon=args.epsilon, fid_duration=args.fid_duration,
                                 fid_dt=args.fid_dt, out=args.out)
    dev = np.max(np.abs(np.abs(res.column("beta_gate_unwrapped")) - res.column("omega") / 2))
    print(f"points: {len(res.rows)}  slope |beta|/omega: {res.slope:.12f}  max deviation: {dev:.3e} rad")
    print(f"wrote {res.csv_path}")


def _cmd_gate_check(args) -> None:
    theta = np.pi / 4 if args.theta is None else args.theta
    chk = harness.run_gate_check(theta, args.finite_pulses, out=args.out)
    np.set_printoptions(precision=6, suppress=True)
    print(chk.unitary)
    print(f"beta: {chk.beta:.12f}  fidelity vs ideal: {chk.fidelity:.12f}  "
          f"b=down identity fidelity: {chk.down_block_fidelity:.12f}")


def _cmd_decoherence(args) -> None:
    rep = harness.run_decoherence_compare(out=args.out)
    for r in rep["rows"]:
        print(f"{r['gate']:<24} {r['gate_time'] * 1e3:8.4f} ms  {r['nucleus']:>4}  retention {r['retention']:.4f}")
    print(f"readout amplitude ratio (relaxation on/off): {rep['readout_amplitude_ratio']:.6f}")


_COMMANDS = {
    "simulate": _cmd_simulate,
    "fig3-sweep": _cmd_sweep,
    "gate-check": _cmd_gate_check,
    "decoherence-compare": _cmd_decoherence,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except (SeqError, ValueError, OSError) as exc:
        print(f"aagate: error: {exc}", file=_sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
