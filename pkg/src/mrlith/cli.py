"""Command-line driver: ``mrl <stage> [options]``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import io, pipeline
from .config import PRESETS, load_config
from .errors import ConfigurationError, MRLError, ParseError
from .quantum import evolve_pulse, pure_state, rabi_peak, rabi_population

STAGES = ("synth", "compile", "evolve", "readout", "run", "oracle")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _parser():
    p = argparse.ArgumentParser(prog="mrl", description="Magnetic resonance lithography simulator.")
    p.add_argument("command", nargs="?", choices=STAGES, help="stage to run")
    p.add_argument("--stage", choices=STAGES, help="same as the positional stage name")
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--preset", action="append", default=[], choices=sorted(PRESETS),
                   help="apply a named preset before the config file (repeatable)")
    p.add_argument("--pattern", help="ASCII/PGM pattern file or builtin:<grating|t|atm>")
    p.add_argument("--seed", type=int, help="unsigned 64-bit RNG seed (required unless in the config)")
    p.add_argument("--workers", type=int, help="worker processes (default: MRL_WORKERS or 1)")
    p.add_argument("--out", help="output directory")
    oracle = p.add_argument_group("oracle")
    oracle.add_argument("--rabi", type=float, default=1.0, help="Rabi frequency, MHz")
    oracle.add_argument("--detuning", type=float, default=0.0, help="detuning, MHz")
    oracle.add_argument("--steps", type=int, default=2000, help="samples for the simulated check")
    return p


def _oracle(args):
    """Closed-form two-level peak and time trace against the integrator."""
    if args.rabi < 0:
        raise ConfigurationError("Rabi frequency must be >= 0")
    peak = rabi_peak(args.rabi, args.detuning)
    omega_eff = math.hypot(args.rabi, args.detuning)
    t_peak = 0.5 / omega_eff if omega_eff else 0.0
    record = {"rabi_mhz": args.rabi, "detuning_mhz": args.detuning, "p_max": peak, "t_peak_us": t_peak}
    if omega_eff:
        dt = t_peak / args.steps
        rho = evolve_pulse(pure_state(-1), np.full(args.steps, args.rabi, dtype=complex), dt, 1,
                           delta1=-args.detuning)
        sim = float(np.real(rho[1, 1]))
        record["p_simulated"] = sim
        record["abs_error"] = abs(sim - rabi_population(args.rabi, args.detuning, t_peak))
    sys.stdout.write(io.format_record(record))
    return EXIT_OK


def _error_record(exc, code):
    rec = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if isinstance(exc, ParseError):
        rec["line"] = exc.line
        rec["column"] = exc.column
    return json.dumps(rec)


def main(argv=None):
    parser = _parser()
    args = parser.parse_args(argv)
    if args.command and args.stage and args.command != args.stage:
        parser.error(f"conflicting stages {args.command!r} and {args.stage!r}")
    stage = args.command or args.stage
    if stage is None:
        parser.error("a stage is required")
    try:
        if stage == "oracle":
            return _oracle(args)
        cfg = load_config(args.config, args.preset, seed=args.seed, workers=args.workers, out=args.out,
                          pattern=args.pattern)
        out = io.ensure_dir(cfg.out)
        if stage == "run":
            result = pipeline.run_pipeline(cfg, out=out)
            sys.stdout.write(io.format_record(result.metrics))
            return EXIT_OK
        (out / pipeline.CONFIG_FILE).write_text(cfg.echo(), encoding="utf-8")
        timer = pipeline.Timer()
        if stage == "synth":
            seq = pipeline.stage_synth(cfg, out=out, timer=timer)
            print(f"wrote {len(seq.steps)} waveforms to {Path(out) / 'waveforms'}")
        elif stage == "compile":
            seq = pipeline.stage_compile(cfg, out=out, timer=timer)
            print(f"wrote {len(seq.steps)} steps ({seq.total_duration:g} us) to {Path(out) / pipeline.SEQUENCE_DIR}")
        elif stage == "evolve":
            sites, _ = pipeline.stage_evolve(cfg, out=out, timer=timer)
            print(f"wrote populations of {len(sites)} spins to {Path(out) / pipeline.POPULATIONS_FILE}")
        else:
            _, _, metrics = pipeline.stage_readout(cfg, out=out, timer=timer)
            sys.stdout.write(io.format_record(metrics))
        io.write_record(out / f"perf_{stage}.txt", timer.record())
        return EXIT_OK
    except (MRLError, ArithmeticError, ValueError, OSError) as exc:
        if isinstance(exc, OSError):
            code = EXIT_IO
        elif isinstance(exc, MRLError):
            code = exc.exit_code
        elif isinstance(exc, ArithmeticError):
            code = EXIT_NUMERIC
        else:
            code = EXIT_CONFIG
        print(_error_record(exc, code), file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
