"""Stage functions and the end-to-end run.

Each stage reads the previous stage's files from the output directory, so
``run`` and the chained stages produce the same artifacts.
"""

from __future__ import annotations

import math
import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .config import RunConfig
from .errors import ConfigurationError, MeasurementError
from .lattice import SpinSite, build_lattice
from .noise import NO_NOISE
from .patterns import resolve_pattern
from .pulses import PatternProfile, write_waveform
from .quantum import DephasingParams, evolve_pulse, evolve_spin, populations, pure_state
from .readout import ExposureMap, exposure_map, fwhm, pattern_metrics, resist_threshold
from .readout import contrast as on_off_contrast
from .readout import correlation
from .sequence import PatternGrid, PulseSequence, compile_1d, compile_2d, schedule_report

SEQUENCE_DIR = "sequence"
POPULATIONS_FILE = "populations.csv"
DOSE_CSV = "dose.csv"
DOSE_PGM = "dose.pgm"
RESIST_PGM = "resist.pgm"
METRICS_FILE = "metrics.txt"
CONFIG_FILE = "config.txt"
PERF_FILE = "perf.txt"


class Timer:
    """Wall time per stage, written to ``perf.txt``."""

    def __init__(self):
        self.stages = {}
        self.extra = {}

    def stage(self, name):
        timer = self

        class _Span:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.stages[name] = timer.stages.get(name, 0.0) + time.perf_counter() - self.t0

        return _Span()

    def record(self):
        out = {f"{k}_s": round(v, 6) for k, v in self.stages.items()}
        out.update(self.extra)
        return out


# ---------------------------------------------------------------- inputs

def load_target(cfg: RunConfig, pattern=None):
    """The target grid, with pixel pitch equal to the spin pitch."""
    if isinstance(pattern, PatternGrid):
        return pattern
    grid = resolve_pattern(pattern or cfg.pattern, cfg.pitch_nm, cfg.fov_nm, (cfg.chirp_start_nm, cfg.chirp_end_nm))
    if cfg.mode == "1d" and grid.height != 1:
        raise ConfigurationError(f"1d mode needs a single-row pattern, got {grid.height} rows")
    return PatternGrid(grid.values, cfg.pitch_nm)


def lattice_for(cfg: RunConfig, grid: PatternGrid):
    """One spin per target pixel, centered on the configured center."""
    center = (cfg.center_x_nm, cfg.center_y_nm)
    if cfg.mode == "1d":
        return build_lattice(grid.width, 1, cfg.pitch_nm, cfg.x_wires, None, cfg.zeeman, cfg.depth_nm, center)
    return build_lattice(grid.width, grid.height, cfg.pitch_nm, cfg.x_wires, cfg.y_wires, cfg.zeeman,
                         cfg.depth_nm, center)


def compile_target(cfg: RunConfig, grid: PatternGrid) -> PulseSequence:
    ccfg = cfg.compile_config()
    if cfg.mode == "1d":
        profile = PatternProfile(grid.x_positions(cfg.center_x_nm), grid.values[0])
        return compile_1d(profile, ccfg, cfg.tau_1d_us, cfg.n_1d)
    return compile_2d(grid, ccfg)


# ---------------------------------------------------------------- evolution

_WORKER_STATE = {}


def _init_worker(seq, noise, dephasing, frame):
    _WORKER_STATE.update(seq=seq, noise=noise, dephasing=dephasing, frame=frame)


def _evolve_chunk(sites):
    s = _WORKER_STATE
    rho0 = s["seq"].initial_state
    return np.array([populations(evolve_spin(rho0, s["seq"], site, s["noise"], s["dephasing"], s["frame"]))
                     for site in sites]).reshape(-1, 3)


def warm_up():
    """Compile the propagation kernel once so forked workers inherit it."""
    evolve_pulse(pure_state(-1), np.ones(2, dtype=complex), 0.01, 1)


def chunks(items, n):
    """``n`` contiguous, nearly equal slices (order preserved)."""
    n = max(1, min(n, len(items)))
    bounds = np.linspace(0, len(items), n + 1).round().astype(int)
    return [items[bounds[k]:bounds[k + 1]] for k in range(n)]


def evolve_lattice(seq: PulseSequence, sites, noise=NO_NOISE, dephasing=DephasingParams(), frame="interaction",
                   workers=1):
    """Populations (n_sites, 3) of every site after ``seq``.

    Spins are independent, so the result does not depend on ``workers``.
    """
    if not sites:
        return np.zeros((0, 3))
    warm_up()
    parts = chunks(list(sites), workers)
    if len(parts) == 1:
        _init_worker(seq, noise, dephasing, frame)
        return _evolve_chunk(parts[0])
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(len(parts), mp_context=ctx, initializer=_init_worker,
                             initargs=(seq, noise, dephasing, frame)) as pool:
        results = list(pool.map(_evolve_chunk, parts))
    return np.concatenate(results, axis=0)


# ---------------------------------------------------------------- metrics

@dataclass(frozen=True)
class RunResult:
    out: Path
    metrics: dict
    populations: np.ndarray
    exposure: ExposureMap


def middle_line_fwhm(emap: ExposureMap, cfg: RunConfig):
    """Width of the feature nearest the pattern center, measured along x
    on the surface row through the center."""
    profile = emap.row(cfg.center_y_nm)
    start = int(np.argmin(np.abs(emap.x - cfg.center_x_nm)))
    return fwhm(profile, emap.pitch, peak=start)


def compute_metrics(cfg: RunConfig, grid: PatternGrid, sites, pops, emap: ExposureMap):
    target = grid.values.ravel()
    bright = pops[:, 1]
    on = target > 0.5
    pm = pattern_metrics(emap, target, [s.x_nm for s in sites], [s.y_nm for s in sites])
    out = {
        "n_spins": len(sites),
        "population_on_mean": float(bright[on].mean()) if on.any() else math.nan,
        "population_off_mean": float(bright[~on].mean()) if (~on).any() else math.nan,
        "population_off_max": float(bright[~on].max()) if (~on).any() else math.nan,
        "population_contrast": on_off_contrast(bright, on),
        "population_correlation": correlation(bright, target),
        "dose_contrast": pm.contrast,
        "dose_mae": pm.mae,
        "dose_correlation": pm.correlation,
        "contrast_defined": pm.contrast_defined,
        "dose_max": float(emap.dose.max()),
    }
    if cfg.mode == "2d":
        try:
            out["middle_fwhm_nm"] = middle_line_fwhm(emap, cfg)
        except MeasurementError:
            out["middle_fwhm_nm"] = math.nan
    return out


# ---------------------------------------------------------------- stages

def stage_synth(cfg: RunConfig, pattern=None, out=None, timer=None):
    """Pattern to waveform CSVs only."""
    out = io.ensure_dir(out or cfg.out)
    timer = timer or Timer()
    grid = load_target(cfg, pattern)
    with timer.stage("synth"):
        seq = compile_target(cfg, grid)
    wdir = io.ensure_dir(out / "waveforms")
    for k, step in enumerate(seq.steps):
        write_waveform(step.pulse, wdir / f"step{k:04d}.csv")
    return seq


def stage_compile(cfg: RunConfig, pattern=None, out=None, timer=None):
    out = io.ensure_dir(out or cfg.out)
    timer = timer or Timer()
    grid = load_target(cfg, pattern)
    with timer.stage("compile"):
        seq = compile_target(cfg, grid)
    with timer.stage("write_sequence"):
        io.write_sequence(out / SEQUENCE_DIR, seq, cfg.write_waveforms)
    io.write_record(out / "schedule.txt", schedule_report(seq).as_dict())
    return seq


def stage_evolve(cfg: RunConfig, pattern=None, out=None, timer=None, seq=None):
    out = io.ensure_dir(out or cfg.out)
    timer = timer or Timer()
    grid = load_target(cfg, pattern)
    if seq is None:
        with timer.stage("read_sequence"):
            seq = io.read_sequence(out / SEQUENCE_DIR / "sequence.csv")
    sites = lattice_for(cfg, grid)
    with timer.stage("evolve"):
        pops = evolve_lattice(seq, sites, cfg.noise(), cfg.dephasing(), cfg.frame, cfg.workers)
    samples = sum(s.pulse.n_steps for s in seq.steps)
    if timer.stages.get("evolve"):
        timer.extra["spin_samples_per_s"] = round(len(sites) * samples / timer.stages["evolve"], 1)
    timer.extra["spins"] = len(sites)
    timer.extra["sequence_samples"] = samples
    io.write_populations(out / POPULATIONS_FILE, sites, pops)
    return sites, pops


def stage_readout(cfg: RunConfig, pattern=None, out=None, timer=None):
    out = io.ensure_dir(out or cfg.out)
    timer = timer or Timer()
    grid = load_target(cfg, pattern)
    idx, xs, ys, pops = io.read_populations(out / POPULATIONS_FILE)
    if idx.size != grid.width * grid.height:
        raise ConfigurationError(f"populations file has {idx.size} spins, pattern needs {grid.width * grid.height}")
    sites = [SpinSite(int(i), float(x), float(y), cfg.depth_nm) for i, x, y in zip(idx, xs, ys)]
    with timer.stage("readout"):
        emap = exposure_map(pops[:, 1], sites, cfg.fret(), cfg.surface_pitch)
        exposed = resist_threshold(emap, cfg.resist_threshold * emap.dose.max()) if emap.dose.max() > 0 \
            else np.zeros(emap.dose.shape, dtype=bool)
        metrics = compute_metrics(cfg, grid, sites, pops, emap)
    io.write_dose_csv(out / DOSE_CSV, emap)
    io.write_pgm(out / DOSE_PGM, emap.dose)
    io.write_pgm(out / RESIST_PGM, exposed.astype(float))
    io.write_record(out / METRICS_FILE, metrics)
    return pops, emap, metrics


def run_pipeline(cfg: RunConfig, pattern=None, out=None):
    """Full run; writes every artifact plus the config echo and timings."""
    out = io.ensure_dir(out or cfg.out)
    timer = Timer()
    (out / CONFIG_FILE).write_text(cfg.echo(), encoding="utf-8")
    with timer.stage("total"):
        seq = stage_compile(cfg, pattern, out, timer)
        stage_evolve(cfg, pattern, out, timer, seq=seq)
        pops, emap, metrics = stage_readout(cfg, pattern, out, timer)
    timer.extra["sequence_duration_us"] = seq.total_duration
    timer.extra["sequence_steps"] = len(seq.steps)
    io.write_record(out / PERF_FILE, timer.record())
    return RunResult(out, metrics, pops, emap)
