"""File formats: pattern input, versioned CSV artifacts, PGM and key=value records."""

from __future__ import annotations

import csv
import math
import os
from pathlib import Path

import numpy as np

from .errors import ParseError, SchemaError
from .pulses import Pulse, read_waveform, write_waveform
from .sequence import PatternGrid, PulseSequence, SequenceStep

POPULATIONS_HEADER = "# mrl-populations v1"
DOSE_HEADER = "# mrl-dose v1"
SEQUENCE_HEADER = "# mrl-sequence v1"
PGM_MAXVAL = 65535


def _fmt(v):
    return repr(float(v))


# ---------------------------------------------------------------- patterns

def parse_ascii_pattern(text, pitch=3.0, source="<pattern>"):
    """Rows of '0'/'1'; spaces count as 0 and short rows are padded with 0."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\r\n")
        if not line and not rows:
            continue
        row = []
        for col, ch in enumerate(line, start=1):
            if ch == "1":
                row.append(1.0)
            elif ch in "0 ":
                row.append(0.0)
            else:
                raise ParseError(f"{source}: unexpected character {ch!r}", line=lineno, column=col)
        rows.append(row)
    while rows and not rows[-1]:
        rows.pop()
    if not rows:
        raise ParseError(f"{source}: empty pattern", line=1, column=1)
    width = max(len(r) for r in rows)
    grid = np.zeros((len(rows), width))
    for i, r in enumerate(rows):
        grid[i, : len(r)] = r
    return PatternGrid(grid, pitch)


def _pgm_tokens(text, source):
    """Whitespace tokens with their (line, column); '#' starts a comment."""
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        col = 0
        for tok in line.split():
            col = line.index(tok, col)
            yield tok, lineno, col + 1
            col += len(tok)


def parse_pgm(text, pitch=3.0, source="<pattern>"):
    """Plain (P2) graymap; values are scaled by maxval into [0, 1]."""
    toks = list(_pgm_tokens(text, source))
    if not toks or toks[0][0] != "P2":
        line, col = (toks[0][1], toks[0][2]) if toks else (1, 1)
        raise ParseError(f"{source}: expected P2 magic number", line=line, column=col)

    def integer(k, what):
        if k >= len(toks):
            last = toks[-1]
            raise ParseError(f"{source}: file ends before {what}", line=last[1], column=last[2])
        tok, line, col = toks[k]
        try:
            return int(tok)
        except ValueError:
            raise ParseError(f"{source}: {what} {tok!r} is not an integer", line=line, column=col) from None

    width = integer(1, "width")
    height = integer(2, "height")
    maxval = integer(3, "maxval")
    if width < 1 or height < 1 or not 0 < maxval <= PGM_MAXVAL:
        raise ParseError(f"{source}: bad PGM header {width}x{height} maxval {maxval}", line=toks[0][1], column=1)
    n = width * height
    if len(toks) - 4 != n:
        last = toks[-1]
        raise ParseError(f"{source}: expected {n} pixels, found {len(toks) - 4}", line=last[1], column=last[2])
    vals = np.array([integer(4 + k, "pixel") for k in range(n)], dtype=float)
    if np.any(vals < 0) or np.any(vals > maxval):
        k = int(np.nonzero((vals < 0) | (vals > maxval))[0][0])
        _, line, col = toks[4 + k]
        raise ParseError(f"{source}: pixel value outside [0, {maxval}]", line=line, column=col)
    return PatternGrid(vals.reshape(height, width) / maxval, pitch)


def load_pattern(path, pitch=3.0):
    path = Path(path)
    text = path.read_text(encoding="ascii", errors="replace")
    if text.lstrip().startswith("P2"):
        return parse_pgm(text, pitch, str(path))
    return parse_ascii_pattern(text, pitch, str(path))


def format_ascii_pattern(grid: PatternGrid):
    return "".join("".join("1" if v > 0.5 else "0" for v in row) + "\n" for row in grid.values)


# ---------------------------------------------------------------- headers

def _check_header(lines, expected, path):
    if not lines or lines[0].strip() != expected:
        found = lines[0].strip() if lines else "<empty>"
        raise SchemaError(f"{path}: expected header {expected!r}, found {found!r}", line=1)


def _read_rows(path, expected, columns):
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    _check_header(lines, expected, path)
    if len(lines) < 2 or tuple(lines[1].split(",")) != columns:
        raise SchemaError(f"{path}: expected columns {','.join(columns)}", line=2)
    rows = []
    for lineno, line in enumerate(lines[2:], start=3):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != len(columns):
            raise ParseError(f"{path}: expected {len(columns)} fields", line=lineno)
        rows.append((lineno, parts))
    return rows


def _floats(path, lineno, parts):
    try:
        return [float(v) for v in parts]
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}", line=lineno) from None


# ---------------------------------------------------------------- populations

POPULATION_COLUMNS = ("index", "x_nm", "y_nm", "p_m1", "p_0", "p_p1")


def write_populations(path, sites, pops):
    """``pops[k]`` holds the (-1, 0, +1) populations of ``sites[k]``."""
    pops = np.asarray(pops, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(POPULATIONS_HEADER + "\n")
        fh.write(",".join(POPULATION_COLUMNS) + "\n")
        for s, p in zip(sites, pops):
            fh.write(f"{s.index},{_fmt(s.x_nm)},{_fmt(s.y_nm)},{_fmt(p[0])},{_fmt(p[1])},{_fmt(p[2])}\n")


def read_populations(path):
    """Return (index, x, y, populations[n, 3]) arrays."""
    rows = _read_rows(path, POPULATIONS_HEADER, POPULATION_COLUMNS)
    idx, xs, ys, pops = [], [], [], []
    for lineno, parts in rows:
        v = _floats(path, lineno, parts)
        idx.append(int(v[0]))
        xs.append(v[1])
        ys.append(v[2])
        pops.append(v[3:])
    return np.array(idx, dtype=int), np.array(xs), np.array(ys), np.array(pops).reshape(-1, 3)


# ---------------------------------------------------------------- dose

DOSE_COLUMNS = ("x_nm", "y_nm", "dose")


def write_dose_csv(path, emap):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(DOSE_HEADER + "\n")
        fh.write(",".join(DOSE_COLUMNS) + "\n")
        for iy, y in enumerate(emap.y):
            sy = _fmt(y)
            for ix, x in enumerate(emap.x):
                fh.write(f"{_fmt(x)},{sy},{_fmt(emap.dose[iy, ix])}\n")


def read_dose_csv(path):
    from .readout import ExposureMap

    rows = _read_rows(path, DOSE_HEADER, DOSE_COLUMNS)
    data = np.array([_floats(path, ln, p) for ln, p in rows]).reshape(-1, 3)
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    if xs.size * ys.size != data.shape[0]:
        raise SchemaError(f"{path}: dose points do not form a rectilinear grid")
    dose = np.zeros((ys.size, xs.size))
    dose[np.searchsorted(ys, data[:, 1]), np.searchsorted(xs, data[:, 0])] = data[:, 2]
    return ExposureMap(xs, ys, dose)


def write_pgm(path, image):
    """16-bit plain PGM normalized to the image maximum; row 0 is printed first."""
    img = np.asarray(image, dtype=float)
    top = img.max()
    scaled = np.zeros(img.shape, dtype=np.int64) if top <= 0 else np.rint(img / top * PGM_MAXVAL).astype(np.int64)
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(f"P2\n{img.shape[1]} {img.shape[0]}\n{PGM_MAXVAL}\n")
        for row in scaled:
            fh.write(" ".join(str(int(v)) for v in row) + "\n")


# ---------------------------------------------------------------- key=value records

def format_record(record):
    lines = []
    for key, value in record.items():
        if isinstance(value, (bool, np.bool_)):
            value = bool(value)
        elif isinstance(value, (float, np.floating)):
            value = "nan" if math.isnan(value) else repr(float(value))
        lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"


def write_record(path, record):
    Path(path).write_text(format_record(record), encoding="utf-8")


def parse_record(text, source="<config>"):
    """``key=value`` per line; '#' starts a comment; later keys win."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{source}: expected key=value", line=lineno, column=1)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ParseError(f"{source}: empty key", line=lineno, column=1)
        out[key] = value
    return out


def read_record(path):
    return parse_record(Path(path).read_text(encoding="utf-8"), str(path))


# ---------------------------------------------------------------- sequences

SEQUENCE_COLUMNS = ("step", "label", "channel", "x_gradient", "y_gradient", "n_steps", "dt_us", "waveform")


def write_sequence(directory, seq: PulseSequence, write_waveforms=True):
    """Step table plus one waveform CSV per step, all under ``directory``."""
    directory = Path(directory)
    wdir = directory / "waveforms"
    wdir.mkdir(parents=True, exist_ok=True)
    table = directory / "sequence.csv"
    with open(table, "w", encoding="utf-8", newline="") as fh:
        fh.write(SEQUENCE_HEADER + "\n")
        fh.write(f"# initial_level={seq.initial_level}\n")
        fh.write(f"# skipped_columns={' '.join(str(j) for j in seq.skipped_columns)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SEQUENCE_COLUMNS)
        for k, s in enumerate(seq.steps):
            name = f"waveforms/step{k:04d}.csv"
            if write_waveforms:
                write_waveform(s.pulse, directory / name)
            w.writerow((k, s.pulse.label, s.pulse.channel, s.x_gradient, s.y_gradient,
                        s.pulse.n_steps, _fmt(s.pulse.dt), name))
    return table


def read_sequence(path):
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    _check_header(lines, SEQUENCE_HEADER, path)
    meta = {}
    body = []
    for lineno, line in enumerate(lines[1:], start=2):
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key.strip()] = value.strip()
        elif line:
            body.append((lineno, line))
    if not body or tuple(body[0][1].split(",")) != SEQUENCE_COLUMNS:
        raise SchemaError(f"{path}: expected columns {','.join(SEQUENCE_COLUMNS)}", line=body[0][0] if body else 1)
    steps = []
    for lineno, line in body[1:]:
        parts = next(csv.reader([line]))
        if len(parts) != len(SEQUENCE_COLUMNS):
            raise ParseError(f"{path}: expected {len(SEQUENCE_COLUMNS)} fields", line=lineno)
        try:
            channel, xg, yg, n = (int(v) for v in parts[2:6])
            dt = float(parts[6])
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}", line=lineno) from None
        pulse = read_waveform(path.parent / parts[7], channel=channel, label=parts[1], dt=dt)
        if pulse.n_steps != n:
            raise SchemaError(f"{path}: waveform {parts[7]} has {pulse.n_steps} samples, expected {n}", line=lineno)
        steps.append(SequenceStep(xg, yg, Pulse(channel, pulse.samples, dt, parts[1])))
    try:
        initial = int(meta.get("initial_level", "-1"))
        skipped = tuple(int(v) for v in meta.get("skipped_columns", "").split())
    except ValueError:
        raise SchemaError(f"{path}: malformed sequence metadata") from None
    return PulseSequence(tuple(steps), initial, skipped)


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return Path(path)
