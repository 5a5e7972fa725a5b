import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mrlith import io
from mrlith.config import PRESETS, RunConfig, build_config, load_config
from mrlith.errors import ConfigurationError, DomainError, ParseError, SchemaError
from mrlith.lattice import build_lattice
from mrlith.patterns import atm_logo, chirped_grating, letter_t, resolve_pattern
from mrlith.pulses import gaussian_pi_pulse
from mrlith.readout import exposure_map
from mrlith.sequence import CompileConfig, PatternGrid, PulseSequence, SequenceStep


def test_ascii_patterns(tmp_path):
    f = tmp_path / "one.txt"
    f.write_text("1")
    g = io.load_pattern(f, pitch=2.0)
    assert g.values.shape == (1, 1) and g.values[0, 0] == 1.0 and g.pitch == 2.0
    f.write_text("10\n1 1\n\n")
    g = io.load_pattern(f)
    np.testing.assert_array_equal(g.values, [[1, 0, 0], [1, 0, 1]])
    f.write_text("101\n1x1\n")
    with pytest.raises(ParseError) as err:
        io.load_pattern(f)
    assert (err.value.line, err.value.column) == (2, 2)
    f.write_text("")
    with pytest.raises(ParseError):
        io.load_pattern(f)
    assert io.format_ascii_pattern(letter_t()).splitlines()[3] == "000111000"


def test_pgm_patterns(tmp_path):
    f = tmp_path / "p.pgm"
    f.write_text("P2\n# comment\n2 1\n255\n128 0\n")
    g = io.load_pattern(f)
    assert g.values[0, 0] == 128 / 255 and g.values[0, 1] == 0.0
    f.write_text("P2\n2 1\n255\n128\n")
    with pytest.raises(ParseError):
        io.load_pattern(f)
    f.write_text("P2\n2 1\n255\n128 300\n")
    with pytest.raises(ParseError) as err:
        io.load_pattern(f)
    assert (err.value.line, err.value.column) == (4, 5)
    f.write_text("P2\n2 x\n255\n1 1\n")
    with pytest.raises(ParseError) as err:
        io.load_pattern(f)
    assert err.value.line == 2
    with pytest.raises(ParseError):
        io.parse_pgm("P5 1 1 255 0")


def test_builtin_patterns():
    logo = atm_logo()
    assert (logo.width, logo.height) == (24, 60)
    assert logo.width * logo.pitch == 72.0 and logo.height * logo.pitch == 180.0
    assert set(np.unique(logo.values)) == {0.0, 1.0}
    t = letter_t()
    assert t.values.shape == (9, 9) and t.values.sum() == 27 + 18
    gr = chirped_grating(150.0, 1.0, 40.0, 20.0)
    assert gr.values.shape == (1, 151)
    # local period shrinks from 40 toward 20 nm
    edges = np.nonzero(np.diff(gr.values[0]))[0]
    gaps = np.diff(edges)
    assert gaps[0] > gaps[-1]
    assert 18 <= 2 * gaps[0] <= 42 and 18 <= 2 * gaps[-1] <= 42
    uniform = chirped_grating(100.0, 1.0, 20.0, 20.0)
    # cos starts at 1: on for a quarter period (0..5 nm), then off for half a period
    assert uniform.values[0, :6].all() and not uniform.values[0, 6:15].any()
    with pytest.raises(ConfigurationError):
        resolve_pattern("builtin:nope", 3.0)
    with pytest.raises(ConfigurationError):
        letter_t(4)


def test_population_and_dose_round_trip(tmp_path):
    sites = build_lattice(3, 2, 3.0, CompileConfig().x_wires, CompileConfig().y_wires)
    pops = np.random.default_rng(1).dirichlet(np.ones(3), size=6)
    path = tmp_path / "pops.csv"
    io.write_populations(path, sites, pops)
    idx, xs, ys, back = io.read_populations(path)
    np.testing.assert_array_equal(back, pops)
    np.testing.assert_array_equal(xs, [s.x_nm for s in sites])
    assert path.read_text().splitlines()[0] == io.POPULATIONS_HEADER
    emap = exposure_map(pops[:, 1], sites)
    dpath = tmp_path / "dose.csv"
    io.write_dose_csv(dpath, emap)
    m = io.read_dose_csv(dpath)
    np.testing.assert_array_equal(m.dose, emap.dose)
    np.testing.assert_array_equal(m.x, emap.x)
    dpath.write_text("# mrl-dose v0\nx_nm,y_nm,dose\n")
    with pytest.raises(SchemaError):
        io.read_dose_csv(dpath)
    with pytest.raises(SchemaError):
        io.read_populations(dpath)


def test_pgm_writer(tmp_path):
    path = tmp_path / "d.pgm"
    io.write_pgm(path, np.array([[0.0, 0.5], [1.0, 0.25]]))
    assert path.read_text() == "P2\n2 2\n65535\n0 32768\n65535 16384\n"
    g = io.load_pattern(path)
    assert g.values[1, 0] == 1.0
    io.write_pgm(path, np.zeros((1, 2)))
    assert path.read_text().endswith("0 0\n")


def test_sequence_round_trip(tmp_path):
    a = gaussian_pi_pulse(2.0, 1.5, 5.6, 300, label="A3")
    seq = PulseSequence((SequenceStep(1, 0, a), SequenceStep(-1, 0, a)), -1, (0, 5))
    io.write_sequence(tmp_path, seq)
    back = io.read_sequence(tmp_path / "sequence.csv")
    assert back.skipped_columns == (0, 5) and back.initial_level == -1
    assert [s.x_gradient for s in back.steps] == [1, -1]
    assert all(b.pulse.equals(s.pulse) for b, s in zip(back.steps, seq.steps))
    (tmp_path / "sequence.csv").write_text("# mrl-sequence v9\n")
    with pytest.raises(SchemaError):
        io.read_sequence(tmp_path / "sequence.csv")


def test_records():
    rec = io.parse_record("# c\na = 1\n\nb=x # trailing\na=2\n")
    assert rec == {"a": "2", "b": "x"}
    with pytest.raises(ParseError) as err:
        io.parse_record("a=1\nnonsense\n")
    assert err.value.line == 2
    with pytest.raises(ParseError):
        io.parse_record("=3")
    text = io.format_record({"x": 0.1, "y": math.nan, "z": np.float64(2.5), "w": np.bool_(True), "n": 3})
    assert text == "x=0.1\ny=nan\nz=2.5\nw=True\nn=3\n"


def test_config_requires_seed_and_validates(monkeypatch):
    monkeypatch.delenv("MRL_WORKERS", raising=False)
    with pytest.raises(ConfigurationError, match="seed"):
        build_config({})
    cfg = build_config({"seed": "7"})
    assert cfg.seed == 7 and cfg.workers == 1
    with pytest.raises(ConfigurationError, match="unknown config key"):
        build_config({"seed": "1", "bogus": "2"})
    with pytest.raises(ConfigurationError):
        build_config({"seed": "1", "t2_us": "abc"})
    for bad in ({"t2_us": "0"}, {"pitch_nm": "-1"}, {"fluctuation": "1.5"}, {"mode": "3d"},
                {"erase_mode": "x"}, {"noise_mode": "x"}, {"seed": "-1"}, {"readout_contrast": "2"},
                {"skip_empty": "maybe"}, {"column_order": "random"}):
        with pytest.raises(ConfigurationError):
            build_config({"seed": "1", **bad})
    assert build_config({"seed": "1", "t2_us": "inf"}).dephasing().rate == 0.0
    assert build_config({"seed": "0x10"}).seed == 16


def test_config_presets_env_and_echo(tmp_path, monkeypatch):
    monkeypatch.setenv("MRL_WORKERS", "3")
    cfg = build_config({"seed": "5", "preset": "grating1d, nv"})
    assert cfg.mode == "1d" and cfg.readout_contrast == 0.3 and cfg.workers == 3
    assert build_config({"seed": "5"}, workers=2).workers == 2
    with pytest.raises(ConfigurationError):
        build_config({"seed": "5"}, presets=["nope"])
    assert {"grating1d", "t2d", "atm2d", "nv", "siv", "st1"} <= set(PRESETS)
    path = tmp_path / "cfg.txt"
    path.write_text(cfg.echo())
    again = load_config(path)
    assert again == cfg
    assert cfg.surface_pitch == pytest.approx(1.0 / 3)
    assert RunConfig(seed=1).surface_pitch == 1.0


@given(st.lists(st.lists(st.integers(0, 1), min_size=1, max_size=12), min_size=1, max_size=8).filter(
    lambda rows: len({len(r) for r in rows}) == 1))
def test_ascii_round_trip(rows):
    grid = PatternGrid(np.array(rows, dtype=float), 3.0)
    back = io.parse_ascii_pattern(io.format_ascii_pattern(grid), 3.0)
    np.testing.assert_array_equal(back.values, grid.values)


@given(st.integers(0, 2**64 - 1), st.floats(1.0, 200.0), st.floats(0.0, 0.9), st.floats(1.0, 1e4) | st.just(math.inf))
def test_config_echo_round_trip(seed, fov, fluctuation, t2):
    cfg = RunConfig(seed=seed, fov_nm=fov, fluctuation=fluctuation, t2_us=t2)
    assert build_config(io.parse_record(cfg.echo())) == cfg
