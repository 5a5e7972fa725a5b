"""Magnetic resonance lithography: gradient fields, spin dynamics, pulse
synthesis, sequence compilation and FRET readout."""

from .config import RunConfig, build_config, load_config
from .errors import (
    ConfigurationError,
    DomainError,
    MeasurementError,
    MRLError,
    ParseError,
    ResolvabilityError,
    SchemaError,
    StabilityError,
)
from .field import WirePair, ZeemanModel, detuning_at, midpoint_gradient, wire_field
from .lattice import SpinSite, build_lattice
from .noise import NoiseRealization
from .pipeline import run_pipeline
from .pulses import Pulse, PatternProfile, gaussian_pi_pulse, invert_rabi, pattern_to_spectrum, spectrum_to_waveform
from .quantum import DephasingParams, HamiltonianParams, evolve_pulse, evolve_spin, rk4_step
from .readout import ExposureMap, FretParams, exposure_map, fret_efficiency, fwhm, pattern_metrics
from .sequence import CompileConfig, PatternGrid, PulseSequence, compile_1d, compile_2d

__version__ = "0.1.0"
