"""Counter-based drive-amplitude noise.

Every amplitude factor is a pure function of (seed, spin, pulse): the
Philox key holds the seed and spin index and the counter selects the
pulse, so results never depend on which worker evolves which spin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class NoiseRealization:
    """Multiplicative drive errors ``1 + u`` with ``u ~ U[-fluctuation, fluctuation]``.

    ``mode`` is ``"pulse"`` (one factor per pulse, the default) or
    ``"sample"`` (independent factor per waveform sample).  ``scope`` is
    ``"spin"`` (independent realization per spin) or ``"global"`` (every
    spin sees the same factor for a given pulse).
    """

    seed: int = 0
    fluctuation: float = 0.0
    mode: str = "pulse"
    scope: str = "spin"

    def __post_init__(self):
        if self.fluctuation < 0:
            raise ConfigurationError(f"amplitude fluctuation must be >= 0, got {self.fluctuation}")
        if self.mode not in ("pulse", "sample"):
            raise ConfigurationError(f"noise mode must be 'pulse' or 'sample', got {self.mode!r}")
        if self.scope not in ("spin", "global"):
            raise ConfigurationError(f"noise scope must be 'spin' or 'global', got {self.scope!r}")
        if not 0 <= self.seed <= _MASK64:
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @property
    def enabled(self):
        return self.fluctuation > 0

    def _generator(self, spin, pulse):
        spin_key = 0 if self.scope == "global" else spin + 1
        key = (spin_key << 64) | self.seed
        return np.random.Generator(np.random.Philox(key=key, counter=[0, pulse, 0, 0]))

    def factor(self, spin, pulse, n_samples=1):
        """Amplitude factor for ``pulse`` as seen by ``spin``.

        Returns a float in pulse mode and an array of ``n_samples`` in
        sample mode.
        """
        if not self.enabled:
            return 1.0 if self.mode == "pulse" else np.ones(n_samples)
        gen = self._generator(spin, pulse)
        if self.mode == "pulse":
            return 1.0 + self.fluctuation * (2.0 * gen.random() - 1.0)
        return 1.0 + self.fluctuation * (2.0 * gen.random(n_samples) - 1.0)

    def factors(self, spin, n_pulses):
        """Per-pulse factors for one spin (pulse mode only)."""
        return np.array([self.factor(spin, p) for p in range(n_pulses)])


NO_NOISE = NoiseRealization()
