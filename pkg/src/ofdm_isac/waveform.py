"""Frame parameters, QPSK payload and CP-OFDM modulation."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Literal, Optional

import numpy as np
from scipy import fft as sfft

from . import _rng
from .errors import ConfigError, PreconditionError

SPEED_OF_LIGHT = 3.0e8  # m/s; rounded value reproduces R_max = 4914 m
BOLTZMANN = 1.380649e-23  # J/K

WindowKind = Literal["rectangular", "hann"]
GridRole = Literal["tx_symbols", "rx_symbols", "channel_estimate"]


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * np.log10(x)


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(w):
    return 10.0 * np.log10(w) + 30.0


@dataclass(frozen=True)
class FrameConfig:
    """Radio and waveform parameters of one OFDM sensing frame.

    All quantities are linear SI values. The sample rate is authoritative;
    the subcarrier spacing is derived as ``sample_rate / subcarriers``.
    """

    carrier_frequency: float
    sample_rate: float
    subcarriers: int
    cp_samples: int
    symbols: int
    tx_power: float
    tx_gain: float
    rx_gain: float
    noise_figure: float
    noise_temperature: float = 290.0
    quantizer_bits: Optional[int] = None
    window_kind: WindowKind = "rectangular"

    def __post_init__(self):
        if self.subcarriers < 2:
            raise ConfigError(f"subcarriers must be >= 2, got {self.subcarriers}")
        if not 0 <= self.cp_samples < self.subcarriers:
            raise ConfigError(
                f"cp_samples must satisfy 0 <= Ncp < N, got {self.cp_samples}"
            )
        if self.symbols < 2:
            raise ConfigError(f"symbols must be >= 2, got {self.symbols}")
        if not self.sample_rate > 0:
            raise ConfigError("sample_rate must be positive")
        if not self.carrier_frequency > 0:
            raise ConfigError("carrier_frequency must be positive")
        for name in ("tx_power", "tx_gain", "rx_gain", "noise_figure", "noise_temperature"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.quantizer_bits is not None and self.quantizer_bits < 2:
            raise ConfigError("quantizer_bits must be >= 2")
        if self.window_kind not in ("rectangular", "hann"):
            raise ConfigError(f"unknown window kind {self.window_kind!r}")

    @property
    def block_samples(self) -> int:
        """Samples per OFDM symbol including the cyclic prefix."""
        return self.subcarriers + self.cp_samples

    @property
    def frame_samples(self) -> int:
        """Length of a :class:`TimeSignal` for this frame (with trailing capture)."""
        return self.symbols * self.block_samples + self.subcarriers

    def replace(self, **changes) -> "FrameConfig":
        d = asdict(self)
        d.update(changes)
        return FrameConfig(**d)

    def digest(self) -> str:
        """Short stable hash of all fields, used to tag emitted records."""
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass(frozen=True)
class DerivedParams:
    sample_period: float
    subcarrier_spacing: float
    symbol_duration: float
    cp_duration: float
    block_duration: float
    processing_gain: int
    range_resolution: float
    max_range: float
    max_velocity: float
    isi_free_range: float


def derive_params(config: FrameConfig) -> DerivedParams:
    """Evaluate the timing, resolution and gain quantities of ``config``."""
    c0 = SPEED_OF_LIGHT
    ts = 1.0 / config.sample_rate
    n = config.subcarriers
    t = n * ts
    tcp = config.cp_samples * ts
    t0 = t + tcp
    return DerivedParams(
        sample_period=ts,
        subcarrier_spacing=config.sample_rate / n,
        symbol_duration=t,
        cp_duration=tcp,
        block_duration=t0,
        processing_gain=config.symbols * n,
        range_resolution=c0 * ts / 2.0,
        max_range=n * c0 * ts / 2.0,
        max_velocity=c0 / (4.0 * config.carrier_frequency * t0),
        isi_free_range=c0 * tcp / 2.0,
    )


def _preset_config(symbols: int) -> FrameConfig:
    return FrameConfig(
        carrier_frequency=3.5e9,
        sample_rate=200e6,
        subcarriers=6552,
        cp_samples=458,
        symbols=symbols,
        tx_power=dbm_to_watt(49.0),
        tx_gain=db_to_linear(25.8),
        rx_gain=db_to_linear(25.8),
        noise_figure=db_to_linear(8.0),
    )


def full_frame() -> FrameConfig:
    """Full frame: 280 OFDM symbols at 200 MHz, 3.5 GHz."""
    return _preset_config(280)


def partial_frame() -> FrameConfig:
    """Partial frame: 10 of the 280 symbols (3.6 % of the radio resources)."""
    return _preset_config(10)


PRESETS = {"full_frame": full_frame, "partial_frame": partial_frame}


@dataclass
class SymbolGrid:
    """N x M complex grid of frequency-domain symbols."""

    data: np.ndarray
    role: GridRole = "tx_symbols"

    @property
    def shape(self):
        return self.data.shape


@dataclass
class TimeSignal:
    """Complex baseband samples of a whole frame plus N trailing samples."""

    samples: np.ndarray
    sample_rate: float

    def __len__(self):
        return len(self.samples)


QPSK_ALPHABET = np.exp(1j * np.pi * np.array([0.25, 0.75, 1.25, 1.75]))


def generate_qpsk_grid(config: FrameConfig, seed: int) -> SymbolGrid:
    """Draw an N x M grid of independent unit-power QPSK symbols."""
    gen = _rng.stream(seed, _rng.PAYLOAD)
    idx = gen.integers(0, 4, size=(config.subcarriers, config.symbols))
    return SymbolGrid(QPSK_ALPHABET[idx], "tx_symbols")


def modulate(x: SymbolGrid, config: FrameConfig) -> TimeSignal:
    """OFDM-modulate ``x`` with a unitary IDFT and a cyclic prefix per symbol.

    The returned stream ends with N zero samples so that receivers can
    capture the echo tail of the last symbol.
    """
    n, m, ncp = config.subcarriers, config.symbols, config.cp_samples
    if x.data.shape != (n, m):
        raise PreconditionError(
            f"symbol grid has shape {x.data.shape}, expected {(n, m)}"
        )
    body = sfft.ifft(x.data, axis=0, norm="ortho")  # (N, M)
    blocks = np.concatenate([body[n - ncp:, :], body], axis=0)  # CP first
    out = np.zeros(config.frame_samples, dtype=complex)
    out[: m * (n + ncp)] = blocks.T.reshape(-1)
    return TimeSignal(out, config.sample_rate)
