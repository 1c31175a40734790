"""CP removal, channel estimation and range-Doppler map formation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sfft

from .errors import PreconditionError
from .waveform import SPEED_OF_LIGHT, FrameConfig, SymbolGrid, TimeSignal, derive_params

RANGE_GUARD = 8
VELOCITY_GUARD = 2


@dataclass
class RangeDopplerMap:
    """N x M range-Doppler map.

    Rows are range bins ``r * c0 * Ts / 2``. Columns are Doppler bins after
    a half-spectrum rotation, so zero velocity sits at column ``M // 2``.
    """

    data: np.ndarray
    range_axis: np.ndarray
    velocity_axis: np.ndarray

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.data) ** 2

    @property
    def zero_velocity_index(self) -> int:
        return self.data.shape[1] // 2

    def zero_velocity_cut(self) -> np.ndarray:
        return self.power[:, self.zero_velocity_index]


def range_axis(config: FrameConfig) -> np.ndarray:
    return np.arange(config.subcarriers) * derive_params(config).range_resolution


def velocity_axis(config: FrameConfig) -> np.ndarray:
    p = derive_params(config)
    m = config.symbols
    width = SPEED_OF_LIGHT / (2.0 * config.carrier_frequency * m * p.block_duration)
    return (np.arange(m) - m // 2) * width


def window(config: FrameConfig, kind: Optional[str] = None) -> np.ndarray:
    """Range window over subcarriers, shape (N, 1) so it broadcasts over symbols."""
    kind = kind or config.window_kind
    n = config.subcarriers
    if kind == "rectangular":
        w = np.ones(n)
    elif kind == "hann":
        w = np.hanning(n)
    else:
        raise PreconditionError(f"unknown window kind {kind!r}")
    return w[:, None]


def _check_length(rx: TimeSignal, config: FrameConfig):
    if len(rx.samples) != config.frame_samples:
        raise PreconditionError(
            f"received stream has {len(rx.samples)} samples, expected {config.frame_samples}"
        )


def extract_symbols(rx: TimeSignal, config: FrameConfig) -> SymbolGrid:
    """Strip the CP of each symbol and apply a unitary DFT."""
    _check_length(rx, config)
    n, m, ncp = config.subcarriers, config.symbols, config.cp_samples
    blocks = rx.samples[: m * (n + ncp)].reshape(m, n + ncp)[:, ncp:]
    return SymbolGrid(sfft.fft(blocks.T, axis=0, norm="ortho"), "rx_symbols")


def extract_tail(rx: TimeSignal, config: FrameConfig) -> np.ndarray:
    """Unitary DFT of the would-be symbol M+1 after its CP.

    Only N - Ncp of its samples lie inside the trailing capture; the rest
    are zero-filled. Nothing is transmitted after the frame, so the
    missing samples hold noise only.
    """
    _check_length(rx, config)
    n, m, ncp = config.subcarriers, config.symbols, config.cp_samples
    start = m * (n + ncp) + ncp
    seg = np.zeros(n, dtype=complex)
    seg[: n - ncp] = rx.samples[start:]
    return sfft.fft(seg, norm="ortho")


def estimate_channel(y: SymbolGrid, x: SymbolGrid, config: FrameConfig,
                     win: Optional[np.ndarray] = None) -> SymbolGrid:
    """Element-wise division by the transmit symbols, then windowing."""
    if y.data.shape != x.data.shape:
        raise PreconditionError(f"grid shapes differ: {y.data.shape} vs {x.data.shape}")
    if np.any(x.data == 0):
        raise PreconditionError("transmit grid contains zero symbols")
    if win is None:
        win = window(config)
    return SymbolGrid(y.data / x.data * win, "channel_estimate")


def compute_rdm(h: SymbolGrid, config: FrameConfig) -> RangeDopplerMap:
    """Unitary IDFT over subcarriers, unitary DFT over symbols, Doppler centred."""
    if h.data.shape != (config.subcarriers, config.symbols):
        raise PreconditionError(f"grid has shape {h.data.shape}")
    r = sfft.ifft(h.data, axis=0, norm="ortho")
    rd = sfft.fftshift(sfft.fft(r, axis=1, norm="ortho"), axes=1)
    return RangeDopplerMap(rd, range_axis(config), velocity_axis(config))


def target_cell(range_m: float, velocity: float, config: FrameConfig) -> Tuple[int, int]:
    """Map bin of a target: (range index, rotated Doppler index)."""
    p = derive_params(config)
    r = int(round(2.0 * range_m / SPEED_OF_LIGHT / p.sample_period)) % config.subcarriers
    fd = 2.0 * velocity * config.carrier_frequency / SPEED_OF_LIGHT
    m = config.symbols
    k = (int(round(fd * m * p.block_duration)) + m // 2) % m
    return r, k


def guard_mask(shape, cells: Iterable[Tuple[int, int]], range_guard: int = RANGE_GUARD,
               velocity_guard: int = VELOCITY_GUARD) -> np.ndarray:
    """Boolean mask, True outside the guard box around every listed cell."""
    n, m = shape
    keep = np.ones(shape, dtype=bool)
    for r, k in cells:
        rows = np.arange(r - range_guard, r + range_guard + 1) % n
        cols = np.arange(k - velocity_guard, k + velocity_guard + 1) % m
        keep[np.ix_(rows, cols)] = False
    return keep


def guarded_floor(rdm: RangeDopplerMap, cells: Sequence[Tuple[int, int]]) -> float:
    """Mean cell power outside the guard boxes of ``cells``."""
    keep = guard_mask(rdm.data.shape, cells)
    return float(rdm.power[keep].mean())


def guarded_cut_floor(cut: np.ndarray, range_bins: Sequence[int],
                      range_guard: int = RANGE_GUARD) -> float:
    """Mean of a 1-D range cut outside +-range_guard bins of ``range_bins``."""
    n = len(cut)
    keep = np.ones(n, dtype=bool)
    for r in range_bins:
        keep[np.arange(r - range_guard, r + range_guard + 1) % n] = False
    return float(cut[keep].mean())
