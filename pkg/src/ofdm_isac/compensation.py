"""Coherent compensation of echoes that overrun the cyclic prefix.

Three variants are provided: time-domain CC on the sample stream, its
frequency-domain counterpart on the symbol grid, and multi-target CC,
which clips strong map cells before compensating so that strong nearby
reflectors do not flood the map with inter-symbol interference.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from scipy import fft as sfft

from .channel import thermal_noise_power
from .errors import ConfigError, PreconditionError
from .receiver import RangeDopplerMap, compute_rdm, estimate_channel, window
from .waveform import FrameConfig, SymbolGrid, TimeSignal


def td_cc(rx: TimeSignal, config: FrameConfig) -> TimeSignal:
    """Add the N samples that follow each received symbol onto its body.

    The last symbol takes the trailing capture. CP samples are untouched.
    """
    n, m, ncp = config.subcarriers, config.symbols, config.cp_samples
    t0 = n + ncp
    s = rx.samples
    if len(s) < m * t0 + n:
        raise PreconditionError("received stream lacks the trailing N-sample capture")
    out = s.copy()
    body = ncp + t0 * np.arange(m)[:, None] + np.arange(n)[None, :]
    follow = t0 * (np.arange(m)[:, None] + 1) + np.arange(n)[None, :]
    out[body] = s[body] + s[follow]
    return TimeSignal(out, rx.sample_rate)


def cp_phase(config: FrameConfig) -> np.ndarray:
    """Per-subcarrier phase exp(-j 2 pi n Ncp / N) undoing the CP offset."""
    n = config.subcarriers
    return np.exp(-2j * np.pi * np.arange(n) * config.cp_samples / n)


def fd_cc(y: SymbolGrid, config: FrameConfig, tail: Optional[np.ndarray] = None) -> SymbolGrid:
    """Add the phase-rotated next symbol to every symbol.

    ``tail`` is the spectrum of the samples after the frame (see
    :func:`~ofdm_isac.receiver.extract_tail`); without it the last symbol
    gets nothing added.
    """
    c = cp_phase(config)
    out = y.data.copy()
    out[:, :-1] += c[:, None] * y.data[:, 1:]
    if tail is not None:
        out[:, -1] += c * tail
    return SymbolGrid(out, y.role)


def threshold_rdm(rdm: RangeDopplerMap, epsilon: float,
                  preserve_phase: bool = True) -> RangeDopplerMap:
    """Clip every cell with power >= epsilon down to magnitude sqrt(epsilon).

    With ``preserve_phase=False`` clipped cells become the real value
    sqrt(epsilon).
    """
    if not epsilon > 0:
        raise PreconditionError("epsilon must be positive")
    d = rdm.data
    hit = np.abs(d) ** 2 >= epsilon
    out = d.copy()
    if preserve_phase:
        out[hit] = np.sqrt(epsilon) * np.exp(1j * np.angle(d[hit]))
    else:
        out[hit] = np.sqrt(epsilon)
    return RangeDopplerMap(out, rdm.range_axis, rdm.velocity_axis)


def reconstruct_fd(rdm_t: RangeDopplerMap, x: SymbolGrid, win: np.ndarray,
                   config: FrameConfig) -> SymbolGrid:
    """Invert the map transform, remove the window and re-apply the symbols."""
    if np.any(win == 0):
        raise PreconditionError("window has zeros and cannot be inverted")
    r = sfft.ifft(sfft.ifftshift(rdm_t.data, axes=1), axis=1, norm="ortho")
    h = sfft.fft(r, axis=0, norm="ortho")
    return SymbolGrid(h / win * x.data, "rx_symbols")


def mtcc(x: SymbolGrid, y: SymbolGrid, win: Optional[np.ndarray], epsilon: float,
         config: FrameConfig, tail: Optional[np.ndarray] = None,
         preserve_phase: bool = True) -> RangeDopplerMap:
    """Multi-target coherent compensation.

    1. map from Y/X;  2. clip cells at epsilon;  3. back to a clipped
    receive grid Y_T;  4. add the rotated next symbol of Y_T to Y;
    5. map of the compensated grid;  6. cells that were clipped take their
    value from the first map.

    The second map uses the same window as the first. For the last symbol
    the frame tail (if given) stands in for the missing next symbol of Y_T.
    """
    if not epsilon > 0:
        raise PreconditionError("epsilon must be positive")
    if win is None:
        win = window(config)
    rdm = compute_rdm(estimate_channel(y, x, config, win), config)
    rdm_t = threshold_rdm(rdm, epsilon, preserve_phase)
    y_t = reconstruct_fd(rdm_t, x, win, config)
    c = cp_phase(config)[:, None]
    comp = y.data.copy()
    comp[:, :-1] += c * y_t.data[:, 1:]
    if tail is not None:
        comp[:, -1] += c[:, 0] * tail
    rdm_cc = compute_rdm(estimate_channel(SymbolGrid(comp, "rx_symbols"), x, config, win), config)
    strong = rdm.power >= epsilon
    merged = np.where(strong, rdm.data, rdm_cc.data)
    return RangeDopplerMap(merged, rdm.range_axis, rdm.velocity_axis)


def default_epsilon(config: FrameConfig) -> float:
    """Clipping threshold of 100 times the thermal noise power."""
    gp = config.symbols * config.subcarriers
    if gp <= 100:
        raise ConfigError(f"processing gain {gp} too small for epsilon = 100 sigma^2")
    return 100.0 * thermal_noise_power(config)
