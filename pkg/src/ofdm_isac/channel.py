"""Monostatic point-target channel with thermal noise and ADC quantization."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Literal, Tuple

import numpy as np

from . import _rng
from .errors import PreconditionError
from .waveform import BOLTZMANN, SPEED_OF_LIGHT, FrameConfig, TimeSignal, derive_params

log = logging.getLogger(__name__)

DEFAULT_QUANTIZER_BITS = 10


@dataclass(frozen=True)
class Target:
    """Swerling-0 point scatterer.

    Attributes:
        range_m: One-way distance [m].
        velocity: Radial velocity [m/s], positive when the Doppler shift is positive.
        rcs: Radar cross section [m^2].
        phase: Reflection phase [rad] used when ``phase_mode`` is ``"fixed"``.
        phase_mode: ``"random"`` draws the phase uniformly from the scenario seed.
    """

    range_m: float
    velocity: float = 0.0
    rcs: float = 1.0
    phase: float = 0.0
    phase_mode: Literal["fixed", "random"] = "random"

    def __post_init__(self):
        if not self.range_m > 0:
            raise PreconditionError(f"target range must be positive, got {self.range_m}")
        if not self.rcs > 0:
            raise PreconditionError(f"target RCS must be positive, got {self.rcs}")


@dataclass(frozen=True)
class Scenario:
    targets: Tuple[Target, ...] = ()
    noise_enabled: bool = True
    quantizer_enabled: bool = False
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))

    def with_targets(self, targets) -> "Scenario":
        return Scenario(tuple(targets), self.noise_enabled, self.quantizer_enabled, self.seed)


def target_gains(t: Target, config: FrameConfig) -> Tuple[float, float, float]:
    """Return amplitude [sqrt(W)], round-trip delay [s] and Doppler shift [Hz]."""
    c0 = SPEED_OF_LIGHT
    p = derive_params(config)
    tau = 2.0 * t.range_m / c0
    if not 0 <= tau < p.symbol_duration:
        raise PreconditionError(
            f"target at {t.range_m} m has delay {tau:.3e} s >= symbol duration "
            f"{p.symbol_duration:.3e} s"
        )
    num = t.rcs * c0**2 * config.tx_power * config.tx_gain * config.rx_gain
    den = (4.0 * np.pi) ** 3 * t.range_m**4 * config.carrier_frequency**2
    amp = float(np.sqrt(num / den))
    fd = 2.0 * t.velocity * config.carrier_frequency / c0
    return amp, tau, fd


def delay_samples(t: Target, config: FrameConfig) -> int:
    """Integer round-trip delay in samples; raises if the range is off-grid."""
    _, tau, _ = target_gains(t, config)
    d = tau * config.sample_rate
    di = int(round(d))
    if abs(d - di) > 1e-6:
        raise PreconditionError(
            f"target range {t.range_m} m is not a multiple of the range resolution "
            f"{derive_params(config).range_resolution} m"
        )
    return di


def snap_range(range_m: float, config: FrameConfig) -> float:
    """Snap a distance to the nearest integer range bin, warning if it moved."""
    res = derive_params(config).range_resolution
    snapped = round(range_m / res) * res
    if abs(snapped - range_m) > 1e-9 * max(1.0, range_m):
        log.warning("range %.6g m snapped to integer bin at %.6g m", range_m, snapped)
    return snapped


def target_phase(t: Target, index: int, seed: int) -> float:
    if t.phase_mode == "fixed":
        return t.phase
    return float(_rng.stream(seed, _rng.PHASE, index).uniform(0.0, 2.0 * np.pi))


def thermal_noise_power(config: FrameConfig) -> float:
    """Receiver noise power F k B T over the full sample bandwidth [W]."""
    return config.noise_figure * BOLTZMANN * config.sample_rate * config.noise_temperature


def echo(tx: TimeSignal, t: Target, index: int, seed: int, config: FrameConfig) -> np.ndarray:
    """Noise-free contribution of a single target to the received stream."""
    amp, _, fd = target_gains(t, config)
    d = delay_samples(t, config)
    phi = target_phase(t, index, seed)
    s = tx.samples
    out = np.zeros_like(s)
    i = np.arange(d, len(s))
    out[d:] = amp * np.exp(1j * phi) * s[: len(s) - d]
    if fd != 0.0:
        out[d:] *= np.exp(2j * np.pi * fd * i / config.sample_rate)
    return out


def thermal_noise(length: int, seed: int, config: FrameConfig) -> np.ndarray:
    sigma2 = thermal_noise_power(config)
    gen = _rng.stream(seed, _rng.NOISE)
    w = gen.standard_normal((2, length))
    return np.sqrt(sigma2 / 2.0) * (w[0] + 1j * w[1])


def propagate(tx: TimeSignal, sc: Scenario, config: FrameConfig) -> TimeSignal:
    """Pass ``tx`` through the scenario's targets, noise and quantizer."""
    if len(tx.samples) != config.frame_samples:
        raise PreconditionError(
            f"transmit stream has {len(tx.samples)} samples, expected {config.frame_samples}"
        )
    rx = np.zeros_like(tx.samples, dtype=complex)
    for h, t in enumerate(sc.targets):
        rx += echo(tx, t, h, sc.seed, config)
    if sc.noise_enabled:
        rx += thermal_noise(len(rx), sc.seed, config)
    out = TimeSignal(rx, tx.sample_rate)
    if sc.quantizer_enabled:
        out = quantize(out, config.quantizer_bits or DEFAULT_QUANTIZER_BITS)
    return out


def quantize(sig: TimeSignal, q_bits: int) -> TimeSignal:
    """Uniform mid-rise quantization of I and Q with 2**Q levels each.

    Full scale is the largest absolute I or Q value in the frame, so the
    output never exceeds it. An all-zero signal is returned unchanged.
    """
    if q_bits < 2:
        raise PreconditionError("quantizer needs at least 2 bits")
    x = sig.samples
    fs = max(np.abs(x.real).max(initial=0.0), np.abs(x.imag).max(initial=0.0))
    if fs == 0.0:
        log.warning("quantize: degenerate all-zero signal returned unchanged")
        return TimeSignal(x.copy(), sig.sample_rate)
    levels = 2**q_bits
    step = 2.0 * fs / levels

    def q(v):
        k = np.clip(np.floor(v / step), -levels // 2, levels // 2 - 1)
        return (k + 0.5) * step

    return TimeSignal(q(x.real) + 1j * q(x.imag), sig.sample_rate)
