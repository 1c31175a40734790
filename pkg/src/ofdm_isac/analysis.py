"""Closed-form power budget, image SINR and its empirical counterpart."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np

from .channel import Scenario, Target, propagate, target_gains, thermal_noise_power
from .errors import ConfigError, PreconditionError
from .receiver import RangeDopplerMap, guarded_floor, target_cell
from .waveform import FrameConfig, derive_params, generate_qpsk_grid, modulate

Method = Literal["none", "td_cc", "fd_cc", "mtcc"]

# Reported instead of +inf when the measured floor is numerically zero.
MEASURED_SINR_CAP_DB = 200.0


@dataclass(frozen=True)
class TargetPower:
    peak: float
    isi: float
    ici: float


@dataclass
class PowerBudget:
    method: str
    targets: List[TargetPower]
    p_therm: float
    p_q: float = 0.0

    def interference(self) -> float:
        return sum(t.isi + t.ici for t in self.targets)

    def floor(self) -> float:
        return self.p_therm + self.p_q + self.interference()

    def sinr(self, toi_index: int) -> float:
        """Image SINR of one target as a linear ratio."""
        return self.targets[toi_index].peak / self.floor()


def _pos(v):
    return max(v, 0.0)


def target_power(method: str, amp: float, tau: float, config: FrameConfig,
                 epsilon: Optional[float] = None, td_peak: str = "coherent") -> TargetPower:
    """Peak, ISI and ICI power of one reflection in the map.

    ``td_peak="coherent"`` squares the TD-CC peak gain (1 + min(tau, Tcp)/T),
    which is what the compensated symbol actually delivers; ``"linear"``
    keeps the unsquared gain.
    """
    p = derive_params(config)
    t, tcp, gp = p.symbol_duration, p.cp_duration, p.processing_gain
    a2 = amp**2
    spill = _pos(tau - tcp)
    tcp_min = min(tcp, spill)
    if method == "none":
        peak = gp * a2 * (1 - spill / t) ** 2
        isi = a2 * spill / t
        ici = a2 * _pos(t - tcp - tau) * spill / t**2
    elif method == "td_cc":
        gain = 1 + min(tau, tcp) / t
        if td_peak == "coherent":
            gain = gain**2
        elif td_peak != "linear":
            raise ConfigError(f"unknown td_peak form {td_peak!r}")
        peak = gp * a2 * gain
        isi = a2
        ici = 0.0
    elif method == "fd_cc":
        peak = gp * a2
        isi = a2 * (1 + tcp_min / t)
        ici = a2 * (t - tcp_min) * tcp_min / t**2
    elif method == "mtcc":
        if epsilon is None:
            raise ConfigError("epsilon is required for the mtcc budget")
        peak = gp * a2
        isi = a2 * spill / t + min(a2, epsilon / gp) * (t - spill) / t
        ici = 2 * a2 * (t - tcp_min) * tcp_min / t**2
    else:
        raise ConfigError(f"unknown method {method!r}")
    return TargetPower(peak, isi, ici)


def analytic_budget(method: str, targets: Sequence[Target], config: FrameConfig,
                    epsilon: Optional[float] = None, p_q: float = 0.0,
                    td_peak: str = "coherent") -> PowerBudget:
    """Closed-form per-target powers for a receiver method.

    The no-CC ICI factor ``T - Tcp - tau`` is floored at zero so that the
    budget stays non-negative for delays close to T.
    """
    if method == "mtcc" and epsilon is None:
        raise ConfigError("epsilon is required for the mtcc budget")
    sigma2 = thermal_noise_power(config)
    recs = []
    for t in targets:
        amp, tau, _ = target_gains(t, config)
        recs.append(target_power(method, amp, tau, config, epsilon, td_peak))
    p_therm = sigma2 if method == "none" else 2 * sigma2
    return PowerBudget(method, recs, p_therm, p_q)


def quantization_noise_power(p_sig: float, papr: float, q_bits: int, processing_gain: int,
                             form: str = "log") -> float:
    """Quantization noise power in the map.

    ``form="log"`` evaluates P_sig * PAPR / (G_P * 10 log10(6.02 Q)).
    ``form="sqnr"`` uses the usual 6.02 Q + 1.76 dB SQNR of a quantizer whose
    full scale sits at the signal peak.
    """
    if q_bits < 2:
        raise PreconditionError("quantizer needs at least 2 bits")
    if form == "log":
        return p_sig * papr / (processing_gain * 10.0 * np.log10(6.02 * q_bits))
    if form == "sqnr":
        return p_sig * papr / 10.0 ** ((6.02 * q_bits + 1.76) / 10.0)
    raise ConfigError(f"unknown quantization noise form {form!r}")


def signal_stats(samples: np.ndarray, config: FrameConfig) -> Tuple[float, float]:
    """Mean power and PAPR over the CP-stripped symbols of a received frame."""
    n, m, ncp = config.subcarriers, config.symbols, config.cp_samples
    body = samples[: m * (n + ncp)].reshape(m, n + ncp)[:, ncp:]
    pw = np.abs(body) ** 2
    mean = float(pw.mean())
    return mean, float(pw.max() / mean) if mean > 0 else 0.0


def received_signal_stats(targets: Sequence[Target], config: FrameConfig,
                          seed: int = 0) -> Tuple[float, float]:
    """Simulate one noisy, unquantized frame and return (P_sig, PAPR)."""
    x = generate_qpsk_grid(config, seed)
    rx = propagate(modulate(x, config), Scenario(tuple(targets), True, False, seed), config)
    return signal_stats(rx.samples, config)


def image_sinr(toi_index: int, method: str, targets: Sequence[Target], config: FrameConfig,
               epsilon: Optional[float] = None, q_bits: Optional[int] = None,
               p_sig: Optional[float] = None, papr: Optional[float] = None,
               td_peak: str = "coherent", q_form: str = "log",
               merge_aware: bool = False) -> float:
    """Analytic image SINR of target ``toi_index`` in dB.

    When ``q_bits`` is given, P_sig and PAPR default to a simulated frame of
    the same targets. ``merge_aware=True`` accounts for the MTCC merge step:
    a target whose uncompensated peak already reaches epsilon keeps that
    uncompensated peak.
    """
    if not 0 <= toi_index < len(targets):
        raise PreconditionError(f"toi_index {toi_index} out of range")
    p_q = 0.0
    gp = derive_params(config).processing_gain
    if q_bits is not None:
        if p_sig is None or papr is None:
            p_sig, papr = received_signal_stats(targets, config)
        p_q = quantization_noise_power(p_sig, papr, q_bits, gp, q_form)
    budget = analytic_budget(method, targets, config, epsilon, p_q, td_peak)
    peak = budget.targets[toi_index].peak
    if method == "mtcc" and merge_aware:
        amp, tau, _ = target_gains(targets[toi_index], config)
        initial = target_power("none", amp, tau, config).peak
        if initial >= epsilon:
            peak = initial
    return float(10.0 * np.log10(peak / budget.floor()))


def measure_sinr(rdm: RangeDopplerMap, sc: Scenario, toi_index: int,
                 config: FrameConfig) -> float:
    """Empirical image SINR [dB]: local peak over guarded mean floor.

    The peak is the largest cell within one bin of the target's predicted
    cell; the floor excludes the guard box around every scenario target.
    """
    if not 0 <= toi_index < len(sc.targets):
        raise PreconditionError(f"toi_index {toi_index} out of range")
    cells = [target_cell(t.range_m, t.velocity, config) for t in sc.targets]
    r, k = cells[toi_index]
    n, m = rdm.data.shape
    if not (0 <= r < n and 0 <= k < m):
        raise PreconditionError("target cell lies outside the map")
    rows = np.arange(r - 1, r + 2) % n
    cols = np.arange(k - 1, k + 2) % m
    peak = float(rdm.power[np.ix_(rows, cols)].max())
    floor = guarded_floor(rdm, cells)
    if floor <= peak * 1e-20:
        return MEASURED_SINR_CAP_DB
    return float(10.0 * np.log10(peak / floor))
