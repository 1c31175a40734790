"""CP-OFDM joint radar/communication simulator with coherent compensation.

Echoes that arrive after the cyclic prefix leak into the next symbol. The
package models that effect end to end and provides the uncompensated
receiver alongside time-domain, frequency-domain and multi-target
coherent compensation, plus a closed-form power budget to check them against.
"""

from .analysis import (PowerBudget, TargetPower, analytic_budget, image_sinr, measure_sinr,
                       quantization_noise_power, target_power)
from .channel import Scenario, Target, propagate, quantize, snap_range, thermal_noise_power
from .compensation import default_epsilon, fd_cc, mtcc, td_cc, threshold_rdm
from .errors import ConfigError, OfdmIsacError, PreconditionError
from .pipeline import METHODS, full_chain, process
from .receiver import (RangeDopplerMap, compute_rdm, estimate_channel, extract_symbols,
                       extract_tail, window)
from .waveform import (DerivedParams, FrameConfig, SymbolGrid, TimeSignal, derive_params,
                       full_frame, generate_qpsk_grid, modulate, partial_frame)

__version__ = "0.1.0"

__all__ = [
    "PowerBudget", "TargetPower", "analytic_budget", "image_sinr", "measure_sinr",
    "quantization_noise_power", "target_power", "Scenario", "Target", "propagate", "quantize",
    "snap_range", "thermal_noise_power", "default_epsilon", "fd_cc", "mtcc", "td_cc",
    "threshold_rdm", "ConfigError", "OfdmIsacError", "PreconditionError", "METHODS",
    "full_chain", "process", "RangeDopplerMap", "compute_rdm", "estimate_channel",
    "extract_symbols", "extract_tail", "window", "DerivedParams", "FrameConfig", "SymbolGrid",
    "TimeSignal", "derive_params", "full_frame", "generate_qpsk_grid", "modulate",
    "partial_frame",
]
