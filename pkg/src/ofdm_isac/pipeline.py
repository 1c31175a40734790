"""End-to-end sensing chain: modulate, propagate, compensate, map."""

from __future__ import annotations

from typing import Dict, Iterable, Optional

from .channel import Scenario, propagate
from .compensation import default_epsilon, fd_cc, mtcc, td_cc
from .errors import ConfigError
from .receiver import (RangeDopplerMap, compute_rdm, estimate_channel, extract_symbols,
                       extract_tail, window)
from .waveform import FrameConfig, SymbolGrid, TimeSignal, modulate

METHODS = ("none", "td_cc", "fd_cc", "mtcc")


def process(x: SymbolGrid, rx: TimeSignal, methods: Iterable[str], config: FrameConfig,
            epsilon: Optional[float] = None, preserve_phase: bool = True
            ) -> Dict[str, RangeDopplerMap]:
    """Run every requested receiver method on the same received stream."""
    methods = list(methods)
    for meth in methods:
        if meth not in METHODS:
            raise ConfigError(f"unknown method {meth!r}; choose from {METHODS}")
    win = window(config)
    out = {}
    y = tail = None
    if any(meth in ("none", "fd_cc", "mtcc") for meth in methods):
        y = extract_symbols(rx, config)
        tail = extract_tail(rx, config)
    for meth in methods:
        if meth == "none":
            h = estimate_channel(y, x, config, win)
        elif meth == "td_cc":
            h = estimate_channel(extract_symbols(td_cc(rx, config), config), x, config, win)
        elif meth == "fd_cc":
            h = estimate_channel(fd_cc(y, config, tail), x, config, win)
        else:
            eps = default_epsilon(config) if epsilon is None else epsilon
            out[meth] = mtcc(x, y, win, eps, config, tail, preserve_phase)
            continue
        out[meth] = compute_rdm(h, config)
    return out


def full_chain(x: SymbolGrid, sc: Scenario, method: str, config: FrameConfig,
               epsilon: Optional[float] = None) -> RangeDopplerMap:
    """Simulate one frame through the scenario and return the map of ``method``."""
    rx = propagate(modulate(x, config), sc, config)
    return process(x, rx, [method], config, epsilon)[method]
