"""YAML experiment files.

A file has up to four sections::

    frame:
      preset: partial_frame        # or full_frame / custom
      symbols: 10                  # any field may be overridden
      noise_figure_db: 8
    targets:
      - {range_m: 4500, rcs_m2: 0.1}
    sweep:
      experiment: single_sweep
      values_m: [500, 1000, 1500]
      methods: [none, mtcc]
      seeds: 20
      epsilon: auto                # or a power like "-63 dBm"
      # epsilon_sigma2: 100        # alternative: multiple of the noise power
    output:
      path: out.csv

Physical quantities carry their unit in the key name.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml

from ..channel import Target, thermal_noise_power
from ..errors import ConfigError
from ..waveform import (PRESETS, FrameConfig, db_to_linear, dbm_to_watt, partial_frame)

EXPERIMENTS = ("range_cut", "single_sweep", "multi_sweep", "interferer_sweep")
METHODS = ("none", "td_cc", "fd_cc", "mtcc")

# sweep keys understood by each runner beyond the common ones
OPTIONS = {
    "range_cut": {"toi_range_m", "toi_rcs_m2", "interferer_rcs_m2", "noise"},
    "single_sweep": {"toi_rcs_m2", "frames", "measure"},
    "multi_sweep": {"toi_rcs_m2", "frames", "measure", "interferer", "interferer_range_m",
                    "interferer_rcs_m2"},
    "interferer_sweep": {"toi_range_m", "toi_rcs_m2", "measure", "interferer_far_m",
                         "interferer_near_m"},
}

# key -> (FrameConfig field, converter)
_FRAME_KEYS = {
    "carrier_frequency_hz": ("carrier_frequency", float),
    "sample_rate_hz": ("sample_rate", float),
    "subcarriers": ("subcarriers", int),
    "cp_samples": ("cp_samples", int),
    "symbols": ("symbols", int),
    "tx_power_dbm": ("tx_power", dbm_to_watt),
    "tx_power_w": ("tx_power", float),
    "tx_gain_dbi": ("tx_gain", db_to_linear),
    "rx_gain_dbi": ("rx_gain", db_to_linear),
    "noise_figure_db": ("noise_figure", db_to_linear),
    "noise_temperature_k": ("noise_temperature", float),
    "quantizer_bits": ("quantizer_bits", int),
    "window": ("window_kind", str),
}

_REQUIRED_CUSTOM = {"carrier_frequency", "sample_rate", "subcarriers", "cp_samples", "symbols",
                    "tx_power", "tx_gain", "rx_gain", "noise_figure"}


@dataclass
class SweepSpec:
    """Everything needed to run one experiment deterministically."""

    experiment: str
    frame_name: str = "partial_frame"
    frame: FrameConfig = field(default_factory=partial_frame)
    values: Optional[List[float]] = None
    methods: Optional[List[str]] = None
    seeds: int = 20
    base_seed: int = 0
    epsilon: Optional[float] = None  # W; None means 100 sigma^2
    targets: List[Target] = field(default_factory=list)
    q_bits: Optional[int] = None
    workers: int = 1
    output: Optional[Path] = None
    options: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.seeds < 1:
            raise ConfigError("seeds must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.methods is not None:
            if not self.methods:
                raise ConfigError("methods list is empty")
            bad = [m for m in self.methods if m not in METHODS]
            if bad:
                raise ConfigError(f"unknown methods {bad}; choose from {METHODS}")
        if self.q_bits is not None and int(self.q_bits) < 2:
            raise ConfigError("q_bits must be >= 2")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        extra = set(self.options) - OPTIONS[self.experiment]
        if extra:
            raise ConfigError(f"unknown sweep keys for {self.experiment}: {sorted(extra)}")


def parse_power(text) -> Optional[float]:
    """``"auto"``/None -> None, ``"-63 dBm"`` -> watts, plain numbers are dBm."""
    if text is None:
        return None
    if isinstance(text, (int, float)):
        return dbm_to_watt(float(text))
    s = str(text).strip().lower()
    if s == "auto":
        return None
    for suffix, conv in (("dbm", dbm_to_watt), ("w", float)):
        if s.endswith(suffix):
            try:
                return conv(float(s[: -len(suffix)]))
            except ValueError:
                break
    try:
        return dbm_to_watt(float(s))
    except ValueError:
        raise ConfigError(f"cannot parse power {text!r}; use e.g. '-63 dBm' or 'auto'") from None


def parse_frame(section: Optional[dict]) -> Tuple[str, FrameConfig]:
    section = dict(section or {})
    name = section.pop("preset", "partial_frame")
    overrides = {}
    for key, value in section.items():
        if key not in _FRAME_KEYS:
            raise ConfigError(f"unknown frame key {key!r}")
        fld, conv = _FRAME_KEYS[key]
        try:
            overrides[fld] = conv(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
    if name == "custom":
        missing = _REQUIRED_CUSTOM - overrides.keys()
        if missing:
            raise ConfigError(f"custom frame is missing {sorted(missing)}")
        return name, FrameConfig(**overrides)
    if name not in PRESETS:
        raise ConfigError(f"unknown frame preset {name!r}")
    return name, PRESETS[name]().replace(**overrides)


def parse_target(d: dict) -> Target:
    known = {"range_m", "rcs_m2", "velocity_mps", "phase_rad"}
    extra = set(d) - known
    if extra:
        raise ConfigError(f"unknown target keys {sorted(extra)}")
    if "range_m" not in d:
        raise ConfigError("target needs range_m")
    phase = d.get("phase_rad")
    return Target(
        range_m=float(d["range_m"]),
        velocity=float(d.get("velocity_mps", 0.0)),
        rcs=float(d.get("rcs_m2", 1.0)),
        phase=0.0 if phase is None else float(phase),
        phase_mode="random" if phase is None else "fixed",
    )


def _sweep_values(sweep: dict) -> Optional[List[float]]:
    for key in ("values_m", "values_dbm", "values"):
        if key in sweep:
            return [float(v) for v in sweep[key]]
    return None


def load_spec(path, experiment: Optional[str] = None,
              fallback: Optional[str] = None) -> SweepSpec:
    """Read a YAML experiment file into a :class:`SweepSpec`.

    ``experiment`` must agree with the file's ``sweep.experiment`` if both
    are set; ``fallback`` applies only when neither is.
    """
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    return spec_from_dict(doc, experiment, fallback)


def spec_from_dict(doc: dict, experiment: Optional[str] = None,
                   fallback: Optional[str] = None) -> SweepSpec:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping with frame/targets/sweep/output sections")
    unknown = set(doc) - {"frame", "targets", "sweep", "output"}
    if unknown:
        raise ConfigError(f"unknown config sections {sorted(unknown)}")
    frame_name, frame = parse_frame(doc.get("frame"))
    sweep = dict(doc.get("sweep") or {})
    exp = experiment or sweep.get("experiment") or fallback
    if exp is None:
        raise ConfigError("no experiment given")
    exp = exp.replace("-", "_")
    if sweep.get("experiment") and sweep["experiment"].replace("-", "_") != exp:
        raise ConfigError(f"config is for {sweep['experiment']!r}, not {exp!r}")
    targets = [parse_target(t) for t in (doc.get("targets") or [])]
    out = (doc.get("output") or {}).get("path")
    options = {k: v for k, v in sweep.items()
               if k not in {"experiment", "values_m", "values_dbm", "values", "methods", "seeds",
                            "base_seed", "epsilon", "epsilon_sigma2", "q_bits",
                            "workers"}}
    epsilon = parse_power(sweep.get("epsilon", "auto"))
    if "epsilon_sigma2" in sweep:
        if "epsilon" in sweep:
            raise ConfigError("give either epsilon or epsilon_sigma2, not both")
        try:
            mult = float(sweep["epsilon_sigma2"])
        except (TypeError, ValueError):
            raise ConfigError("epsilon_sigma2 must be a number") from None
        if mult <= 0:
            raise ConfigError("epsilon_sigma2 must be positive")
        epsilon = mult * thermal_noise_power(frame)
    return SweepSpec(
        experiment=exp,
        frame_name=frame_name,
        frame=frame,
        values=_sweep_values(sweep),
        methods=sweep.get("methods"),
        seeds=int(sweep.get("seeds", 20)),
        base_seed=int(sweep.get("base_seed", 0)),
        epsilon=epsilon,
        targets=targets,
        q_bits=sweep.get("q_bits"),
        workers=int(sweep.get("workers", 1)),
        output=Path(out) if out else None,
        options=options,
    )


def with_overrides(spec: SweepSpec, **kw) -> SweepSpec:
    kw = {k: v for k, v in kw.items() if v is not None}
    return replace(spec, **kw)
