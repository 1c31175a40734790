"""Parameter sweeps behind the command line tool.

Every runner returns a list of row dicts with a common schema (see
:data:`COLUMNS`) plus experiment-specific extras; :func:`render_csv` turns
them into byte-stable CSV text. Sweep points run through a process pool
when ``spec.workers > 1``; the pool's ``map`` keeps results in input
order, so output never depends on completion order.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..analysis import (analytic_budget, image_sinr, measure_sinr, received_signal_stats,
                        target_power)
from ..channel import Scenario, Target, propagate, snap_range, target_gains, thermal_noise_power
from ..compensation import default_epsilon
from ..errors import ConfigError
from ..pipeline import METHODS, process
from ..receiver import guarded_cut_floor, target_cell
from ..waveform import (PRESETS, FrameConfig, derive_params, generate_qpsk_grid, modulate,
                        watt_to_dbm)
from .config import SweepSpec

log = logging.getLogger(__name__)

COLUMNS = ["experiment", "frame", "config_hash", "sweep_variable", "sweep_value", "method",
           "statistic", "value_db", "value_linear"]
EXTRA_COLUMNS = {
    "range_cut": ["range_bin", "range_m"],
    "single_sweep": [],
    "multi_sweep": ["interferer_range_m", "interferer_rcs_m2"],
    "interferer_sweep": ["interferer_range_m", "interferer_rcs_m2", "q_bits"],
}
DRONE_RCS = 0.1
TRUCK_RCS = 10.0


def _fmt_db(v: float) -> str:
    return "inf" if math.isinf(v) else f"{v:.2f}"


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_csv(rows: Sequence[dict], experiment: str) -> str:
    cols = COLUMNS + EXTRA_COLUMNS[experiment]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow(["" if r.get(c) is None else _fmt(r[c]) for c in cols])
    return buf.getvalue()


def write_csv(rows: Sequence[dict], experiment: str, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(render_csv(rows, experiment))


def _pool_map(fn: Callable, items: list, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _epsilon(spec: SweepSpec, frame: FrameConfig) -> float:
    return default_epsilon(frame) if spec.epsilon is None else spec.epsilon


def _row(spec, frame_name, frame, variable, value, method, stat, db=None, lin=None, **extra):
    r = {
        "experiment": spec.experiment,
        "frame": frame_name,
        "config_hash": frame.digest(),
        "sweep_variable": variable,
        "sweep_value": float(value),
        "method": method,
        "statistic": stat,
        "value_db": None if db is None else _fmt_db(db),
        "value_linear": None if lin is None else float(lin),
    }
    r.update(extra)
    return r


def _sort(rows: List[dict]) -> List[dict]:
    order = {m: i for i, m in enumerate(METHODS)}
    return sorted(rows, key=lambda r: (r["frame"], r["sweep_value"], order.get(r["method"], 99),
                                       r.get("range_bin") or 0, r["statistic"]))


# -- Monte-Carlo core -------------------------------------------------------

def measure_point(frame: FrameConfig, targets: Sequence[Target], methods: Sequence[str],
                  seeds: Iterable[int], epsilon: Optional[float] = None, toi_index: int = 0,
                  quantizer: bool = False) -> Dict[str, List[float]]:
    """Measured image SINR [dB] of the TOI, one value per seed and method.

    All methods see the same payload and noise for a given seed.
    """
    out = {m: [] for m in methods}
    for seed in seeds:
        x = generate_qpsk_grid(frame, seed)
        sc = Scenario(tuple(targets), True, quantizer, seed)
        rx = propagate(modulate(x, frame), sc, frame)
        maps = process(x, rx, methods, frame, epsilon)
        for m in methods:
            out[m].append(measure_sinr(maps[m], sc, toi_index, frame))
    return out


def _seeds(spec: SweepSpec) -> range:
    return range(spec.base_seed, spec.base_seed + spec.seeds)


# -- range cut --------------------------------------------------------------

def range_cut_profile(frame: FrameConfig, targets: Sequence[Target], seeds: Iterable[int],
                      method: str = "td_cc", noise: bool = True) -> np.ndarray:
    """Zero-velocity cut of |RDM|^2 averaged over seeds."""
    acc = None
    count = 0
    for seed in seeds:
        x = generate_qpsk_grid(frame, seed)
        sc = Scenario(tuple(targets), noise, False, seed)
        rx = propagate(modulate(x, frame), sc, frame)
        cut = process(x, rx, [method], frame)[method].zero_velocity_cut()
        acc = cut if acc is None else acc + cut
        count += 1
    return acc / count


def _range_cut_task(args):
    frame, targets, seeds, method, noise = args
    return range_cut_profile(frame, targets, seeds, method, noise)


def run_range_cut(spec: SweepSpec) -> List[dict]:
    """Zero-velocity cut after compensation for a strong target at several ranges.

    A drone stays at a fixed range while a truck-sized reflector is moved;
    rows hold the cut in dBm per range bin plus its guarded floor.
    """
    frame = spec.frame
    o = spec.options
    drone = Target(snap_range(o.get("toi_range_m", 900.0), frame), rcs=o.get("toi_rcs_m2", DRONE_RCS))
    values = spec.values or [105.0, 300.0, 900.0]
    method = (spec.methods or ["td_cc"])[0]
    if len(spec.methods or []) > 1:
        log.warning("range-cut uses one method; taking %s", method)
    noise = bool(o.get("noise", True))
    res = derive_params(frame).range_resolution
    tasks, ranges = [], []
    for r1 in values:
        r1 = snap_range(r1, frame)
        ranges.append(r1)
        truck = Target(r1, rcs=o.get("interferer_rcs_m2", TRUCK_RCS))
        tasks.append((frame, (truck, drone), list(_seeds(spec)), method, noise))
    cuts = _pool_map(_range_cut_task, tasks, spec.workers)
    rows = []
    for r1, cut in zip(ranges, cuts):
        bins = [target_cell(r1, 0, frame)[0], target_cell(drone.range_m, 0, frame)[0]]
        floor = guarded_cut_floor(cut, bins)
        for b, pw in enumerate(cut):
            rows.append(_row(spec, spec.frame_name, frame, "interferer_range_m", r1, method,
                             "cut_power_dbm", watt_to_dbm(pw) if pw > 0 else -math.inf, pw,
                             range_bin=b, range_m=b * res))
        rows.append(_row(spec, spec.frame_name, frame, "interferer_range_m", r1, method,
                         "floor_dbm", watt_to_dbm(floor), floor))
    return _sort(rows)


# -- distance sweeps --------------------------------------------------------

def default_toi_ranges(frame: FrameConfig, step_m: float = 250.0) -> List[float]:
    """Integer-bin ranges from the ISI-free range to the last bin before R_max."""
    p = derive_params(frame)
    res = p.range_resolution
    first = frame.cp_samples * res
    last = (frame.subcarriers - 1) * res
    grid = np.arange(math.ceil(first / step_m) * step_m, last, step_m)
    vals = [first] + [round(v / res) * res for v in grid if v > first] + [last]
    return sorted(set(vals))


def _frames_for(spec: SweepSpec, both_presets: bool = False) -> List[Tuple[str, FrameConfig]]:
    names = spec.options.get("frames")
    untouched = spec.frame_name in PRESETS and spec.frame == PRESETS[spec.frame_name]()
    if names is None and both_presets and untouched:
        names = ["partial_frame", "full_frame"]
    if names:
        out = []
        for n in names:
            if n not in PRESETS:
                raise ConfigError(f"unknown frame preset {n!r}")
            out.append((n, PRESETS[n]()))
        return out
    return [(spec.frame_name, spec.frame)]


def _distance_task(args):
    frame, targets, methods, seeds, eps = args
    return measure_point(frame, targets, methods, seeds, eps)


def _distance_sweep(spec: SweepSpec, frames, interferer: Optional[Target],
                    default_methods: Sequence[str]) -> List[dict]:
    methods = list(spec.methods or default_methods)
    measure = bool(spec.options.get("measure", True))
    toi_rcs = spec.options.get("toi_rcs_m2", DRONE_RCS)
    rows, tasks, meta = [], [], []
    for fname, frame in frames:
        eps = _epsilon(spec, frame)
        values = [snap_range(v, frame) for v in (spec.values or default_toi_ranges(frame))]
        for r in values:
            targets = [Target(r, rcs=toi_rcs)]
            if interferer is not None:
                targets.append(interferer)
            extra = {}
            if spec.experiment == "multi_sweep":
                extra = {"interferer_range_m": None if interferer is None else interferer.range_m,
                         "interferer_rcs_m2": None if interferer is None else interferer.rcs}
            for m in methods:
                budget = analytic_budget(m, targets, frame, eps)
                rows.append(_row(spec, fname, frame, "toi_range_m", r, m, "analytic_sinr",
                                 image_sinr(0, m, targets, frame, eps),
                                 budget.sinr(0), **extra))
                rows.append(_row(spec, fname, frame, "toi_range_m", r, m, "analytic_peak_dbm",
                                 watt_to_dbm(budget.targets[0].peak), budget.targets[0].peak,
                                 **extra))
                rows.append(_row(spec, fname, frame, "toi_range_m", r, m, "analytic_floor_dbm",
                                 watt_to_dbm(budget.floor()), budget.floor(), **extra))
            if measure:
                tasks.append((frame, tuple(targets), methods, list(_seeds(spec)), eps))
                meta.append((fname, frame, r, extra))
    for (fname, frame, r, extra), res in zip(meta, _pool_map(_distance_task, tasks, spec.workers)):
        for m in methods:
            v = np.array(res[m])
            rows.append(_row(spec, fname, frame, "toi_range_m", r, m, "measured_sinr_mean",
                             float(v.mean()), 10 ** (v.mean() / 10), **extra))
            rows.append(_row(spec, fname, frame, "toi_range_m", r, m, "measured_sinr_std",
                             float(v.std()), None, **extra))
    return _sort(rows)


def run_single_sweep(spec: SweepSpec) -> List[dict]:
    """Image SINR of a lone drone against its distance.

    Runs both frame presets unless the config names ``frames`` or
    modifies the frame.
    """
    return _distance_sweep(spec, _frames_for(spec, both_presets=True), None, ("none", "mtcc"))


def run_multi_sweep(spec: SweepSpec) -> List[dict]:
    """Image SINR of a drone with a strong close reflector present.

    Set ``interferer: false`` in the sweep options to drop the reflector.
    """
    o = spec.options
    interferer = None
    if o.get("interferer", True):
        frame = _frames_for(spec)[0][1]
        interferer = Target(snap_range(o.get("interferer_range_m", 105.0), frame),
                            rcs=o.get("interferer_rcs_m2", TRUCK_RCS))
    return _distance_sweep(spec, _frames_for(spec), interferer, ("none", "td_cc", "mtcc"))


# -- interferer power sweep -------------------------------------------------

def interferer_pairs(frame: FrameConfig, peaks_dbm: Sequence[float], r_far: float = 340.0,
                     r_near: float = 30.0) -> List[Tuple[float, float]]:
    """(range, RCS) pairs realising each uncompensated interferer peak power.

    Ranges are log-spaced from ``r_far`` down to ``r_near`` and snapped to
    integer bins; the RCS is then solved for the exact peak.
    """
    p = derive_params(frame)
    if len(peaks_dbm) == 1:
        ranges = [r_far]
    else:
        ranges = np.geomspace(r_far, r_near, len(peaks_dbm))
    out = []
    for r, pk in zip(ranges, peaks_dbm):
        r = round(r / p.range_resolution) * p.range_resolution
        amp, tau, _ = target_gains(Target(r, rcs=1.0), frame)
        unit_peak = target_power("none", amp, tau, frame).peak
        out.append((r, 10 ** ((pk - 30) / 10) / unit_peak))
    return out


def default_interferer_peaks() -> List[float]:
    return [float(v) for v in np.arange(-38.0, 56.0 + 1e-9, 2.0)]


def _interferer_task(args):
    frame, targets, methods, seeds, eps, q_bits, stats_seed = args
    f = frame.replace(quantizer_bits=q_bits)
    meas = measure_point(f, targets, methods, seeds, eps, quantizer=True)
    stats = received_signal_stats(targets, f, stats_seed)
    return meas, stats


def run_interferer_sweep(spec: SweepSpec) -> List[dict]:
    """Image SINR of a distant drone against the peak power of an interferer."""
    frame = spec.frame
    o = spec.options
    methods = list(spec.methods or ("none", "td_cc", "mtcc"))
    eps = _epsilon(spec, frame)
    q_bits = int(spec.q_bits or frame.quantizer_bits or 10)
    measure = bool(o.get("measure", True))
    drone = Target(snap_range(o.get("toi_range_m", 4500.0), frame), rcs=o.get("toi_rcs_m2", DRONE_RCS))
    peaks = spec.values or default_interferer_peaks()
    pairs = interferer_pairs(frame, peaks, o.get("interferer_far_m", 340.0),
                             o.get("interferer_near_m", 30.0))
    tasks = []
    for (r, rcs) in pairs:
        targets = (drone, Target(r, rcs=rcs))
        seeds = list(_seeds(spec)) if measure else []
        tasks.append((frame, targets, methods, seeds, eps, q_bits, spec.base_seed))
    results = _pool_map(_interferer_task, tasks, spec.workers)
    gp = derive_params(frame).processing_gain
    rows = []
    for pk, (r, rcs), (meas, (p_sig, papr)) in zip(peaks, pairs, results):
        targets = [drone, Target(r, rcs=rcs)]
        extra = {"interferer_range_m": r, "interferer_rcs_m2": rcs, "q_bits": q_bits}
        for m in methods:
            s = image_sinr(0, m, targets, frame, eps, q_bits, p_sig, papr)
            rows.append(_row(spec, spec.frame_name, frame, "interferer_peak_dbm", pk, m,
                             "analytic_sinr", s, 10 ** (s / 10), **extra))
            if measure:
                v = np.array(meas[m])
                rows.append(_row(spec, spec.frame_name, frame, "interferer_peak_dbm", pk, m,
                                 "measured_sinr_mean", float(v.mean()), 10 ** (v.mean() / 10),
                                 **extra))
                rows.append(_row(spec, spec.frame_name, frame, "interferer_peak_dbm", pk, m,
                                 "measured_sinr_std", float(v.std()), None, **extra))
    return _sort(rows)


RUNNERS = {
    "range_cut": run_range_cut,
    "single_sweep": run_single_sweep,
    "multi_sweep": run_multi_sweep,
    "interferer_sweep": run_interferer_sweep,
}


def run(spec: SweepSpec) -> List[dict]:
    return RUNNERS[spec.experiment](spec)


# -- analytic table ---------------------------------------------------------

def budget_rows(frame: FrameConfig, targets: Sequence[Target], methods: Sequence[str],
                epsilon: Optional[float] = None) -> List[dict]:
    """Per-target closed-form peak/ISI/ICI powers for each method."""
    eps = default_epsilon(frame) if epsilon is None else epsilon
    rows = []
    for m in methods:
        b = analytic_budget(m, targets, frame, eps)
        for h, (t, rec) in enumerate(zip(targets, b.targets)):
            rows.append({
                "method": m, "target": h, "range_m": t.range_m, "rcs_m2": t.rcs,
                "peak_dbm": watt_to_dbm(rec.peak),
                "isi_dbm": watt_to_dbm(rec.isi) if rec.isi > 0 else -math.inf,
                "ici_dbm": watt_to_dbm(rec.ici) if rec.ici > 0 else -math.inf,
                "therm_dbm": watt_to_dbm(b.p_therm),
                "sinr_db": 10 * math.log10(b.sinr(h)),
            })
    return rows
