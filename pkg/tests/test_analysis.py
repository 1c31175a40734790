import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ofdm_isac.analysis import (MEASURED_SINR_CAP_DB, analytic_budget, image_sinr, measure_sinr,
                                quantization_noise_power, received_signal_stats, signal_stats,
                                target_power)
from ofdm_isac.channel import Scenario, Target, propagate, target_gains, thermal_noise_power
from ofdm_isac.compensation import default_epsilon
from ofdm_isac.errors import ConfigError, PreconditionError
from ofdm_isac.pipeline import METHODS, process
from ofdm_isac.receiver import guarded_floor, target_cell
from ofdm_isac.waveform import derive_params, full_frame, generate_qpsk_grid, modulate

T_BINS = 6552
CP = 458


def _db(x):
    return 10 * np.log10(x)


def _amp_tau(bins, cfg, rcs=1.0):
    amp, tau, _ = target_gains(Target(bins * 0.75, rcs=rcs), cfg)
    return amp, tau


class TestTargetPower:
    def test_inside_cp(self, partial):
        amp, tau = _amp_tau(300, partial)
        tp = target_power("none", amp, tau, partial)
        assert (tp.peak, tp.isi, tp.ici) == (pytest.approx(65520 * amp**2), 0.0, 0.0)

    def test_half_symbol_no_cc(self, partial):
        amp, tau = _amp_tau(CP + T_BINS // 2, partial)
        p = derive_params(partial)
        t, tcp = p.symbol_duration, p.cp_duration
        tp = target_power("none", amp, tau, partial)
        assert tp.peak == pytest.approx(65520 * amp**2 / 4)
        assert tp.isi == pytest.approx(amp**2 / 2)
        assert tp.ici == pytest.approx(amp**2 * max(t - tcp - tau, 0) * (tau - tcp) / t**2)

    def test_half_symbol_mtcc(self, partial):
        amp, tau = _amp_tau(CP + T_BINS // 2, partial, rcs=1e4)
        eps = default_epsilon(partial)
        assert amp**2 > eps / 65520
        tp = target_power("mtcc", amp, tau, partial, eps)
        assert tp.isi == pytest.approx(amp**2 / 2 + eps / 65520 / 2)

    def test_td_cc_forms(self, partial):
        amp, tau = _amp_tau(CP + T_BINS // 2, partial)
        g = 1 + CP / T_BINS
        assert target_power("td_cc", amp, tau, partial).peak == pytest.approx(65520 * amp**2 * g**2)
        linear = target_power("td_cc", amp, tau, partial, td_peak="linear").peak
        assert linear == pytest.approx(65520 * amp**2 * g)
        with pytest.raises(ConfigError):
            target_power("td_cc", amp, tau, partial, td_peak="other")

    def test_fd_cc_terms(self, partial):
        amp, tau = _amp_tau(CP + 100, partial)
        tp = target_power("fd_cc", amp, tau, partial)
        assert tp.isi == pytest.approx(amp**2 * (1 + 100 / T_BINS))
        assert tp.ici == pytest.approx(amp**2 * (T_BINS - 100) * 100 / T_BINS**2)

    def test_errors(self, partial):
        with pytest.raises(ConfigError):
            target_power("mtcc", 1.0, 0.0, partial)
        with pytest.raises(ConfigError):
            target_power("magic", 1.0, 0.0, partial)
        with pytest.raises(ConfigError):
            analytic_budget("mtcc", [Target(10.5)], partial)

    @settings(max_examples=50, deadline=None)
    @given(b1=st.integers(CP, T_BINS - 1), b2=st.integers(CP, T_BINS - 1))
    def test_no_cc_loss_monotone(self, b1, b2):
        cfg = full_frame()
        lo, hi = sorted((b1, b2))
        p = [target_power("none", 1.0, b * 5e-9, cfg).peak for b in (lo, hi)]
        assert p[1] <= p[0]

    @settings(max_examples=50, deadline=None)
    @given(bins=st.integers(1, T_BINS - 1), method=st.sampled_from(METHODS))
    def test_non_negative(self, bins, method):
        tp = target_power(method, 1.0, bins * 5e-9, full_frame(), epsilon=1e-9)
        assert min(tp.peak, tp.isi, tp.ici) >= 0


class TestBudget:
    def test_thermal_row(self, partial):
        s2 = thermal_noise_power(partial)
        assert analytic_budget("none", [], partial).p_therm == s2
        for m in ("td_cc", "fd_cc", "mtcc"):
            assert analytic_budget(m, [], partial, 1.0).p_therm == 2 * s2

    def test_single_target_sinr(self, partial):
        t = Target(300.0, rcs=0.1)
        amp, _, _ = target_gains(t, partial)
        want = _db(65520 * amp**2 / thermal_noise_power(partial))
        assert image_sinr(0, "none", [t], partial) == pytest.approx(want)

    def test_toi_index_checked(self, partial):
        with pytest.raises(PreconditionError):
            image_sinr(1, "none", [Target(300.0)], partial)

    def test_full_frame_threshold_crossing(self):
        cfg = full_frame()
        eps = default_epsilon(cfg)
        bins = np.arange(CP, T_BINS, 25)
        drone = lambda b: [Target(b * 0.75, rcs=0.1)]
        none = np.array([image_sinr(0, "none", drone(b), cfg) for b in bins])
        mtcc = np.array([image_sinr(0, "mtcc", drone(b), cfg, eps) for b in bins])
        assert none.min() < 17 and mtcc.min() >= 17

    def test_inside_cp_gap_bounded(self, partial):
        eps = default_epsilon(partial)
        for b in (50, 200, CP):
            t = [Target(b * 0.75, rcs=0.1)]
            gap = image_sinr(0, "none", t, partial) - image_sinr(0, "mtcc", t, partial, eps)
            assert 0 <= gap <= 3.02

    def test_merge_aware_keeps_initial_peak(self, partial):
        eps = default_epsilon(partial)
        t = [Target(1500.0, rcs=0.1)]
        plain = image_sinr(0, "mtcc", t, partial, eps)
        aware = image_sinr(0, "mtcc", t, partial, eps, merge_aware=True)
        budget = analytic_budget("mtcc", t, partial, eps)
        amp, tau, _ = target_gains(t[0], partial)
        initial = target_power("none", amp, tau, partial).peak
        assert initial >= eps
        assert aware == pytest.approx(_db(initial / budget.floor()))
        assert aware < plain


class TestQuantizationNoise:
    def test_zero_signal(self):
        assert quantization_noise_power(0.0, 10.0, 10, 65520) == 0.0

    def test_linear(self):
        a = quantization_noise_power(1e-9, 10.0, 10, 65520)
        assert quantization_noise_power(2e-9, 10.0, 10, 65520) == pytest.approx(2 * a)

    def test_arithmetic_oracle(self):
        # 1e-9 * 10 / (65520 * 10 * log10(60.2)), evaluated by hand
        assert quantization_noise_power(1e-9, 10.0, 10, 65520) == pytest.approx(8.5764e-15,
                                                                                rel=1e-4)

    def test_sqnr_form(self):
        assert quantization_noise_power(1.0, 1.0, 10, 1, form="sqnr") == pytest.approx(
            10 ** (-(60.2 + 1.76) / 10))

    def test_errors(self):
        with pytest.raises(PreconditionError):
            quantization_noise_power(1.0, 1.0, 1, 10)
        with pytest.raises(ConfigError):
            quantization_noise_power(1.0, 1.0, 8, 10, form="other")

    def test_measured_stats(self, partial):
        targets = [Target(105.0, rcs=10.0)]
        p_sig, papr = received_signal_stats(targets, partial, seed=3)
        amp, _, _ = target_gains(targets[0], partial)
        assert p_sig == pytest.approx(amp**2 + thermal_noise_power(partial), rel=0.02)
        assert 8 < papr < 20

    def test_signal_stats_constant(self, small):
        s = np.full(small.frame_samples, 2.0 + 0j)
        assert signal_stats(s, small) == (4.0, 1.0)

    def test_quantized_sinr_lower(self, partial):
        t = [Target(4500.0, rcs=0.1), Target(30.0, rcs=5.0)]
        assert image_sinr(0, "none", t, partial, q_bits=8) < image_sinr(0, "none", t, partial)


def _chain(cfg, targets, methods, seed, noise, eps):
    x = generate_qpsk_grid(cfg, seed)
    sc = Scenario(tuple(targets), noise, False, seed)
    rx = propagate(modulate(x, cfg), sc, cfg)
    return sc, process(x, rx, methods, cfg, eps)


class TestConsistency:
    @pytest.mark.parametrize("bins", [200, CP, 1200, CP + T_BINS // 2, 6000])
    def test_peak_every_method(self, partial, bins):
        t = Target(bins * 0.75, rcs=1.0, phase=0.3, phase_mode="fixed")
        amp, tau, _ = target_gains(t, partial)
        eps = 10 * 65520 * amp**2  # above every peak: no clipping
        _, maps = _chain(partial, [t], METHODS, 0, False, eps)
        for m in METHODS:
            want = target_power(m, amp, tau, partial, eps).peak
            assert abs(_db(maps[m].power[bins, 5] / want)) < 0.2, m

    @pytest.mark.parametrize("bins", [200, CP + T_BINS // 2])
    def test_floor_every_method(self, partial, bins):
        t = Target(bins * 0.75, rcs=1000.0)
        amp, _, _ = target_gains(t, partial)
        eps = 10 * 65520 * amp**2
        cell = [target_cell(t.range_m, 0.0, partial)]
        floors = {m: [] for m in METHODS}
        for seed in range(20):
            _, maps = _chain(partial, [t], METHODS, seed, True, eps)
            for m in METHODS:
                floors[m].append(guarded_floor(maps[m], cell))
        for m in METHODS:
            want = analytic_budget(m, [t], partial, eps).floor()
            assert abs(_db(np.mean(floors[m]) / want)) < 1.5, m


class TestMeasureSinr:
    def test_noise_free_cap(self, partial):
        sc, maps = _chain(partial, [Target(300.0)], ["none"], 0, False, None)
        assert measure_sinr(maps["none"], sc, 0, partial) == MEASURED_SINR_CAP_DB

    def test_matches_analytic_inside_cp(self, partial):
        t = Target(300.0, rcs=0.1)
        vals = [measure_sinr(_chain(partial, [t], ["none"], s, True, None)[1]["none"],
                             Scenario((t,)), 0, partial) for s in range(10)]
        assert abs(np.mean(vals) - image_sinr(0, "none", [t], partial)) < 1.5

    def test_toi_checks(self, partial):
        sc, maps = _chain(partial, [Target(300.0)], ["none"], 0, True, None)
        with pytest.raises(PreconditionError):
            measure_sinr(maps["none"], sc, 2, partial)
