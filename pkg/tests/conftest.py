import numpy as np
import pytest

from ofdm_isac.waveform import FrameConfig, db_to_linear, dbm_to_watt, partial_frame


def make_small(subcarriers=64, cp_samples=8, symbols=4, **kw) -> FrameConfig:
    """Preset radio parameters on a tiny grid; range bins stay 0.75 m wide."""
    base = dict(
        carrier_frequency=3.5e9,
        sample_rate=200e6,
        subcarriers=subcarriers,
        cp_samples=cp_samples,
        symbols=symbols,
        tx_power=dbm_to_watt(49.0),
        tx_gain=db_to_linear(25.8),
        rx_gain=db_to_linear(25.8),
        noise_figure=db_to_linear(8.0),
    )
    base.update(kw)
    return FrameConfig(**base)


@pytest.fixture
def small():
    return make_small()


@pytest.fixture(scope="session")
def partial():
    return partial_frame()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_grid(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def dft_matrix(n):
    """Unitary DFT matrix built element by element (independent of any FFT)."""
    i = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(i, i) / n) / np.sqrt(n)
