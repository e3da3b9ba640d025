"""Shared helpers for building ticks and windows in tests."""

import numpy as np
import pytest

from mbm.ticks import TickSeries, TradeTick, window_from_ticks


def make_ticks(prices, volumes=None, times=None):
    prices = list(prices)
    if volumes is None:
        volumes = [1.0] * len(prices)
    if times is None:
        times = [float(i) for i in range(len(prices))]
    return tuple(
        TradeTick(time=float(t), price=float(p), volume=float(u), value=float(p) * float(u))
        for t, p, u in zip(times, prices, volumes)
    )


def make_window(prices, volumes=None, times=None):
    return window_from_ticks(make_ticks(prices, volumes, times))


def make_series(prices, volumes=None, times=None, spacing=None):
    return TickSeries(ticks=make_ticks(prices, volumes, times), tick_spacing=spacing)


def random_window(rng, size=None, price_lo=1.0, price_hi=50.0, vol_sigma=0.5):
    """A window with continuous random prices and lognormal volumes."""
    n = int(size if size is not None else rng.integers(2, 40))
    prices = rng.uniform(price_lo, price_hi, size=n)
    volumes = 10.0 * np.exp(vol_sigma * rng.standard_normal(n))
    return make_window(prices, volumes)


@pytest.fixture
def rng():
    return np.random.default_rng(20240809)
