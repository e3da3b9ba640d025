"""Price statistical moments per window: frequency-based and market-based.

Two averaging conventions coexist:

* frequency: the n-th moment is the plain average of p^n over the window.
* market: the n-th moment is the ratio of the n-th moment of trade value
  to the n-th moment of trade volume, C(t;n)/U(t;n). Its first moment is
  VWAP. The market convention rests on the assumption that p^n and U^n
  series do not correlate inside the window; when they do, market variance
  can go negative. Negative variance is reported with a flag and a
  correlation diagnostic, never clamped.

All expectations use population (1/N) normalization: an expectation here
is a plain average over the window, nothing more.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .ticks import Window

METHODS = ("frequency", "market")

#: |correlation| above this marks the no-correlation assumption as violated.
DEFAULT_DECORRELATION_THRESHOLD = 0.2


@dataclass(frozen=True, slots=True)
class MomentSet:
    """Raw price moments 1..k for one window, by one averaging method.

    raw_moments[n-1] is the n-th moment. For the market method the
    trade value/volume moments that produced them are kept alongside.
    variance is always raw_moments[1] - mean**2; under the market method it
    may be negative, in which case "negative_variance" appears in flags.
    """

    method: str
    order: int
    center_time: float
    raw_moments: tuple[float, ...]
    trade_value_moments: tuple[float, ...] | None
    trade_volume_moments: tuple[float, ...] | None
    mean: float
    variance: float
    flags: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "order": self.order,
            "center_time": self.center_time,
            "raw_moments": list(self.raw_moments),
            "value_moments": None if self.trade_value_moments is None else list(self.trade_value_moments),
            "volume_moments": None if self.trade_volume_moments is None else list(self.trade_volume_moments),
            "mean": self.mean,
            "variance": self.variance,
            "flags": list(self.flags),
        }


@dataclass(frozen=True, slots=True)
class CorrelationDiagnostic:
    """Sample correlation between p^n and U^n inside one window.

    undefined is set (and coefficient reported as 0) when either series is
    constant; flagged when |coefficient| exceeds the threshold.
    """

    order: int
    coefficient: float
    flagged: bool
    undefined: bool = False


def _arrays(window: Window) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    p = np.array([t.price for t in window.ticks])
    u = np.array([t.volume for t in window.ticks])
    c = np.array([t.value for t in window.ticks])
    return p, u, c


def freq_moment(window: Window, n: int) -> float:
    """Frequency-based n-th price moment: (1/N) sum p_i^n."""
    if n < 1:
        raise DataError(f"moment order must be >= 1, got {n}")
    p, _, _ = _arrays(window)
    return float(np.mean(p ** n))


def trade_moments(window: Window, n: int) -> tuple[float, float]:
    """n-th moments of trade value and volume: ((1/N) sum C_i^n, (1/N) sum U_i^n)."""
    if n < 1:
        raise DataError(f"moment order must be >= 1, got {n}")
    _, u, c = _arrays(window)
    return float(np.mean(c ** n)), float(np.mean(u ** n))


def market_price_moment(window: Window, n: int) -> float:
    """Market-based n-th price moment: C(t;n) / U(t;n).

    A convex combination of p_i^n with weights U_i^n, so it always lies in
    [min p_i^n, max p_i^n]. Volumes are positive, so the denominator is too.
    """
    c_n, u_n = trade_moments(window, n)
    return c_n / u_n


def vwap(window: Window) -> float:
    """Volume weighted average price; identical to the market first moment."""
    return market_price_moment(window, 1)


def compute_moment_set(window: Window, k: int, method: str) -> MomentSet:
    """Compute raw moments 1..k by the chosen method, with diagnostics.

    Market variance may legitimately come out negative when the price/volume
    no-correlation assumption fails; the set is then flagged, never adjusted.
    """
    if k < 2:
        raise DataError(f"moment set order must be >= 2, got {k}")
    if method not in METHODS:
        raise DataError(f"unknown method {method!r}; expected one of {METHODS}")

    p, u, c = _arrays(window)
    value_moms = None
    volume_moms = None
    if method == "frequency":
        raw = tuple(float(np.mean(p ** n)) for n in range(1, k + 1))
    else:
        value_moms = tuple(float(np.mean(c ** n)) for n in range(1, k + 1))
        volume_moms = tuple(float(np.mean(u ** n)) for n in range(1, k + 1))
        raw = tuple(cv / uv for cv, uv in zip(value_moms, volume_moms))

    mean = raw[0]
    variance = raw[1] - mean * mean
    flags: tuple[str, ...] = ()
    if variance < 0.0:
        if method == "frequency" and abs(variance) <= 64.0 * np.finfo(float).eps * mean * mean:
            # rounding noise on a (near-)constant window; true value is >= 0
            variance = 0.0
        else:
            flags = ("negative_variance",)

    return MomentSet(
        method=method,
        order=k,
        center_time=window.center_time,
        raw_moments=raw,
        trade_value_moments=value_moms,
        trade_volume_moments=volume_moms,
        mean=mean,
        variance=variance,
        flags=flags,
    )


def decorrelation_diagnostic(
    window: Window, n: int, threshold: float = DEFAULT_DECORRELATION_THRESHOLD
) -> CorrelationDiagnostic:
    """Sample correlation between p^n and U^n over the window.

    This probes the assumption that makes market moments factorize; a large
    |coefficient| means market and frequency moments will disagree and the
    market variance may misbehave.
    """
    if n < 1:
        raise DataError(f"diagnostic order must be >= 1, got {n}")
    if len(window) < 2:
        raise DataError("decorrelation diagnostic needs at least 2 ticks")
    p, u, _ = _arrays(window)
    a = p ** n
    b = u ** n
    da = a - a.mean()
    db = b - b.mean()
    sa = float(np.sqrt(np.mean(da * da)))
    sb = float(np.sqrt(np.mean(db * db)))
    if sa == 0.0 or sb == 0.0:
        return CorrelationDiagnostic(order=n, coefficient=0.0, flagged=False, undefined=True)
    coef = float(np.mean(da * db)) / (sa * sb)
    coef = min(1.0, max(-1.0, coef))
    return CorrelationDiagnostic(order=n, coefficient=coef, flagged=abs(coef) > threshold)


def price_autocorrelation(window1: Window, window2: Window, method: str) -> float:
    """Covariance of prices across two equal-length windows, tick i with tick i.

    frequency: (1/N) sum (p1_i - mean1)(p2_i - mean2) with frequency means.
    market: E[C1*C2]/E[U1*U2] - vwap1*vwap2, the cross-window extension of
    the market moment construction. Applied to one window twice, either
    method reproduces that method's variance.
    """
    if method not in METHODS:
        raise DataError(f"unknown method {method!r}; expected one of {METHODS}")
    if len(window1) != len(window2):
        raise DataError(
            f"windows must have equal tick counts, got {len(window1)} and {len(window2)}"
        )
    if len(window1) < 2:
        raise DataError("autocorrelation needs at least 2 ticks per window")

    p1, u1, c1 = _arrays(window1)
    p2, u2, c2 = _arrays(window2)
    if method == "frequency":
        return float(np.mean((p1 - p1.mean()) * (p2 - p2.mean())))
    cross_value = float(np.mean(c1 * c2))
    cross_volume = float(np.mean(u1 * u2))
    return cross_value / cross_volume - vwap(window1) * vwap(window2)


def payoff_autocorrelation(dev12, dev2) -> float:
    """Average product of paired payoff deviations: (1/N) sum d12_i * d2_i.

    Inputs must already be centered; a sample mean beyond 1e-9 of the
    deviation scale is rejected rather than silently re-centered.
    """
    d12 = np.asarray(dev12, dtype=float)
    d2 = np.asarray(dev2, dtype=float)
    if d12.shape != d2.shape or d12.ndim != 1:
        raise DataError("deviation sequences must be 1-d and of equal length")
    if d12.size < 2:
        raise DataError("payoff autocorrelation needs at least 2 pairs")
    for name, d in (("first", d12), ("second", d2)):
        scale = max(1.0, float(np.max(np.abs(d))) if d.size else 1.0)
        if abs(float(np.mean(d))) > 1e-9 * scale:
            raise DataError(f"{name} deviation sequence is not centered (mean {np.mean(d):g})")
    return float(np.mean(d12 * d2))
