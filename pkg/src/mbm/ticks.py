"""Trade tick time-series: parsing, validation, and windowing.

A trade tick is the atom of everything downstream: (time, price, volume,
value) with the identity value = price * volume enforced on ingestion.
Windows are defined by tick COUNT, not wall-clock span; all averaging
operators downstream treat a window as one averaging interval.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .errors import DataError

# Relative tolerance for the value = price * volume identity.
VALUE_IDENTITY_RTOL = 1e-9


@dataclass(frozen=True, slots=True)
class TradeTick:
    """One market trade."""

    time: float
    price: float
    volume: float
    value: float

    def __post_init__(self):
        if self.time < 0.0:
            raise DataError(f"tick time must be non-negative, got {self.time}")
        if not (self.price > 0.0):
            raise DataError(f"tick at t={self.time}: price must be positive, got {self.price}")
        if not (self.volume > 0.0):
            raise DataError(f"tick at t={self.time}: volume must be positive, got {self.volume}")
        expected = self.price * self.volume
        if abs(self.value - expected) > VALUE_IDENTITY_RTOL * abs(expected):
            raise DataError(
                f"tick at t={self.time}: value {self.value} violates price*volume={expected} "
                f"beyond relative {VALUE_IDENTITY_RTOL:g}"
            )


@dataclass(frozen=True, slots=True)
class TickSeries:
    """Ordered trade ticks with an optional regular spacing.

    tick_spacing is the minimal time division of the series; it is inferred
    on parse when all consecutive time differences agree, else left None.
    """

    ticks: tuple[TradeTick, ...]
    tick_spacing: float | None = None

    def __post_init__(self):
        times = [t.time for t in self.ticks]
        for i in range(1, len(times)):
            if times[i] < times[i - 1]:
                raise DataError(
                    f"tick times must be non-decreasing; tick {i} at t={times[i]} "
                    f"follows t={times[i - 1]}"
                )

    def __len__(self):
        return len(self.ticks)


@dataclass(frozen=True, slots=True)
class Window:
    """A contiguous run of ticks forming one averaging interval."""

    center_time: float
    ticks: tuple[TradeTick, ...]
    count: int = field(default=0)

    def __post_init__(self):
        if len(self.ticks) < 1:
            raise DataError("window must contain at least one tick")
        if self.count == 0:
            object.__setattr__(self, "count", len(self.ticks))
        elif self.count != len(self.ticks):
            raise DataError(f"window count {self.count} != number of ticks {len(self.ticks)}")

    def __len__(self):
        return self.count


def _median_time(ticks: tuple[TradeTick, ...]) -> float:
    n = len(ticks)
    mid = n // 2
    if n % 2 == 1:
        return ticks[mid].time
    return 0.5 * (ticks[mid - 1].time + ticks[mid].time)


def window_from_ticks(ticks) -> Window:
    """Build a Window whose center is the median tick time."""
    ticks = tuple(ticks)
    if not ticks:
        raise DataError("window must contain at least one tick")
    return Window(center_time=_median_time(ticks), ticks=ticks)


def parse_ticks(text: str) -> TickSeries:
    """Parse tick-CSV into a TickSeries.

    Expected header is ``time,price,volume`` or ``time,price,volume,value``.
    When the value column is absent it is computed as price*volume; when
    present it is validated against that identity (relative 1e-9).
    Raises DataError with the offending line number on any malformed row,
    non-positive price/volume, identity violation, or decreasing times.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty input: missing header") from None
    header = [h.strip().lower() for h in header]
    if header == ["time", "price", "volume"]:
        has_value = False
    elif header == ["time", "price", "volume", "value"]:
        has_value = True
    else:
        raise DataError(
            "line 1: header must be 'time,price,volume' or 'time,price,volume,value', "
            f"got {','.join(header)!r}"
        )

    ticks = []
    expected_cols = 4 if has_value else 3
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue  # blank lines carry no tick
        if len(row) != expected_cols:
            raise DataError(f"line {lineno}: expected {expected_cols} fields, got {len(row)}")
        try:
            nums = [float(f) for f in row]
        except ValueError as exc:
            raise DataError(f"line {lineno}: non-numeric field ({exc})") from None
        if nums[0] < 0.0:
            raise DataError(f"line {lineno}: negative time {nums[0]}")
        value = nums[3] if has_value else nums[1] * nums[2]
        try:
            tick = TradeTick(time=nums[0], price=nums[1], volume=nums[2], value=value)
        except DataError as exc:
            raise DataError(f"line {lineno}: {exc}") from None
        if ticks and tick.time < ticks[-1].time:
            raise DataError(
                f"line {lineno}: time {tick.time} decreases from previous {ticks[-1].time}"
            )
        ticks.append(tick)

    return TickSeries(ticks=tuple(ticks), tick_spacing=_infer_spacing(ticks))


def _infer_spacing(ticks) -> float | None:
    if len(ticks) < 2:
        return None
    diffs = [ticks[i].time - ticks[i - 1].time for i in range(1, len(ticks))]
    first = diffs[0]
    if first <= 0.0:
        return None
    for d in diffs[1:]:
        if abs(d - first) > 1e-9 * max(abs(first), abs(d)):
            return None
    return first


def render_ticks(series: TickSeries) -> str:
    """Render a TickSeries back to tick-CSV.

    Floats are written with repr (shortest round-trip form), so
    parse_ticks(render_ticks(s)) reproduces s bit-exactly.
    """
    lines = ["time,price,volume,value"]
    for t in series.ticks:
        lines.append(f"{t.time!r},{t.price!r},{t.volume!r},{t.value!r}")
    return "\n".join(lines) + "\n"


def partition_windows(series: TickSeries, window_len: int, mode: str = "disjoint") -> list[Window]:
    """Split a series into count-based windows.

    disjoint: floor(len/N) consecutive non-overlapping windows (a trailing
    remainder shorter than N is dropped). sliding: len-N+1 windows stepping
    one tick at a time. Window centers are median tick times.
    """
    if window_len < 1:
        raise DataError(f"window length must be >= 1, got {window_len}")
    n = len(series)
    if n == 0:
        raise DataError("cannot window an empty series")
    if window_len > n:
        raise DataError(f"window length {window_len} exceeds series length {n}")
    if mode not in ("disjoint", "sliding"):
        raise DataError(f"unknown windowing mode {mode!r}")

    windows = []
    if mode == "disjoint":
        for i in range(n // window_len):
            windows.append(window_from_ticks(series.ticks[i * window_len:(i + 1) * window_len]))
    else:
        for i in range(n - window_len + 1):
            windows.append(window_from_ticks(series.ticks[i:i + window_len]))
    return windows
