"""Adaptive-sampling diagnostics and the memory-footprint comparison.

Covers the cumulative event fraction over time, windowed event rates, burst
(change-point) detection on either curve, and the byte accounting that
compares an event stream against a conventional uniform-framerate imager,
including the dynamic-range bit adjustment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import codec
from .events import EventStream

DB_PER_BIT = 20.0 * math.log10(2.0)  # 6.0206 dB per bit
EVENT_SENSOR_DYNAMIC_RANGE_DB = 120.0


class NoBurstError(ValueError):
    """The curve has no distinguished maximum-slope bin."""


@dataclass(frozen=True)
class CumulativeCurve:
    """Cumulative fraction of total events reached by each bin's right edge."""

    bin_edges_us: np.ndarray
    fraction: np.ndarray


@dataclass(frozen=True)
class RateCurve:
    bin_centers_us: np.ndarray
    events_per_second: np.ndarray


@dataclass(frozen=True)
class FootprintModel:
    """Conventional-imager baseline for the memory comparison."""

    width: int
    height: int
    fps: float
    bytes_per_pixel: int
    duration_us: int
    bytes_per_event: int = codec.RECORD_SIZE

    def __post_init__(self) -> None:
        for name in ("width", "height", "fps", "bytes_per_pixel", "bytes_per_event"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.duration_us < 0:
            raise ValueError("duration_us must be >= 0")


@dataclass(frozen=True)
class SavingsReport:
    raw_ratio: float
    dr_adjusted_ratio: float
    equivalent_bits: float
    event_bytes: int
    conventional_bytes: int
    bytes_per_pixel: int

    def as_text(self) -> str:
        bits = self.equivalent_bits
        need_bytes = math.ceil(bits) / 8.0
        direction = (
            "the conventional baseline would need MORE storage to match the "
            "event sensor's dynamic range"
            if need_bytes > self.bytes_per_pixel
            else "the conventional baseline already stores at least the "
            "equivalent bit depth"
        )
        return (
            "memory footprint comparison\n"
            "---------------------------\n"
            f"event stream:        {self.event_bytes} bytes\n"
            f"conventional imager: {self.conventional_bytes} bytes "
            f"({self.bytes_per_pixel} B/px)\n"
            f"raw ratio (conventional/event): {self.raw_ratio:.6g}\n"
            f"event-sensor dynamic range: {EVENT_SENSOR_DYNAMIC_RANGE_DB:.0f} dB "
            f"= {bits:.2f} bits (ceil -> {math.ceil(bits)} bits "
            f"= {need_bytes:.2g} bytes/pixel)\n"
            f"dr-adjusted ratio = raw_ratio * {need_bytes:.2g}/{self.bytes_per_pixel} "
            f"= {self.dr_adjusted_ratio:.6g}\n"
            f"note: {direction}\n"
        )

    def as_kv(self) -> str:
        return (
            f"raw_ratio={self.raw_ratio!r}\n"
            f"dr_adjusted_ratio={self.dr_adjusted_ratio!r}\n"
            f"equivalent_bits={self.equivalent_bits!r}\n"
            f"event_bytes={self.event_bytes}\n"
            f"conventional_bytes={self.conventional_bytes}\n"
        )


def cumulative_fraction(stream: EventStream, bin_count: int = 200) -> CumulativeCurve:
    """Fraction of all events at or before each bin's right edge.

    Bins are uniform over [t_first, t_last].
    """
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")
    n = len(stream)
    if n == 0:
        raise ValueError("no events")
    t0, t1 = float(stream.t[0]), float(stream.t[-1])
    edges = np.linspace(t0, t1, bin_count + 1)
    counts = np.searchsorted(stream.t, edges[1:], side="right")
    return CumulativeCurve(edges, counts / n)


def event_rate(stream: EventStream, window_us: int) -> RateCurve:
    """Events per second in tiled half-open windows starting at t_first."""
    if window_us <= 0:
        raise ValueError("window_us must be > 0")
    if len(stream) == 0:
        return RateCurve(np.zeros(0), np.zeros(0))
    t0 = int(stream.t[0])
    span = int(stream.t[-1]) - t0
    n_bins = span // window_us + 1
    idx = (stream.t.astype(np.int64) - t0) // window_us
    counts = np.bincount(idx, minlength=n_bins).astype(np.float64)
    centers = t0 + (np.arange(n_bins) + 0.5) * window_us
    return RateCurve(centers, counts / (window_us * 1e-6))


def detect_burst(curve: Union[CumulativeCurve, RateCurve]) -> float:
    """Center of the bin with the steepest increase (or highest rate).

    Ties resolve to the earliest bin; a flat curve raises NoBurstError.
    """
    if isinstance(curve, CumulativeCurve):
        if len(curve.fraction) < 3:
            raise ValueError("curve must have at least 3 bins")
        slopes = np.diff(np.concatenate([[0.0], curve.fraction]))
        centers = 0.5 * (curve.bin_edges_us[:-1] + curve.bin_edges_us[1:])
    else:
        if len(curve.events_per_second) < 3:
            raise ValueError("curve must have at least 3 bins")
        slopes = curve.events_per_second
        centers = curve.bin_centers_us
    if np.max(slopes) == np.min(slopes):
        raise NoBurstError("no burst: curve is constant")
    return float(centers[int(np.argmax(slopes))])


def event_footprint(stream: EventStream, bytes_per_event: int = codec.RECORD_SIZE) -> int:
    """Container bytes for the stream: header plus fixed-width records."""
    if bytes_per_event < 1:
        raise ValueError("bytes_per_event must be >= 1")
    return codec.HEADER_SIZE + bytes_per_event * len(stream)


def conventional_footprint(model: FootprintModel) -> int:
    """Raw frame-stack bytes for the conventional baseline, no container."""
    n_frames = math.ceil(model.fps * model.duration_us * 1e-6)
    return model.width * model.height * model.bytes_per_pixel * n_frames


def db_to_bits(db: float) -> float:
    """Equivalent bit depth for a dynamic range in dB (dB = 20 log10 2^bits)."""
    if db <= 0:
        raise ValueError("db must be > 0")
    return db / DB_PER_BIT


def bits_to_db(bits: float) -> float:
    if bits <= 0:
        raise ValueError("bits must be > 0")
    return bits * DB_PER_BIT


def savings_report(stream: EventStream, model: FootprintModel) -> SavingsReport:
    """Conventional-vs-event byte ratio, raw and dynamic-range adjusted.

    The adjustment assumes a conventional pixel would need
    ceil(db_to_bits(120)) = 20 bits (2.5 bytes) to match the event sensor's
    dynamic range, so adjusted = raw * 2.5 / bytes_per_pixel.
    """
    ev = event_footprint(stream, model.bytes_per_event)
    conv = conventional_footprint(model)
    raw = conv / ev
    bits = db_to_bits(EVENT_SENSOR_DYNAMIC_RANGE_DB)
    need_bytes = math.ceil(bits) / 8.0
    adjusted = raw * need_bytes / model.bytes_per_pixel
    return SavingsReport(raw, adjusted, bits, ev, conv, model.bytes_per_pixel)


def curve_to_csv(curve: Union[CumulativeCurve, RateCurve]) -> str:
    lines = ["bin_center_us,value"]
    if isinstance(curve, CumulativeCurve):
        centers = 0.5 * (curve.bin_edges_us[:-1] + curve.bin_edges_us[1:])
        values = curve.fraction
    else:
        centers = curve.bin_centers_us
        values = curve.events_per_second
    lines.extend(f"{float(c)!r},{float(v)!r}" for c, v in zip(centers, values))
    return "\n".join(lines) + "\n"
