"""Event-to-frame formation: windowed accumulation and digital coded exposure.

A frame is the weighted sum of event polarities over a time window; the
weight function (the exposure code) shapes which temporal frequencies
contribute.  Weights are evaluated at exact event timestamps, so the boxcar
code is bit-identical to plain accumulation and the sensor's microsecond
resolution is preserved.  Frames hold signed real values; quantization to
8 bits happens only in to_image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .events import EventStream, SensorGeometry

US_PER_S = 1_000_000.0

CODE_KINDS = ("boxcar", "flutter", "bandpass")


@dataclass(frozen=True)
class ExposureCode:
    """Temporal weighting function over a window of window_us microseconds.

    boxcar: weight 1 everywhere.
    flutter: chip_count pseudo-random +-1 chips drawn from rng_seed.
    bandpass: raised-cosine envelope (peak 1 at window/2) times a cosine
    carrier at center_freq_hz, phase-aligned to the window center.
    """

    kind: str
    window_us: int
    chip_count: int = 32
    rng_seed: int = 0
    center_freq_hz: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in CODE_KINDS:
            raise ValueError(f"unknown code kind '{self.kind}'")
        if self.window_us <= 0:
            raise ValueError("window_us must be > 0")
        if self.kind == "flutter" and self.chip_count < 1:
            raise ValueError("flutter chip_count must be >= 1")
        if self.kind == "bandpass":
            if not self.center_freq_hz > 0:
                raise ValueError("bandpass center_freq_hz must be > 0")
            if self.center_freq_hz > US_PER_S / 2:
                raise ValueError("bandpass center_freq_hz exceeds microsecond Nyquist")

    def chips(self) -> np.ndarray:
        rng = np.random.default_rng(self.rng_seed)
        return np.where(rng.random(self.chip_count) < 0.5, -1.0, 1.0)

    def weights(self, offsets_us: np.ndarray) -> np.ndarray:
        """Evaluate the code at event offsets (microseconds from t_start)."""
        off = np.asarray(offsets_us, dtype=np.float64)
        if self.kind == "boxcar":
            return np.ones_like(off)
        if self.kind == "flutter":
            idx = np.minimum(
                (off * self.chip_count / self.window_us).astype(np.int64),
                self.chip_count - 1,
            )
            return self.chips()[idx]
        env = 0.5 * (1.0 - np.cos(2 * math.pi * off / self.window_us))
        carrier = np.cos(
            2 * math.pi * self.center_freq_hz * (off - self.window_us / 2) / US_PER_S
        )
        return env * carrier

    def descriptor(self) -> str:
        if self.kind == "boxcar":
            return f"boxcar(window={self.window_us}us)"
        if self.kind == "flutter":
            return (
                f"flutter(window={self.window_us}us,chips={self.chip_count},"
                f"seed={self.rng_seed})"
            )
        return f"bandpass(window={self.window_us}us,f0={self.center_freq_hz}Hz)"


def boxcar(window_us: int) -> ExposureCode:
    return ExposureCode("boxcar", window_us)


def flutter(window_us: int, chip_count: int = 32, rng_seed: int = 0) -> ExposureCode:
    return ExposureCode("flutter", window_us, chip_count=chip_count, rng_seed=rng_seed)


def bandpass(window_us: int, center_freq_hz: float) -> ExposureCode:
    return ExposureCode("bandpass", window_us, center_freq_hz=center_freq_hz)


@dataclass
class Frame:
    """Per-pixel signed accumulation over one window."""

    geometry: SensorGeometry
    t_start_us: int
    window_us: int
    values: np.ndarray
    code_descriptor: str = "boxcar"

    def energy(self) -> float:
        return float(np.sum(self.values.astype(np.float64) ** 2))


def coded_frame(stream: EventStream, code: ExposureCode, t_start: int) -> Frame:
    """Weighted polarity sum over [t_start, t_start + window)."""
    window = stream.slice(t_start, t_start + code.window_us)
    values = np.zeros((stream.geometry.height, stream.geometry.width), dtype=np.float64)
    if len(window):
        offsets = window.t.astype(np.float64) - float(t_start)
        contrib = window.p.astype(np.float64) * code.weights(offsets)
        np.add.at(values, (window.y.astype(np.intp), window.x.astype(np.intp)), contrib)
    return Frame(stream.geometry, t_start, code.window_us, values, code.descriptor())


def accumulate(stream: EventStream, t_start: int, window_us: int) -> Frame:
    """Plain signed event count per pixel (boxcar code)."""
    return coded_frame(stream, boxcar(window_us), t_start)


def frame_sequence(
    stream: EventStream,
    stride_us: int,
    code: ExposureCode,
    t_first: Optional[int] = None,
    t_last: Optional[int] = None,
) -> List[Frame]:
    """Frames at t_first + k*stride for k = 0.. while t_start < t_last.

    Windows may overlap (window > stride) or leave gaps (window < stride).
    """
    if stride_us <= 0:
        raise ValueError("stride_us must be > 0")
    if len(stream) == 0:
        return []
    if t_first is None:
        t_first = int(stream.t[0])
    if t_last is None:
        t_last = int(stream.t[-1])
    frames = []
    t_start = t_first
    while t_start < t_last:
        frames.append(coded_frame(stream, code, t_start))
        t_start += stride_us
    return frames


def to_image(frame: Frame, mapping: str = "symmetric_max", scale: float = 0.0) -> np.ndarray:
    """Map signed values to 8-bit grayscale; 0 maps to mid-gray 128.

    symmetric_max maps +-max|value| to 255/0 linearly; fixed_scale maps
    +-scale to 255/0 with clamping.
    """
    if mapping == "symmetric_max":
        m = float(np.max(np.abs(frame.values)))
        if m == 0.0:
            return np.full(frame.values.shape, 128, dtype=np.uint8)
    elif mapping == "fixed_scale":
        if scale <= 0:
            raise ValueError("fixed_scale requires scale > 0")
        m = float(scale)
    else:
        raise ValueError(f"unknown mapping '{mapping}'")
    g = np.rint(127.5 + frame.values / m * 127.5)
    return np.clip(g, 0, 255).astype(np.uint8)
