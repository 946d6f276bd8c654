"""Dynamic-vision-sensor simulation from linear-intensity video.

Each pixel tracks log intensity L(t) = ln(I(t) + eps), with I linearly
interpolated between frame samples, and fires an event whenever L moves a
full contrast threshold away from its per-pixel reference level.  Crossing
times are solved analytically inside each frame interval, so event
timestamps have sub-frame (microsecond) resolution even from coarse video.

The refractory-free path is fully vectorized; with a nonzero refractory
period a per-pixel scalar path is used (intended for small test sensors).
Both paths produce the canonical merged ordering: timestamp, then y, then x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .events import EventStream, SensorGeometry

# Fractional slack applied when counting threshold crossings, absorbing the
# intensity-floor offset and float rounding so that a step of exactly k
# thresholds yields exactly k events.
CROSSING_SLACK = 1e-4

DEFAULT_CONTRAST_THRESHOLD = 0.15
DEFAULT_FLOOR_FRACTION = 1e-6  # of scene peak, prevents log(0)


@dataclass(frozen=True)
class SensorModel:
    """Per-pixel log-intensity change detector parameters.

    contrast_threshold is in natural-log units.  mismatch_sigma is the
    standard deviation of the static per-pixel multiplicative threshold
    variation, as a fraction of the nominal threshold; it is drawn once per
    simulation (fixed-pattern, not per event).  intensity_floor None means
    1e-6 of the scene peak.  background_rate_hz adds uniform Poisson noise
    events per pixel; it defaults to 0 so oracles stay exact.
    """

    contrast_threshold: float = DEFAULT_CONTRAST_THRESHOLD
    refractory_us: int = 0
    mismatch_sigma: float = 0.0
    intensity_floor: Optional[float] = None
    rng_seed: int = 0
    background_rate_hz: float = 0.0

    def __post_init__(self) -> None:
        if not self.contrast_threshold > 0:
            raise ValueError("contrast_threshold must be > 0")
        if self.refractory_us < 0:
            raise ValueError("refractory_us must be >= 0")
        if not 0.0 <= self.mismatch_sigma < 1.0:
            raise ValueError("mismatch_sigma must be in [0, 1)")
        if self.intensity_floor is not None and not self.intensity_floor > 0:
            raise ValueError("intensity_floor must be > 0")
        if self.background_rate_hz < 0:
            raise ValueError("background_rate_hz must be >= 0")


class IntensityVideo:
    """Linear-intensity frame stack with uniform frame period.

    frames has shape (n_frames, height, width); intensities are nonnegative
    and may span an arbitrary dynamic range.
    """

    __slots__ = ("geometry", "frame_period_us", "frames")

    def __init__(self, geometry: SensorGeometry, frame_period_us: int, frames: np.ndarray):
        frames = np.asarray(frames)
        if frames.ndim != 3 or frames.shape[0] < 2:
            raise ValueError("frames must be a (n>=2, height, width) array")
        if frames.shape[1] != geometry.height or frames.shape[2] != geometry.width:
            raise ValueError(
                f"frame shape {frames.shape[1:]} does not match geometry "
                f"{geometry.height}x{geometry.width}"
            )
        if frame_period_us <= 0:
            raise ValueError("frame_period_us must be > 0")
        if not np.all(np.isfinite(frames)) or np.any(frames < 0):
            raise ValueError("intensities must be finite and nonnegative")
        self.geometry = geometry
        self.frame_period_us = int(frame_period_us)
        self.frames = frames

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def duration_us(self) -> int:
        return (self.n_frames - 1) * self.frame_period_us

    def frame_time_us(self, k: int) -> int:
        return k * self.frame_period_us


def _resolve_floor(video: IntensityVideo, model: SensorModel) -> float:
    if model.intensity_floor is not None:
        return model.intensity_floor
    peak = float(video.frames.max())
    return DEFAULT_FLOOR_FRACTION * peak if peak > 0 else DEFAULT_FLOOR_FRACTION


def _per_pixel_thresholds(model: SensorModel, geometry: SensorGeometry) -> np.ndarray:
    c = np.full((geometry.height, geometry.width), model.contrast_threshold)
    if model.mismatch_sigma > 0:
        rng = np.random.default_rng(model.rng_seed)
        draw = rng.standard_normal((geometry.height, geometry.width))
        c = model.contrast_threshold * (1.0 + model.mismatch_sigma * draw)
        # keep thresholds physical under extreme draws
        np.maximum(c, 1e-3 * model.contrast_threshold, out=c)
    return c


def simulate(video: IntensityVideo, model: SensorModel) -> EventStream:
    """Run the contrast-threshold model over a video; deterministic per seed."""
    eps = _resolve_floor(video, model)
    c_px = _per_pixel_thresholds(model, video.geometry)
    if model.refractory_us == 0:
        ts, xs, ys, ps = _simulate_vectorized(video, c_px, eps)
    else:
        ts, xs, ys, ps = _simulate_refractory(video, c_px, eps, model.refractory_us)
    if model.background_rate_hz > 0:
        bt, bx, by, bp = _background_events(video, model)
        ts = np.concatenate([ts, bt])
        xs = np.concatenate([xs, bx])
        ys = np.concatenate([ys, by])
        ps = np.concatenate([ps, bp])
    order = np.lexsort((xs, ys, ts))
    return EventStream(
        video.geometry,
        ts[order].astype(np.uint64),
        xs[order].astype(np.uint16),
        ys[order].astype(np.uint16),
        ps[order].astype(np.int8),
    )


def _simulate_vectorized(video: IntensityVideo, c_px: np.ndarray, eps: float):
    h, w = video.geometry.height, video.geometry.width
    frames = video.frames
    period = video.frame_period_us
    l_ref = np.log(frames[0].astype(np.float64) + eps)
    xg, yg = np.meshgrid(np.arange(w, dtype=np.uint16), np.arange(h, dtype=np.uint16))
    xg = xg.ravel()
    yg = yg.ravel()
    c_flat = c_px.ravel()

    t_out, x_out, y_out, p_out = [], [], [], []
    i0 = frames[0].astype(np.float64)
    for k in range(video.n_frames - 1):
        i1 = frames[k + 1].astype(np.float64)
        l1 = np.log(i1 + eps)
        d = (l1 - l_ref).ravel()
        n = np.floor(np.abs(d) / c_flat + CROSSING_SLACK).astype(np.int64)
        active = np.nonzero(n)[0]
        if active.size:
            counts = n[active]
            total = int(counts.sum())
            rep = np.repeat(active, counts)
            j = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts) + 1
            sign = np.sign(d[rep])
            level = l_ref.ravel()[rep] + sign * j * c_flat[rep]
            i_target = np.exp(level) - eps
            di = (i1.ravel()[rep] - i0.ravel()[rep])
            with np.errstate(divide="ignore", invalid="ignore"):
                tau = (i_target - i0.ravel()[rep]) / di
            tau = np.clip(np.nan_to_num(tau, nan=0.0), 0.0, 1.0)
            t_e = np.rint(k * period + tau * period).astype(np.uint64)
            t_out.append(t_e)
            x_out.append(xg[rep])
            y_out.append(yg[rep])
            p_out.append(sign.astype(np.int8))
            step = (np.sign(d) * n * c_flat).reshape(h, w)
            l_ref = l_ref + step
        i0 = i1
    if t_out:
        return (
            np.concatenate(t_out),
            np.concatenate(x_out),
            np.concatenate(y_out),
            np.concatenate(p_out),
        )
    z = np.zeros(0)
    return z.astype(np.uint64), z.astype(np.uint16), z.astype(np.uint16), z.astype(np.int8)


def _simulate_refractory(video: IntensityVideo, c_px: np.ndarray, eps: float, refractory_us: int):
    """Scalar per-pixel path honoring the refractory period.

    After each event the pixel is silent for refractory_us; on re-arm the
    reference snaps to the current log intensity (missed contrast during
    dead time is dropped).
    """
    frames = video.frames.astype(np.float64)
    period = video.frame_period_us
    n_frames = video.n_frames
    h, w = video.geometry.height, video.geometry.width
    # skip pixels whose intensity never changes
    changed = np.any(frames[1:] != frames[:-1], axis=0)
    ts, xs, ys, ps = [], [], [], []
    for y, x in zip(*np.nonzero(changed)):
        c = float(c_px[y, x])
        series = np.log(frames[:, y, x] + eps)
        intens = frames[:, y, x]
        l_ref = series[0]
        armed = True
        rearm_t = 0.0
        for k in range(n_frames - 1):
            t0, t1 = k * period, (k + 1) * period
            l0, l1 = series[k], series[k + 1]
            i0, i1 = intens[k], intens[k + 1]
            while True:
                if not armed:
                    if rearm_t >= t1:
                        break  # dead through the rest of this interval
                    # re-arm at the interpolated log level, dropping any
                    # contrast missed during dead time
                    frac = (rearm_t - t0) / period
                    i_at = i0 + frac * (i1 - i0)
                    l_ref = math.log(i_at + eps)
                    armed = True
                    t_min = rearm_t
                else:
                    t_min = t0
                d_end = l1 - l_ref
                if abs(d_end) / c + CROSSING_SLACK < 1.0 or i1 == i0:
                    break
                sign = 1.0 if d_end > 0 else -1.0
                level = l_ref + sign * c
                i_target = math.exp(level) - eps
                tau = (i_target - i0) / (i1 - i0)
                t_cross = t0 + tau * period
                if t_cross < t_min:
                    t_cross = t_min
                if t_cross >= t1:
                    break
                ts.append(int(round(t_cross)))
                xs.append(x)
                ys.append(y)
                ps.append(int(sign))
                l_ref = level
                armed = False
                rearm_t = t_cross + refractory_us
    return (
        np.array(ts, dtype=np.uint64),
        np.array(xs, dtype=np.uint16),
        np.array(ys, dtype=np.uint16),
        np.array(ps, dtype=np.int8),
    )


def _background_events(video: IntensityVideo, model: SensorModel):
    rng = np.random.default_rng(np.random.SeedSequence([model.rng_seed, 0x6E6F6973]))
    duration_s = video.duration_us * 1e-6
    lam = model.background_rate_hz * duration_s
    counts = rng.poisson(lam, size=video.geometry.pixel_count)
    total = int(counts.sum())
    pix = np.repeat(np.arange(video.geometry.pixel_count), counts)
    ts = rng.integers(0, max(video.duration_us, 1), size=total).astype(np.uint64)
    ps = np.where(rng.random(total) < 0.5, 1, -1).astype(np.int8)
    xs = (pix % video.geometry.width).astype(np.uint16)
    ys = (pix // video.geometry.width).astype(np.uint16)
    return ts, xs, ys, ps
