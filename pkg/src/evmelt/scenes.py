"""Parametric high-dynamic-range test scenes with exact ground truth.

Each scene renders an IntensityVideo plus a SceneTruth record carrying the
generating quantities (keyhole aspect-ratio series, anomaly path, pop time)
so downstream extraction can be scored against a known answer.  All scenes
are deterministic per seed.

Kinds:
    constant     uniform level
    step         uniform level jumps by a factor at t_step
    ramp         exponential intensity ramp (linear in log)
    flicker      uniform sinusoidal log-intensity modulation
    balloon_pop  static textured disc, then a radial burst decaying with tau
    meltpool     Gaussian hot spot (~120 dB above background), dark
                 oscillating-aspect keyhole, optional orbiting anomaly blob
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from .events import SensorGeometry
from .sensor import IntensityVideo

SCENE_KINDS = ("constant", "step", "ramp", "flicker", "balloon_pop", "meltpool")

_DEFAULTS: Dict[str, Dict[str, float]] = {
    "constant": {"level": 1.0},
    "step": {"level": 1.0, "factor": math.e, "t_step_us": -1.0},
    "ramp": {"level": 1.0, "slope_log_per_s": 3.0},
    "flicker": {"level": 1.0, "amplitude_log": 0.5, "freq_hz": 50.0},
    "balloon_pop": {
        "background": 1.0,
        "disc_level": 50.0,
        "disc_radius_frac": 0.35,
        "texture_cells": 8.0,
        "t_pop_us": 3_000_000.0,
        "tau_us": 400_000.0,
        "burst_speed_px_per_s": 400.0,
        "idle_amp_log": 0.2,
        "idle_freq_hz": 0.5,
        "seed": 7.0,
    },
    "meltpool": {
        "background": 1.0,
        "peak_factor": 1e6,
        "pool_sigma_frac": 0.10,
        "keyhole_radius_frac": 0.10,
        "ar_min": 1.0,
        "ar_max": 2.5,
        "keyhole_freq_hz": 2.0,
        "keyhole_kappa": 1e-3,
        "flicker_freq_hz": 100.0,
        "flicker_amp_log": 0.5,
        "anomaly": 0.0,
        "anomaly_contrast_log": 1.0,
        "anomaly_amp_log": 3.5,
        "anomaly_radius_px": 3.0,
        "orbit_radius_frac": 0.28,
        "orbit_freq_hz": 1.0,
        "anomaly_t0_us": -1.0,
        "anomaly_t1_us": -1.0,
    },
}


@dataclass(frozen=True)
class SceneSpec:
    """Scene kind plus kind-specific parameters (unset ones take defaults)."""

    kind: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in SCENE_KINDS:
            raise ValueError(f"unknown scene kind '{self.kind}'; expected one of {SCENE_KINDS}")
        unknown = set(self.params) - set(_DEFAULTS[self.kind])
        if unknown:
            raise ValueError(f"unknown parameters for '{self.kind}': {sorted(unknown)}")

    def resolved(self) -> Dict[str, float]:
        out = dict(_DEFAULTS[self.kind])
        out.update(self.params)
        return out


@dataclass
class SceneTruth:
    """Generating quantities exposed for oracle checks."""

    frame_times_us: np.ndarray
    aspect_ratio: Optional[np.ndarray] = None
    anomaly_t_us: Optional[np.ndarray] = None
    anomaly_x: Optional[np.ndarray] = None
    anomaly_y: Optional[np.ndarray] = None
    t_pop_us: Optional[int] = None


def _frame_grid(duration_us: int, fps: float) -> Tuple[np.ndarray, int]:
    if duration_us <= 0 or fps <= 0:
        raise ValueError("duration_us and fps must be positive")
    period = max(1, int(round(1e6 / fps)))
    n = duration_us // period + 1
    if n < 2:
        raise ValueError("fps * duration must cover at least 2 frames")
    times = np.arange(n, dtype=np.int64) * period
    return times, period


def render_scene(
    spec: SceneSpec,
    geometry: SensorGeometry,
    duration_us: int,
    fps: float,
) -> Tuple[IntensityVideo, SceneTruth]:
    times, period = _frame_grid(duration_us, fps)
    p = spec.resolved()
    h, w = geometry.height, geometry.width
    t_s = times * 1e-6

    if spec.kind == "constant":
        frames = np.full((len(times), h, w), p["level"], dtype=np.float32)
        return IntensityVideo(geometry, period, frames), SceneTruth(times)

    if spec.kind == "step":
        t_step = p["t_step_us"] if p["t_step_us"] >= 0 else duration_us / 2
        levels = np.where(times >= t_step, p["level"] * p["factor"], p["level"])
        frames = np.broadcast_to(
            levels[:, None, None].astype(np.float64), (len(times), h, w)
        ).copy()
        return IntensityVideo(geometry, period, frames), SceneTruth(times)

    if spec.kind == "ramp":
        levels = p["level"] * np.exp(p["slope_log_per_s"] * t_s)
        frames = np.broadcast_to(
            levels[:, None, None].astype(np.float64), (len(times), h, w)
        ).copy()
        return IntensityVideo(geometry, period, frames), SceneTruth(times)

    if spec.kind == "flicker":
        levels = p["level"] * np.exp(
            p["amplitude_log"] * np.sin(2 * math.pi * p["freq_hz"] * t_s)
        )
        frames = np.broadcast_to(
            levels[:, None, None].astype(np.float64), (len(times), h, w)
        ).copy()
        return IntensityVideo(geometry, period, frames), SceneTruth(times)

    if spec.kind == "balloon_pop":
        return _render_balloon(geometry, times, period, p)

    if spec.kind == "meltpool":
        return _render_meltpool(geometry, times, period, p)

    raise AssertionError(f"unhandled kind {spec.kind}")


def _render_balloon(geometry, times, period, p):
    h, w = geometry.height, geometry.width
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    radius = p["disc_radius_frac"] * min(w, h)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    r = np.hypot(xx - cx, yy - cy)
    disc = r <= radius
    # checkerboard texture over the disc, phase fixed by seed
    rng = np.random.default_rng(int(p["seed"]))
    phase = rng.uniform(0, 2 * math.pi, size=2)
    cells = p["texture_cells"]

    def texture(shift_px: float) -> np.ndarray:
        gx = np.sin(2 * math.pi * cells * (xx - cx + shift_px) / (2 * radius) + phase[0])
        gy = np.sin(2 * math.pi * cells * (yy - cy) / (2 * radius) + phase[1])
        return 0.5 + 0.5 * np.sign(gx * gy)

    t_pop = int(p["t_pop_us"])
    tau = p["tau_us"]
    frames = np.empty((len(times), h, w), dtype=np.float32)
    base_tex = texture(0.0)
    for k, t in enumerate(times):
        # gentle breathing keeps the quiet stretches from being dead silent
        mod = math.exp(
            p["idle_amp_log"] * math.sin(2 * math.pi * p["idle_freq_hz"] * t * 1e-6)
        )
        if t < t_pop:
            tex = base_tex
            amp = 1.0
        else:
            dt_s = (t - t_pop) * 1e-6
            tex = texture(p["burst_speed_px_per_s"] * dt_s)
            amp = math.exp(-(t - t_pop) / tau)
        img = np.full((h, w), p["background"], dtype=np.float64)
        img[disc] = p["background"] + p["disc_level"] * mod * (0.2 + 0.8 * amp * tex[disc])
        frames[k] = img
    truth = SceneTruth(times, t_pop_us=t_pop)
    return IntensityVideo(geometry, period, frames), truth


def _render_meltpool(geometry, times, period, p):
    h, w = geometry.height, geometry.width
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    sigma = p["pool_sigma_frac"] * min(w, h)
    hot = p["peak_factor"] * p["background"] * np.exp(
        -((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * sigma**2)
    )
    r0 = p["keyhole_radius_frac"] * min(w, h)
    ar_mid = (p["ar_min"] + p["ar_max"]) / 2.0
    ar_amp = (p["ar_max"] - p["ar_min"]) / 2.0
    t_s = times * 1e-6
    ar_series = ar_mid + ar_amp * np.sin(2 * math.pi * p["keyhole_freq_hz"] * t_s)

    anomaly_on = p["anomaly"] > 0
    a_t0 = p["anomaly_t0_us"] if p["anomaly_t0_us"] >= 0 else 0
    a_t1 = p["anomaly_t1_us"] if p["anomaly_t1_us"] >= 0 else times[-1]
    orbit_r = p["orbit_radius_frac"] * min(w, h)
    an_t, an_x, an_y = [], [], []

    frames = np.empty((len(times), h, w), dtype=np.float32)
    for k, t in enumerate(times):
        img = p["background"] + hot
        ar = ar_series[k]
        rx = r0 * math.sqrt(ar)
        ry = r0 / math.sqrt(ar)
        inside = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
        kh_mod = math.exp(
            p["flicker_amp_log"] * math.sin(2 * math.pi * p["flicker_freq_hz"] * t_s[k])
        )
        img = np.where(inside, p["background"] + hot * p["keyhole_kappa"] * kh_mod, img)
        if anomaly_on and a_t0 <= t <= a_t1:
            theta = 2 * math.pi * p["orbit_freq_hz"] * t_s[k]
            ax = cx + orbit_r * math.cos(theta)
            ay = cy + orbit_r * math.sin(theta)
            # flat-top profile so the blob's interior flickers at full
            # amplitude instead of being diluted by gaussian skirts
            d2 = ((xx - ax) ** 2 + (yy - ay) ** 2) / (2 * p["anomaly_radius_px"] ** 2)
            g = np.exp(-(d2**2))
            an_mod = p["anomaly_contrast_log"] + p["anomaly_amp_log"] * math.sin(
                2 * math.pi * p["flicker_freq_hz"] * t_s[k]
            )
            img = img * np.exp(g * an_mod)
            an_t.append(t)
            an_x.append(ax)
            an_y.append(ay)
        frames[k] = img
    truth = SceneTruth(
        times,
        aspect_ratio=ar_series,
        anomaly_t_us=np.array(an_t, dtype=np.int64) if an_t else None,
        anomaly_x=np.array(an_x) if an_x else None,
        anomaly_y=np.array(an_y) if an_y else None,
    )
    return IntensityVideo(geometry, period, frames), truth
