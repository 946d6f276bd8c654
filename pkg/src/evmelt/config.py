"""Pipeline configuration: flat dotted-key/value files with CLI overrides.

A config file is plaintext, one `section.key = value` per line, `#` starts a
comment.  Every value can also be overridden with `--set section.key=value`.
The defaults below fully describe the demo pipelines, so a config file is
optional.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Union

ConfigValue = Union[str, int, float]
Config = Dict[str, ConfigValue]


class ConfigError(ValueError):
    """Malformed config file or override."""


DEFAULTS: Config = {
    "seed": 0,
    "geometry.width": 128,
    "geometry.height": 96,
    "scene.kind": "meltpool",
    "scene.duration_us": 1_000_000,
    "scene.fps": 1000.0,
    "sensor.contrast_threshold": 0.15,
    "sensor.refractory_us": 0,
    "sensor.mismatch_sigma": 0.0,
    "sensor.background_rate_hz": 0.0,
    "framing.code": "boxcar",
    "framing.window_us": 10_000,
    "framing.stride_us": 10_000,
    "framing.center_freq_hz": 100.0,
    "framing.chip_count": 32,
    "framing.mapping": "symmetric_max",
    "framing.fixed_scale": 0.0,
    "analytics.bins": 200,
    "analytics.rate_window_us": 50_000,
    "footprint.fps": 1000.0,
    "footprint.bytes_per_pixel": 3,
    "footprint.bytes_per_event": 8,
    "meltpool.density_factor": 3.0,
    "meltpool.max_link_dist": 8.0,
    "meltpool.min_track_len": 5,
    "meltpool.activity_threshold": 0.0,  # 0 means auto (per-frame default)
    "io.events": "",  # optional pre-existing EVT1 input path
}


def _parse_value(raw: str) -> ConfigValue:
    raw = raw.strip()
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def parse_config_text(text: str, source: str = "<config>") -> Config:
    out: Config = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'section.key = value'")
        key, raw = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        out[key] = _parse_value(raw)
    return out


def load_config(
    path: Union[str, Path, None],
    overrides: Dict[str, str],
    extra_defaults: Union[Config, None] = None,
) -> Config:
    """Defaults, then file values, then --set overrides; scene.* keys are open.

    extra_defaults (e.g. a demo preset) sits between the shared defaults and
    anything user-provided.
    """
    cfg = dict(DEFAULTS)
    if extra_defaults:
        cfg.update(extra_defaults)
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config file {p}: {e}") from e
        file_cfg = parse_config_text(text, source=str(p))
        _check_keys(file_cfg, str(p))
        cfg.update(file_cfg)
    for key, raw in overrides.items():
        _check_keys({key: raw}, "--set")
        cfg[key] = _parse_value(raw)
    return cfg


def _check_keys(new: Config, source: str) -> None:
    for key in new:
        # scene parameters are kind-specific and validated by SceneSpec
        if key.startswith("scene."):
            continue
        if key not in DEFAULTS:
            raise ConfigError(f"{source}: unknown config key '{key}'")


def scene_params(cfg: Config) -> Dict[str, float]:
    """Collect scene.* keys other than the structural ones."""
    skip = {"scene.kind", "scene.duration_us", "scene.fps"}
    return {
        key.split(".", 1)[1]: float(v)
        for key, v in cfg.items()
        if key.startswith("scene.") and key not in skip
    }
