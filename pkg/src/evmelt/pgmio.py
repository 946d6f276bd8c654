"""Portable graymap output and atomic file writes.

All artifact writes go through write-temp-then-rename so an interrupted run
never leaves a truncated file behind.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Union

import numpy as np

from .sensor import IntensityVideo

PathLike = Union[str, Path]


def atomic_write_bytes(path: PathLike, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: PathLike, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def pgm_bytes(image: np.ndarray, maxval: int = 255) -> bytes:
    """Binary PGM (P5)."""
    if image.ndim != 2:
        raise ValueError("image must be 2-D")
    h, w = image.shape
    header = f"P5\n{w} {h}\n{maxval}\n".encode("ascii")
    if maxval < 256:
        body = image.astype(np.uint8).tobytes()
    else:
        body = image.astype(">u2").tobytes()
    return header + body


def write_pgm(path: PathLike, image: np.ndarray, maxval: int = 255) -> None:
    atomic_write_bytes(path, pgm_bytes(image, maxval))


def dump_video_pgm(video: IntensityVideo, out_dir: PathLike) -> None:
    """Debug dump of an intensity video as 16-bit PGMs plus a scale sidecar.

    Lossy: intensities are linearly requantized to 16 bits of the full range.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    peak = float(video.frames.max())
    scale = peak / 65535.0 if peak > 0 else 1.0
    for k in range(video.n_frames):
        img = np.rint(video.frames[k] / scale).astype(np.uint16) if peak > 0 else np.zeros(
            video.frames[k].shape, dtype=np.uint16
        )
        write_pgm(out / f"frame_{k:06d}.pgm", img, maxval=65535)
    atomic_write_text(
        out / "scale.txt",
        f"intensity_per_count={scale!r}\nframe_period_us={video.frame_period_us}\n",
    )
