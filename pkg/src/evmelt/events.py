"""Core event data types: sensor geometry, single events, and time-ordered streams.

Timestamps are 64-bit microseconds counted from a per-stream epoch, so no
wraparound handling is needed anywhere in the toolkit (the 32-bit delta cap
lives in the binary codec only).  Streams are immutable after construction
and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

MAX_SENSOR_DIM = 16384

# DVS240 and DAVIS346 geometries, used as convenient defaults.
DVS240 = (240, 180)
DAVIS346 = (346, 260)


class GeometryMismatchError(ValueError):
    """Two streams with different sensor geometries were combined."""


@dataclass(frozen=True)
class SensorGeometry:
    """Pixel-array dimensions of an event sensor."""

    width: int
    height: int

    def __post_init__(self) -> None:
        for name, v in (("width", self.width), ("height", self.height)):
            if not 1 <= v <= MAX_SENSOR_DIM:
                raise ValueError(f"{name} must be in [1, {MAX_SENSOR_DIM}], got {v}")

    @property
    def pixel_count(self) -> int:
        return self.width * self.height


@dataclass(frozen=True)
class Event:
    """One asynchronous brightness-change detection.

    t is microseconds since the stream epoch; p is +1 (brighter) or -1 (darker).
    """

    t: int
    x: int
    y: int
    p: int


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    message: str = "ok"
    index: Optional[int] = None


class EventStream:
    """Time-ordered event sequence bound to a sensor geometry.

    Events are stored as parallel numpy arrays (t: uint64 us, x/y: uint16,
    p: int8).  Equal timestamps are legal and order-stable: a real sensor
    readout can emit many pixels per timestamp tick.
    """

    __slots__ = ("geometry", "t", "x", "y", "p", "epoch_label")

    def __init__(
        self,
        geometry: SensorGeometry,
        t: np.ndarray,
        x: np.ndarray,
        y: np.ndarray,
        p: np.ndarray,
        epoch_label: Optional[str] = None,
    ) -> None:
        n = len(t)
        if not (len(x) == len(y) == len(p) == n):
            raise ValueError("t, x, y, p must have equal length")
        self.geometry = geometry
        self.t = np.ascontiguousarray(t, dtype=np.uint64)
        self.x = np.ascontiguousarray(x, dtype=np.uint16)
        self.y = np.ascontiguousarray(y, dtype=np.uint16)
        self.p = np.ascontiguousarray(p, dtype=np.int8)
        self.epoch_label = epoch_label
        for arr in (self.t, self.x, self.y, self.p):
            arr.setflags(write=False)

    @classmethod
    def empty(cls, geometry: SensorGeometry, epoch_label: Optional[str] = None) -> "EventStream":
        z = np.zeros(0)
        return cls(geometry, z, z, z, z, epoch_label)

    @classmethod
    def from_events(
        cls,
        geometry: SensorGeometry,
        events: Iterable[Event],
        epoch_label: Optional[str] = None,
    ) -> "EventStream":
        evs = list(events)
        t = np.array([e.t for e in evs], dtype=np.uint64)
        x = np.array([e.x for e in evs], dtype=np.uint16)
        y = np.array([e.y for e in evs], dtype=np.uint16)
        p = np.array([e.p for e in evs], dtype=np.int8)
        return cls(geometry, t, x, y, p, epoch_label)

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i: int) -> Event:
        return Event(int(self.t[i]), int(self.x[i]), int(self.y[i]), int(self.p[i]))

    def __iter__(self) -> Iterator[Event]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented
        return (
            self.geometry == other.geometry
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.p, other.p)
        )

    def __repr__(self) -> str:
        g = self.geometry
        return f"EventStream({g.width}x{g.height}, {len(self)} events)"

    # ------------------------------------------------------------------
    # Operations

    def validate(self) -> ValidationReport:
        """Check all stream invariants; never raises.

        Reports the index of the first violation when not ok.
        """
        if len(self) == 0:
            return ValidationReport(True)
        bad = np.nonzero(self.t[1:] < self.t[:-1])[0]
        if bad.size:
            i = int(bad[0]) + 1
            return ValidationReport(False, f"unsorted at index {i}", i)
        oob = np.nonzero(self.x >= self.geometry.width)[0]
        if oob.size:
            i = int(oob[0])
            return ValidationReport(False, f"x out of bounds at index {i}", i)
        oob = np.nonzero(self.y >= self.geometry.height)[0]
        if oob.size:
            i = int(oob[0])
            return ValidationReport(False, f"y out of bounds at index {i}", i)
        badp = np.nonzero(np.abs(self.p.astype(np.int16)) != 1)[0]
        if badp.size:
            i = int(badp[0])
            return ValidationReport(False, f"polarity not in {{+1,-1}} at index {i}", i)
        return ValidationReport(True)

    def slice(self, t0: int, t1: int) -> "EventStream":
        """Events with t0 <= t < t1 (half-open), order preserved.

        Half-open so tiled windows partition a stream with no double counting.
        """
        if t0 > t1:
            raise ValueError(f"slice requires t0 <= t1, got {t0} > {t1}")
        lo = int(np.searchsorted(self.t, t0, side="left"))
        hi = int(np.searchsorted(self.t, t1, side="left"))
        return EventStream(
            self.geometry, self.t[lo:hi], self.x[lo:hi], self.y[lo:hi], self.p[lo:hi],
            self.epoch_label,
        )

    def merge(self, other: "EventStream") -> "EventStream":
        """Time-ordered merge; equal timestamps keep self's events first."""
        if self.geometry != other.geometry:
            raise GeometryMismatchError(
                f"geometry mismatch: {self.geometry} vs {other.geometry}"
            )
        t = np.concatenate([self.t, other.t])
        # Stable sort on t alone: self's block precedes other's, so ties
        # resolve self-before-other and intra-stream order is preserved.
        order = np.argsort(t, kind="stable")
        return EventStream(
            self.geometry,
            t[order],
            np.concatenate([self.x, other.x])[order],
            np.concatenate([self.y, other.y])[order],
            np.concatenate([self.p, other.p])[order],
            self.epoch_label,
        )


def from_arrays(
    geometry: SensorGeometry,
    t: Sequence[int],
    x: Sequence[int],
    y: Sequence[int],
    p: Sequence[int],
    epoch_label: Optional[str] = None,
) -> EventStream:
    """Convenience constructor from plain sequences."""
    return EventStream(
        geometry,
        np.asarray(t, dtype=np.uint64),
        np.asarray(x, dtype=np.uint16),
        np.asarray(y, dtype=np.uint16),
        np.asarray(p, dtype=np.int8),
        epoch_label,
    )
