"""Bit-exact binary (EVT1) and CSV serialization of event streams.

EVT1 layout, little-endian throughout:

    header, 25 bytes:
        magic       4 bytes  b"EVT1"
        version     u8       1
        width       u16
        height      u16
        epoch_us    u64      timestamp of the first event (0 if empty)
        event_count u64
    then event_count records, 8 bytes each:
        t_delta     u32      microseconds since epoch_us
        packed      u32      bits 0-13 x, bits 14-27 y, bit 28 polarity
                             (1 = +1, 0 = -1), bits 29-31 reserved zero

The 8-byte fixed record is the figure the memory-footprint model uses; the
32-bit delta caps one file at ~71.6 minutes, so longer streams must be split
by the caller.
"""

from __future__ import annotations

import io
import struct

import numpy as np

from .events import EventStream, SensorGeometry

MAGIC = b"EVT1"
VERSION = 1
HEADER_SIZE = 25
RECORD_SIZE = 8
_HEADER_STRUCT = struct.Struct("<4sBHHQQ")

T_DELTA_MAX = 2**32 - 1


class CodecError(ValueError):
    """Base class for serialization errors."""


class BadMagicError(CodecError):
    pass


class UnsupportedVersionError(CodecError):
    pass


class TruncatedBodyError(CodecError):
    pass


class OutOfBoundsError(CodecError):
    pass


class NonMonotoneTimestampError(CodecError):
    pass


class TimestampOverflowError(CodecError):
    """A timestamp delta does not fit in 32 bits; split the stream first."""


class CsvFormatError(CodecError):
    pass


def encode_evt1(stream: EventStream) -> bytes:
    n = len(stream)
    epoch = int(stream.t[0]) if n else 0
    deltas = stream.t - np.uint64(epoch)
    if n and int(deltas[-1]) > T_DELTA_MAX:
        raise TimestampOverflowError(
            f"timestamp span {int(deltas[-1])} us exceeds 32-bit delta range"
        )
    header = _HEADER_STRUCT.pack(
        MAGIC, VERSION, stream.geometry.width, stream.geometry.height, epoch, n
    )
    packed = (
        stream.x.astype(np.uint32)
        | (stream.y.astype(np.uint32) << np.uint32(14))
        | ((stream.p > 0).astype(np.uint32) << np.uint32(28))
    )
    records = np.empty((n, 2), dtype="<u4")
    records[:, 0] = deltas.astype(np.uint32)
    records[:, 1] = packed
    return header + records.tobytes()


def decode_evt1(data: bytes) -> EventStream:
    if len(data) < HEADER_SIZE:
        if data[:4] != MAGIC:
            raise BadMagicError("bad magic")
        raise TruncatedBodyError(f"header needs {HEADER_SIZE} bytes, got {len(data)}")
    magic, version, width, height, epoch, count = _HEADER_STRUCT.unpack_from(data)
    if magic != MAGIC:
        raise BadMagicError("bad magic")
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported version {version}")
    try:
        geometry = SensorGeometry(width, height)
    except ValueError as e:
        raise OutOfBoundsError(str(e)) from e
    body = len(data) - HEADER_SIZE
    if body < count * RECORD_SIZE:
        raise TruncatedBodyError(
            f"header claims {count} records but body holds {body // RECORD_SIZE}"
        )
    end = HEADER_SIZE + count * RECORD_SIZE
    records = np.frombuffer(data, dtype="<u4", count=2 * count, offset=HEADER_SIZE)
    records = records.reshape(count, 2)
    deltas = records[:, 0]
    packed = records[:, 1]
    if count and np.any(deltas[1:] < deltas[:-1]):
        raise NonMonotoneTimestampError("reconstructed timestamps are not nondecreasing")
    x = (packed & np.uint32(0x3FFF)).astype(np.uint16)
    y = ((packed >> np.uint32(14)) & np.uint32(0x3FFF)).astype(np.uint16)
    if np.any(x >= width) or np.any(y >= height):
        raise OutOfBoundsError("event coordinates outside sensor geometry")
    p = np.where((packed >> np.uint32(28)) & np.uint32(1), 1, -1).astype(np.int8)
    t = deltas.astype(np.uint64) + np.uint64(epoch)
    del end  # decoder never reads past the declared count; trailing bytes ignored
    return EventStream(geometry, t, x, y, p)


def encoded_size(event_count: int) -> int:
    """Exact EVT1 byte length for a stream with the given event count."""
    return HEADER_SIZE + RECORD_SIZE * event_count


# ----------------------------------------------------------------------
# CSV interchange (for plotting tools)

CSV_HEADER = "t_us,x,y,p"


def write_csv(stream: EventStream) -> str:
    lines = [CSV_HEADER]
    lines.extend(
        f"{int(t)},{int(x)},{int(y)},{int(p)}"
        for t, x, y, p in zip(stream.t, stream.x, stream.y, stream.p)
    )
    return "\n".join(lines) + "\n"


def read_csv(text: str, geometry: SensorGeometry) -> EventStream:
    buf = io.StringIO(text)
    first = buf.readline().strip()
    if first != CSV_HEADER:
        raise CsvFormatError(f"line 1: expected header '{CSV_HEADER}', got '{first}'")
    ts, xs, ys, ps = [], [], [], []
    for lineno, line in enumerate(buf, start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise CsvFormatError(f"line {lineno}: expected 4 fields, got {len(parts)}")
        try:
            t, x, y, p = (int(v) for v in parts)
        except ValueError as e:
            raise CsvFormatError(f"line {lineno}: {e}") from e
        if p not in (1, -1):
            raise CsvFormatError(f"line {lineno}: polarity must be 1 or -1, got {p}")
        ts.append(t)
        xs.append(x)
        ys.append(y)
        ps.append(p)
    return EventStream(
        geometry,
        np.array(ts, dtype=np.uint64),
        np.array(xs, dtype=np.uint16),
        np.array(ys, dtype=np.uint16),
        np.array(ps, dtype=np.int8),
    )
