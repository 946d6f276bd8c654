"""Event-camera simulation, coded-exposure framing, and melt-pool analytics."""

from .events import Event, EventStream, SensorGeometry
from .sensor import IntensityVideo, SensorModel, simulate
from .scenes import SceneSpec, SceneTruth, render_scene
from .framing import ExposureCode, Frame, accumulate, bandpass, boxcar, coded_frame, flutter, frame_sequence, to_image
from .codec import decode_evt1, encode_evt1, read_csv, write_csv
from .analytics import (
    CumulativeCurve,
    FootprintModel,
    RateCurve,
    SavingsReport,
    cumulative_fraction,
    detect_burst,
    event_rate,
    savings_report,
)
from .meltpool import (
    AnomalyParams,
    AnomalyTrack,
    BlobComponent,
    PoolGeometry,
    detect_anomalies,
    pool_series,
    segment,
    shape_from_moments,
)

__all__ = [
    "Event",
    "EventStream",
    "SensorGeometry",
    "IntensityVideo",
    "SensorModel",
    "simulate",
    "SceneSpec",
    "SceneTruth",
    "render_scene",
    "ExposureCode",
    "Frame",
    "accumulate",
    "bandpass",
    "boxcar",
    "coded_frame",
    "flutter",
    "frame_sequence",
    "to_image",
    "decode_evt1",
    "encode_evt1",
    "read_csv",
    "write_csv",
    "CumulativeCurve",
    "RateCurve",
    "FootprintModel",
    "SavingsReport",
    "cumulative_fraction",
    "event_rate",
    "detect_burst",
    "savings_report",
    "BlobComponent",
    "PoolGeometry",
    "AnomalyParams",
    "AnomalyTrack",
    "segment",
    "shape_from_moments",
    "pool_series",
    "detect_anomalies",
]
