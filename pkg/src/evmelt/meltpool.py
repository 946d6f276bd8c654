"""Melt-pool observables from event frames.

Segments activity blobs from coded frames, measures pool shape (aspect
ratio and orientation from second central moments, so the measures are
rotation-robust), and links high-density anomaly blobs into tracks across
frames with deterministic greedy nearest-neighbor matching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .framing import Frame

_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class BlobComponent:
    """One 8-connected activity blob with |value|-weighted moments."""

    ys: np.ndarray
    xs: np.ndarray
    weights: np.ndarray
    centroid: Tuple[float, float]  # (x, y), sub-pixel
    area: int
    mu20: float
    mu02: float
    mu11: float
    mean_abs_value: float

    def moment_matrix(self) -> np.ndarray:
        m = float(np.sum(self.weights))
        return np.array([[self.mu20, self.mu11], [self.mu11, self.mu02]]) / m


def _moments(ys: np.ndarray, xs: np.ndarray, weights: np.ndarray) -> BlobComponent:
    m = float(weights.sum())
    cx = float((weights * xs).sum() / m)
    cy = float((weights * ys).sum() / m)
    dx = xs - cx
    dy = ys - cy
    return BlobComponent(
        ys=ys,
        xs=xs,
        weights=weights,
        centroid=(cx, cy),
        area=len(xs),
        mu20=float((weights * dx * dx).sum()),
        mu02=float((weights * dy * dy).sum()),
        mu11=float((weights * dx * dy).sum()),
        mean_abs_value=m / len(xs),
    )


def shape_from_moments(comp: BlobComponent) -> Tuple[float, float]:
    """(aspect_ratio, orientation) from the normalized moment matrix.

    aspect_ratio = sqrt(lambda_max / lambda_min); orientation is the
    principal-axis angle in (-pi/2, pi/2].
    """
    m = comp.moment_matrix()
    a, b, c = m[0, 0], m[0, 1], m[1, 1]
    half_trace = 0.5 * (a + c)
    root = math.sqrt(max(0.25 * (a - c) ** 2 + b * b, 0.0))
    lam_max = half_trace + root
    lam_min = half_trace - root
    tiny = 1e-12 * max(lam_max, 1.0)
    if lam_max <= tiny:
        return 1.0, 0.0  # point-like blob
    if lam_min <= tiny:
        return math.inf, _principal_angle(a, b, c)
    return math.sqrt(lam_max / lam_min), _principal_angle(a, b, c)


def _principal_angle(a: float, b: float, c: float) -> float:
    theta = 0.5 * math.atan2(2.0 * b, a - c)
    if theta <= -math.pi / 2:
        theta += math.pi
    elif theta > math.pi / 2:
        theta -= math.pi
    return theta


def default_threshold(values: np.ndarray) -> float:
    """Half the median nonzero |value|; 1.0 on empty frames.

    Anchored below the typical activity level so that a blob of uniform
    activity keeps all of its pixels while scattered weak clutter drops out.
    """
    mags = np.abs(values)
    nz = mags[mags > 0]
    if nz.size == 0:
        return 1.0
    anchor = float(np.median(nz))
    return 0.5 * anchor if anchor > 0 else 1.0


def segment(frame: Frame, activity_threshold: Optional[float] = None) -> List[BlobComponent]:
    """8-connected components of |value| >= threshold, largest area first."""
    if activity_threshold is None:
        activity_threshold = default_threshold(frame.values)
    if activity_threshold <= 0:
        raise ValueError("activity_threshold must be > 0")
    mags = np.abs(frame.values)
    mask = mags >= activity_threshold
    labels, n = ndimage.label(mask, structure=_EIGHT_CONNECTED)
    comps = []
    for ys, xs in _component_indices(labels, n):
        comps.append(_moments(ys.astype(np.float64), xs.astype(np.float64), mags[ys, xs]))
    comps.sort(key=lambda c: -c.area)
    return comps


def _component_indices(labels: np.ndarray, n: int):
    if n == 0:
        return
    order = np.argsort(labels.ravel(), kind="stable")
    flat = labels.ravel()[order]
    starts = np.searchsorted(flat, np.arange(1, n + 1), side="left")
    ends = np.searchsorted(flat, np.arange(1, n + 1), side="right")
    h, w = labels.shape
    for s, e in zip(starts, ends):
        idx = order[s:e]
        yield idx // w, idx % w


@dataclass(frozen=True)
class PoolGeometry:
    """Largest-blob shape measures for one frame."""

    t_us: int
    component: BlobComponent
    aspect_ratio: float
    orientation: float


@dataclass
class AnomalyTrack:
    track_id: int
    t_us: List[int] = field(default_factory=list)
    cx: List[float] = field(default_factory=list)
    cy: List[float] = field(default_factory=list)
    density: List[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.t_us)


@dataclass(frozen=True)
class AnomalyParams:
    density_factor: float = 3.0
    max_link_dist: float = 8.0
    min_track_len: int = 5
    activity_threshold: Optional[float] = None

    def __post_init__(self) -> None:
        if self.density_factor < 1.0:
            raise ValueError("density_factor must be >= 1")
        if self.max_link_dist <= 0 or self.min_track_len < 1:
            raise ValueError("max_link_dist must be > 0 and min_track_len >= 1")


def pool_series(
    frames: Sequence[Frame],
    activity_threshold: Optional[float] = None,
) -> List[Optional[PoolGeometry]]:
    """Per-frame pool geometry from the largest blob; None marks empty frames."""
    if not frames:
        raise ValueError("frames must be non-empty")
    out: List[Optional[PoolGeometry]] = []
    for f in frames:
        comps = segment(f, activity_threshold)
        if not comps:
            out.append(None)
            continue
        pool = comps[0]
        ar, theta = shape_from_moments(pool)
        out.append(PoolGeometry(f.t_start_us, pool, ar, theta))
    return out


def _frame_candidates(frame: Frame, params: AnomalyParams) -> List[BlobComponent]:
    comps = segment(frame, params.activity_threshold)
    if not comps:
        return []
    pool = comps[0]
    pool_median = float(np.median(pool.weights))
    cutoff = params.density_factor * pool_median
    cands = [c for c in comps[1:] if c.mean_abs_value > cutoff]
    # high-density sub-blobs hiding inside the pool: re-threshold pool pixels
    mags = np.abs(frame.values)
    sub_mask = np.zeros(mags.shape, dtype=bool)
    sub_mask[pool.ys.astype(np.intp), pool.xs.astype(np.intp)] = mags[
        pool.ys.astype(np.intp), pool.xs.astype(np.intp)
    ] > cutoff
    labels, n = ndimage.label(sub_mask, structure=_EIGHT_CONNECTED)
    for ys, xs in _component_indices(labels, n):
        if len(xs) > 0.5 * pool.area:
            continue  # that's just the pool itself, not a localized anomaly
        cands.append(_moments(ys.astype(np.float64), xs.astype(np.float64), mags[ys, xs]))
    cands.sort(key=lambda c: -c.area)
    return cands


def detect_anomalies(
    frames: Sequence[Frame],
    params: AnomalyParams = AnomalyParams(),
) -> List[AnomalyTrack]:
    """Link high-density blobs across consecutive frames into tracks.

    Greedy matching, smallest distance first, ties by smallest candidate
    index; tracks shorter than min_track_len are discarded.  Deterministic.
    """
    tracks: List[AnomalyTrack] = []
    active: List[AnomalyTrack] = []
    next_id = 0
    for frame_idx, frame in enumerate(frames):
        cands = _frame_candidates(frame, params)
        pairs = []
        for ti, tr in enumerate(active):
            for ci, c in enumerate(cands):
                d = math.hypot(tr.cx[-1] - c.centroid[0], tr.cy[-1] - c.centroid[1])
                if d <= params.max_link_dist:
                    pairs.append((d, ci, ti))
        pairs.sort()
        used_t, used_c = set(), set()
        assigned = {}
        for d, ci, ti in pairs:
            if ti in used_t or ci in used_c:
                continue
            used_t.add(ti)
            used_c.add(ci)
            assigned[ci] = active[ti]
        still_active = []
        for ci, c in enumerate(cands):
            tr = assigned.get(ci)
            if tr is None:
                tr = AnomalyTrack(next_id)
                next_id += 1
                tracks.append(tr)
            tr.t_us.append(frame.t_start_us)
            tr.cx.append(c.centroid[0])
            tr.cy.append(c.centroid[1])
            tr.density.append(c.mean_abs_value)
            still_active.append(tr)
        active = still_active
    return [t for t in tracks if len(t) >= params.min_track_len]


def pool_series_csv(series: Sequence[Optional[PoolGeometry]]) -> str:
    lines = ["t_us,area,aspect_ratio,orientation"]
    for pg in series:
        if pg is None:
            continue
        lines.append(
            f"{pg.t_us},{pg.component.area},{pg.aspect_ratio!r},{pg.orientation!r}"
        )
    return "\n".join(lines) + "\n"


def tracks_csv(tracks: Sequence[AnomalyTrack]) -> str:
    lines = ["track_id,t_us,cx,cy,density"]
    for tr in tracks:
        for t, x, y, d in zip(tr.t_us, tr.cx, tr.cy, tr.density):
            lines.append(f"{tr.track_id},{t},{x!r},{y!r},{d!r}")
    return "\n".join(lines) + "\n"
