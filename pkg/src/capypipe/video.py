"""Deterministic frame-timestamp schedules under an fps and frame-cap policy."""

from __future__ import annotations

import math
from dataclasses import dataclass

_EPS = 1e-6


@dataclass(frozen=True)
class FrameSchedule:
    timestamps: tuple[float, ...]
    fps: float
    cap: int
    truncated: bool

    def __post_init__(self) -> None:
        if any(b <= a for a, b in zip(self.timestamps, self.timestamps[1:])):
            raise ValueError("timestamps must be strictly increasing")
        if len(self.timestamps) > self.cap:
            raise ValueError("schedule exceeds frame cap")


def schedule(duration: float, fps: float = 1.0, cap: int = 128) -> FrameSchedule:
    """Sample frames at interval midpoints, uniformly subsampling above the cap.

    Raw timestamps are (k + 0.5) / fps; when more than `cap` frames exist,
    `cap` of them are kept at uniformly spaced indices with both endpoints
    retained.
    """
    if duration < 0:
        raise ValueError(f"duration must be >= 0, got {duration}")
    if fps <= 0:
        raise ValueError(f"fps must be > 0, got {fps}")
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    raw_count = math.floor(duration * fps + _EPS)
    if raw_count == 0:
        if duration == 0:
            return FrameSchedule((), fps, cap, truncated=False)
        return FrameSchedule((duration / 2.0,), fps, cap, truncated=False)
    raw = [(k + 0.5) / fps for k in range(raw_count)]
    if raw_count <= cap:
        return FrameSchedule(tuple(raw), fps, cap, truncated=False)
    if cap == 1:
        return FrameSchedule((raw[0],), fps, cap, truncated=True)
    idx = sorted({round(j * (raw_count - 1) / (cap - 1)) for j in range(cap)})
    return FrameSchedule(tuple(raw[i] for i in idx), fps, cap, truncated=True)
