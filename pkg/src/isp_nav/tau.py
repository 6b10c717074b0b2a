"""Scale-based time-to-contact estimation for tracked objects."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Hashable

from .field import INF, IspField, PotentialTuple, RegionOfInterest, make_field, write_roi

# Recent samples kept per track; older ones are dropped to keep memory bounded.
HISTORY = 8


class TrackError(ValueError):
    pass


@dataclass(frozen=True)
class EstimatorParams:
    smoothing_alpha: float = 1.0
    min_samples: int = 2

    def __post_init__(self):
        if not 0 < self.smoothing_alpha <= 1:
            raise TrackError("smoothing_alpha must be in (0, 1]")
        if self.min_samples < 2:
            raise TrackError("min_samples must be >= 2")


@dataclass(frozen=True)
class Sample:
    t: float
    s: float
    roi: RegionOfInterest


@dataclass(frozen=True)
class ScaleTrack:
    """Immutable per-object scale history and its derived estimates.

    ``s_dot``, ``tau`` and ``tau_dot`` are ``None`` until enough samples exist.
    ``count`` is the total number of samples seen; ``samples`` holds only the
    most recent :data:`HISTORY` of them.
    """

    object_id: Hashable = None
    samples: tuple = ()
    count: int = 0
    s_dot: float | None = None
    tau: float | None = None
    tau_dot: float | None = None

    @property
    def last(self) -> Sample | None:
        return self.samples[-1] if self.samples else None

    def potential(self) -> PotentialTuple:
        if self.tau is None:
            raise TrackError("track has no tau estimate yet (needs >= 2 samples)")
        tau_dot = INF if self.tau_dot is None or self.tau == INF else self.tau_dot
        return PotentialTuple.make(self.tau, tau_dot)


def tau_from_scale(s: float, s_dot: float) -> float:
    """Time to contact ``s / s_dot``; non-expanding objects never arrive."""
    if not s > 0:
        raise TrackError(f"scale must be > 0, got {s}")
    if s_dot <= 0:
        return INF
    return s / s_dot


def update_track(track: ScaleTrack, t: float, s: float, roi: RegionOfInterest,
                 params: EstimatorParams = EstimatorParams()) -> ScaleTrack:
    if not s > 0:
        raise TrackError(f"scale must be > 0, got {s}")
    prev = track.last
    sample = Sample(float(t), float(s), roi)
    samples = (track.samples + (sample,))[-HISTORY:]
    if prev is None:
        return replace(track, samples=samples, count=1)
    if not t > prev.t:
        raise TrackError(f"timestamps must increase: {t} after {prev.t}")

    dt = t - prev.t
    alpha = params.smoothing_alpha
    raw = (s - prev.s) / dt
    s_dot = raw if track.s_dot is None else alpha * raw + (1 - alpha) * track.s_dot
    tau = tau_from_scale(s, s_dot)

    tau_dot = None
    if track.tau is not None:
        if math.isfinite(tau) and math.isfinite(track.tau):
            raw_td = (tau - track.tau) / dt
            if track.tau_dot is not None and math.isfinite(track.tau_dot):
                tau_dot = alpha * raw_td + (1 - alpha) * track.tau_dot
            else:
                tau_dot = raw_td
        else:
            tau_dot = INF
    return replace(track, samples=samples, count=track.count + 1,
                   s_dot=s_dot, tau=tau, tau_dot=tau_dot)


def braking_decision(tau_dot: float, epsilon: float) -> int:
    """1 when the current deceleration avoids head-on contact with margin ``epsilon``."""
    if not epsilon > 0:
        raise TrackError("epsilon must be > 0")
    return 1 if tau_dot >= -0.5 + epsilon else 0


def object_field(track: ScaleTrack, width: int, height: int) -> IspField:
    if track.count < 2 or track.tau is None:
        raise TrackError("object_field needs a track with at least 2 samples")
    return write_roi(make_field(width, height), track.last.roi, track.potential())
