"""Safe control sets from an ISP field and goal-guided selection within them.

Steering angles here are image bearings: positive to the right of the
optical axis, as returned by :func:`camera.column_to_angle`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import compress

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .camera import CameraIntrinsics, column_to_angle
from .field import IspField, PotentialTuple
from .tau import braking_decision

# Projection margin used to land inside the half-open interval [-1, 0).
OPEN_DELTA = 1e-3


class ControlError(ValueError):
    pass


@dataclass(frozen=True)
class ControllerParams:
    T_s: float = 2.0
    w_theta: int = 9
    w_a: int = 16
    epsilon: float = 0.1
    tau_dot_E: float = 0.0  # unused by both algorithms; kept for signature parity
    k_p: float = 0.5
    literal_init: bool = False  # start the steering search from the current angle

    def __post_init__(self):
        if not self.T_s > 0:
            raise ControlError("T_s must be > 0")
        if self.w_theta < 1 or self.w_a < 1:
            raise ControlError("window widths must be >= 1")
        if not self.epsilon > 0:
            raise ControlError("epsilon must be > 0")
        if not self.k_p > 0:
            raise ControlError("k_p must be > 0")

    def check_width(self, width: int):
        if self.w_theta > width or self.w_a > width:
            raise ControlError(f"window widths must not exceed the image width {width}")


@dataclass(frozen=True)
class AccelInterval:
    lo: float
    hi: float
    hi_open: bool = False

    def clamp(self, value: float) -> float:
        hi = self.hi - OPEN_DELTA if self.hi_open else self.hi
        return min(max(value, self.lo), hi)

    def __str__(self):
        return f"[{self.lo:g},{self.hi:g}{')' if self.hi_open else ']'}"

    def __contains__(self, value):
        return self.lo <= value and (value < self.hi if self.hi_open else value <= self.hi)


FULL_RANGE = AccelInterval(-1.0, 1.0)
FULL_BRAKE = AccelInterval(-1.0, -1.0)
DECELERATE = AccelInterval(-1.0, 0.0, hi_open=True)


@dataclass(frozen=True)
class SafeColumn:
    column: int
    angle: float
    potential: PotentialTuple


@dataclass(frozen=True)
class ControlSet:
    safe_columns: tuple
    accel: AccelInterval
    central_min: PotentialTuple
    cells_read: int = 0

    @property
    def fallback_straight(self) -> bool:
        return not self.safe_columns

    @property
    def angles(self):
        return [c.angle for c in self.safe_columns]


def _column_minima(field: IspField):
    tau, tau_dot = field.tau, field.tau_dot
    col_tau = tau.min(axis=0)
    col_dot = np.where(tau == col_tau, tau_dot, np.inf).min(axis=0)
    return col_tau, col_dot


def _sliding_lexmin(col_tau, col_dot, w):
    """Min-tau tuple over the centred window of columns, truncated at the borders."""
    half = w // 2
    # inf padding stands in for the clipped border columns
    pad_t = np.pad(col_tau, half, constant_values=np.inf)
    pad_d = np.pad(col_dot, half, constant_values=np.inf)
    win_t = sliding_window_view(pad_t, 2 * half + 1)
    win_d = sliding_window_view(pad_d, 2 * half + 1)
    best_t = win_t.min(axis=1)
    best_d = np.where(win_t == best_t[:, None], win_d, np.inf).min(axis=1)
    return best_t, best_d


@lru_cache(maxsize=16)
def _column_angles(intrinsics: CameraIntrinsics) -> tuple[float, ...]:
    return tuple(column_to_angle(intrinsics, i) for i in range(intrinsics.width))


def column_min_map(field: IspField, w_theta: int) -> list[PotentialTuple]:
    if not 1 <= w_theta <= field.width:
        raise ControlError(f"w_theta must be in [1, {field.width}]")
    t, d = _sliding_lexmin(*_column_minima(field), w_theta)
    return [PotentialTuple(a, b) for a, b in zip(t.tolist(), d.tolist())]


def central_window(width: int, w_a: int) -> tuple[int, int]:
    """Inclusive column span of the acceleration window centred on width // 2."""
    lo = width // 2 - w_a // 2
    return max(lo, 0), min(lo + w_a - 1, width - 1)


def safe_controls(field: IspField, intrinsics: CameraIntrinsics,
                  params: ControllerParams) -> ControlSet:
    if (field.width, field.height) != (intrinsics.width, intrinsics.height):
        raise ControlError("field and camera dimensions differ")
    params.check_width(field.width)

    col_tau, col_dot = _column_minima(field)
    cells_read = field.tau.size
    win_t, win_d = _sliding_lexmin(col_tau, col_dot, params.w_theta)
    cells_read += field.width * (params.w_theta // 2) * 2

    # One record per column whatever the scene holds, so the Python-level work
    # depends on the image width only; the threshold then just selects.
    records = [SafeColumn(i, a, PotentialTuple(t, d))
               for i, (a, t, d) in enumerate(zip(_column_angles(intrinsics),
                                                 win_t.tolist(), win_d.tolist()))]
    safe = tuple(compress(records, (win_t >= params.T_s).tolist()))

    lo, hi = central_window(field.width, params.w_a)
    wt, wd = col_tau[lo:hi + 1], col_dot[lo:hi + 1]
    tmin = wt.min()
    central = PotentialTuple(float(tmin), float(wd[wt == tmin].min()))
    cells_read += hi - lo + 1

    if not safe:
        accel = FULL_BRAKE
    elif central.tau > params.T_s:
        accel = FULL_RANGE
    elif braking_decision(central.tau_dot, params.epsilon) == 0:
        accel = FULL_BRAKE
    else:
        accel = DECELERATE
    return ControlSet(safe, accel, central, cells_read)


def select_steering(angles, target: float, current: float = 0.0, literal: bool = False) -> float:
    """Angle closest to ``target``; ties go to the smaller |angle|, then the smaller angle.

    With ``literal`` the search starts from ``current`` and only a strictly
    closer candidate replaces it.
    """
    angles = list(angles)
    if not angles:
        return 0.0
    best = min(angles, key=lambda a: (abs(a - target), abs(a), a))
    if literal and not abs(best - target) < abs(current - target):
        return current
    return best


def guided_control(goal_pixel, field: IspField, intrinsics: CameraIntrinsics,
                   params: ControllerParams, current_steering: float, current_speed: float,
                   setpoint_speed: float, controls: ControlSet | None = None):
    """Return ``(steering, accel_scaled)`` steering toward ``goal_pixel``."""
    x_d, y_d = goal_pixel
    if not (0 <= x_d < intrinsics.width and 0 <= y_d < intrinsics.height):
        raise ControlError(f"goal pixel {goal_pixel} outside the image")
    if controls is None:
        controls = safe_controls(field, intrinsics, params)
    theta_d = column_to_angle(intrinsics, int(x_d))
    if controls.fallback_straight:
        steering = 0.0
    else:
        steering = select_steering(controls.angles, theta_d, current_steering,
                                   literal=params.literal_init)
    accel = controls.accel.clamp(params.k_p * (setpoint_speed - current_speed))
    return steering, accel

