"""Closed-loop 2D multi-agent world driven by ISP-field controllers.

Each step, every agent senses the others through its forward camera, builds
one composed field from its per-object tracks, and either runs the guided
controller (``controlled`` agents) or replays a fixed command list
(``scripted`` agents).  Kinematics are a forward-only bicycle model.

World steering is positive to the left (counter-clockwise), while image
bearings from the controller are positive to the right; the two differ by a
sign, applied at the boundary in :meth:`Simulation._command`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from .camera import (NEAR_PLANE, BodyBillboard, CameraIntrinsics, CameraPose,
                     lateral_to_column, project_billboard, to_camera_frame, wrap_angle)
from .control import FULL_BRAKE, ControlSet, ControllerParams, guided_control, safe_controls
from .field import IspField, compose_many, field_min
from .tau import EstimatorParams, ScaleTrack, object_field, update_track

WHEELBASE = 2.5


@dataclass(frozen=True)
class AgentState:
    id: str
    x: float
    y: float
    heading: float = 0.0
    speed: float = 0.0
    steering: float = 0.0
    body: BodyBillboard = BodyBillboard(2.0, 2.0)
    accel_limits: tuple = (-5.0, 3.0)
    goal: tuple | None = None
    setpoint_speed: float = 0.0

    def __post_init__(self):
        a_min, a_max = self.accel_limits
        if not a_min < 0 < a_max:
            raise ValueError(f"agent {self.id}: accel limits need a_min < 0 < a_max")
        if self.speed < 0:
            raise ValueError(f"agent {self.id}: speed must be >= 0")

    @property
    def pose(self) -> CameraPose:
        return CameraPose(self.x, self.y, self.heading)

    def billboard(self) -> BodyBillboard:
        return replace(self.body, x=self.x, y=self.y, object_id=self.id)


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.01
    steps: int = 1000
    intrinsics: CameraIntrinsics = CameraIntrinsics.centered(320, 240, 160.0)
    controller: ControllerParams = ControllerParams()
    estimator: EstimatorParams = EstimatorParams()
    steering_limit: float = 0.5
    steering_rate_limit: float = 0.02
    pixel_noise: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        self.controller.check_width(self.intrinsics.width)


@dataclass(frozen=True)
class AgentSpec:
    state: AgentState
    mode: str = "controlled"
    script: tuple | None = None

    def __post_init__(self):
        if self.mode not in ("controlled", "scripted"):
            raise ValueError(f"unknown agent mode {self.mode!r}")

    def scripted_command(self, step: int):
        """``(steer, accel)`` for ``step``; ``steer`` is None past the script's end."""
        if self.script and step < len(self.script):
            steer, accel = self.script[step]
            return float(steer), float(accel)
        return None, 0.0


@dataclass(frozen=True)
class Scenario:
    name: str
    config: SimConfig
    agents: tuple = dc_field(default_factory=tuple)

    def __post_init__(self):
        if not self.agents:
            raise ValueError("a scenario needs at least one agent")
        ids = [a.state.id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise ValueError("agent ids must be unique")


@dataclass(frozen=True)
class TraceRecord:
    step: int
    time: float
    agent: str
    x: float
    y: float
    heading: float
    speed: float
    steer_cmd: float
    accel_scaled: float
    accel_ms2: float
    min_tau: float
    safe_cols: int
    accel_lo: float
    accel_hi: float
    min_sep: float
    collided: bool


def step_agent(state: AgentState, steering_cmd: float, accel_scaled: float, dt: float,
               config: SimConfig) -> AgentState:
    accel_scaled = min(max(accel_scaled, -1.0), 1.0)
    a_min, a_max = state.accel_limits
    a = accel_scaled * a_max if accel_scaled >= 0 else accel_scaled * abs(a_min)
    speed = max(0.0, state.speed + a * dt)
    lim = config.steering_limit
    target = min(max(steering_cmd, -lim), lim)
    rate = config.steering_rate_limit
    steering = state.steering + min(max(target - state.steering, -rate), rate)
    heading = wrap_angle(state.heading + speed * math.tan(steering) / WHEELBASE * dt)
    return replace(
        state,
        x=state.x + speed * math.cos(heading) * dt,
        y=state.y + speed * math.sin(heading) * dt,
        heading=heading, speed=speed, steering=steering,
    )


def physical_accel(state: AgentState, accel_scaled: float) -> float:
    a_min, a_max = state.accel_limits
    return accel_scaled * a_max if accel_scaled >= 0 else accel_scaled * abs(a_min)


def min_separation(a: AgentState, b: AgentState) -> float:
    """Centre distance minus both circumradii; negative means overlap."""
    return math.hypot(a.x - b.x, a.y - b.y) - a.body.circumradius - b.body.circumradius


def sense(observer: AgentState, others, tracks: dict, t: float, config: SimConfig,
          noise=None) -> tuple[IspField, dict]:
    """Build the observer's composed field; returns it with the updated tracks.

    Tracks of agents that are not visible this step are dropped.
    """
    intr = config.intrinsics
    pose = observer.pose
    new_tracks = {}
    fields = []
    for other in others:
        det = project_billboard(intr, pose, other.billboard(), noise)
        if det is None:
            continue
        track = tracks.get(other.id) or ScaleTrack(object_id=other.id)
        track = update_track(track, t, det.scale, det.roi, config.estimator)
        new_tracks[other.id] = track
        if track.count >= config.estimator.min_samples and track.tau is not None:
            fields.append(object_field(track, intr.width, intr.height))
    return compose_many(fields, intr.width, intr.height), new_tracks


def goal_pixel(state: AgentState, intrinsics: CameraIntrinsics):
    """Pixel of the agent's goal, clamped into the image; ``None`` when behind."""
    row = min(max(math.floor(intrinsics.cy), 0), intrinsics.height - 1)
    if state.goal is None:
        col = math.floor(intrinsics.cx)
    else:
        lateral, depth = to_camera_frame(state.pose, state.goal)
        if depth <= NEAR_PLANE:
            return None
        col = math.floor(lateral_to_column(intrinsics, lateral, depth))
    return min(max(col, 0), intrinsics.width - 1), row


class Simulation:
    """Stepwise runner; exposes the last sensed fields and tracks for inspection."""

    def __init__(self, scenario: Scenario, seed: int | None = None):
        self.scenario = scenario
        self.config = scenario.config
        self.specs = {a.state.id: a for a in scenario.agents}
        self.states = {a.state.id: a.state for a in scenario.agents}
        self.tracks = {i: {} for i in self.states}
        self.fields: dict[str, IspField] = {}
        self.controls: dict[str, ControlSet] = {}
        self.step_index = 0
        self.collided = False
        self._rng = np.random.default_rng(seed)

    @property
    def time(self) -> float:
        return self.step_index * self.config.dt

    def _noise(self):
        sigma = self.config.pixel_noise
        if sigma <= 0:
            return None
        return lambda: float(self._rng.normal(0.0, sigma))

    def sense_all(self):
        noise = self._noise()
        snapshot = list(self.states.values())
        for ident, state in self.states.items():
            others = [s for s in snapshot if s.id != ident]
            fld, self.tracks[ident] = sense(state, others, self.tracks[ident], self.time,
                                            self.config, noise)
            self.fields[ident] = fld
            self.controls[ident] = safe_controls(fld, self.config.intrinsics,
                                                 self.config.controller)

    def _command(self, ident):
        spec = self.specs[ident]
        state = self.states[ident]
        if spec.mode == "scripted":
            steer, accel = spec.scripted_command(self.step_index)
            return (state.steering if steer is None else steer), accel
        cfg = self.config
        controls = self.controls[ident]
        pixel = goal_pixel(state, cfg.intrinsics)
        if pixel is None:
            return 0.0, FULL_BRAKE.lo
        steer_img, accel = guided_control(
            pixel, self.fields[ident], cfg.intrinsics, cfg.controller,
            -state.steering, state.speed, state.setpoint_speed, controls=controls)
        return -steer_img, accel

    def step(self) -> list[TraceRecord]:
        if self.collided:
            raise RuntimeError("simulation already terminated by a collision")
        self.sense_all()
        commands = {i: self._command(i) for i in self.states}
        dt = self.config.dt
        self.states = {
            i: step_agent(s, commands[i][0], commands[i][1], dt, self.config)
            for i, s in self.states.items()
        }
        self.step_index += 1
        records = []
        for ident, state in self.states.items():
            seps = [min_separation(state, o) for j, o in self.states.items() if j != ident]
            sep = min(seps) if seps else math.inf
            hit = sep <= 0
            steer, accel = commands[ident]
            accel = min(max(accel, -1.0), 1.0)
            ctl = self.controls[ident]
            records.append(TraceRecord(
                step=self.step_index - 1, time=self.time, agent=ident,
                x=state.x, y=state.y, heading=state.heading, speed=state.speed,
                steer_cmd=steer, accel_scaled=accel,
                accel_ms2=physical_accel(state, accel),
                min_tau=field_min(self.fields[ident]).tau,
                safe_cols=len(ctl.safe_columns),
                accel_lo=ctl.accel.lo, accel_hi=ctl.accel.hi,
                min_sep=sep, collided=hit,
            ))
            self.collided |= hit
        return records


def run(scenario: Scenario, seed: int | None = None, on_step=None) -> list[TraceRecord]:
    """Run to completion or first collision.  ``on_step(sim, records)`` is
    called after every step."""
    sim = Simulation(scenario, seed)
    trace = []
    for _ in range(scenario.config.steps):
        records = sim.step()
        trace.extend(records)
        if on_step is not None:
            on_step(sim, records)
        if sim.collided:
            break
    return trace
