"""Scenario files (JSON) and trace CSV output.

Scenario schema, every key required unless marked optional::

    {
      "name": str,
      "sim": {"dt", "steps", "steering_limit", "steering_rate_limit",
              "pixel_noise" (optional, default 0)},
      "camera": {"focal_length", "cx", "cy", "width", "height"},
      "controller": {"T_s", "w_theta", "w_a", "epsilon", "tau_dot_E", "k_p",
                     "literal_init" (optional, default false)},
      "estimator": {"smoothing_alpha", "min_samples"},
      "agents": [{"id", "mode", "position": [x, y], "heading", "speed",
                  "steering", "body": {"width", "height"},
                  "accel_limits": [a_min, a_max], "goal": [x, y] | null,
                  "setpoint_speed", "script": [[steer, accel], ...] | null}]
    }

Unknown keys are rejected.
"""
from __future__ import annotations

import json
import math
import re

from .camera import BodyBillboard, CameraIntrinsics
from .control import ControllerParams
from .sim import AgentSpec, AgentState, Scenario, SimConfig, TraceRecord
from .tau import EstimatorParams

TRACE_HEADER = ("step,time,agent,x,y,heading,speed,steer_cmd,accel_scaled,accel_ms2,"
                "min_tau,safe_cols,accel_lo,accel_hi,min_sep,collided")


class ScenarioError(ValueError):
    pass


_SECTIONS = {
    "sim": ({"dt", "steps", "steering_limit", "steering_rate_limit"}, {"pixel_noise"}),
    "camera": ({"focal_length", "cx", "cy", "width", "height"}, set()),
    "controller": ({"T_s", "w_theta", "w_a", "epsilon", "tau_dot_E", "k_p"}, {"literal_init"}),
    "estimator": ({"smoothing_alpha", "min_samples"}, set()),
}
_TOP = {"name", "sim", "camera", "controller", "estimator", "agents"}
_AGENT = {"id", "mode", "position", "heading", "speed", "steering", "body",
          "accel_limits", "goal", "setpoint_speed", "script"}


class _Locator:
    """Best-effort line numbers for schema errors in an already-parsed document."""

    def __init__(self, text):
        self.lines = text.splitlines()

    def line_of(self, key):
        pat = re.compile(r'"%s"\s*:' % re.escape(key))
        for n, line in enumerate(self.lines, 1):
            if pat.search(line):
                return n
        return None

    def error(self, msg, key=None):
        n = self.line_of(key) if key is not None else None
        return ScenarioError(f"line {n}: {msg}" if n else msg)


def _check_keys(obj, required, optional, where, loc):
    if not isinstance(obj, dict):
        raise loc.error(f"{where} must be an object", where)
    for key in obj:
        if key not in required and key not in optional:
            raise loc.error(f"unknown key {key!r} in {where}", key)
    for key in sorted(required - obj.keys()):
        raise loc.error(f"missing key {key!r} in {where}", where)


def _num(obj, key, loc, kind=float):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise loc.error(f"{key!r} must be a number", key)
    if kind is int:
        if int(v) != v:
            raise loc.error(f"{key!r} must be an integer", key)
        return int(v)
    v = float(v)
    if math.isnan(v):
        raise loc.error(f"{key!r} must not be NaN", key)
    return v


def _pair(v, key, loc):
    if (not isinstance(v, list) or len(v) != 2
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)):
        raise loc.error(f"{key!r} must be a pair of numbers", key)
    return float(v[0]), float(v[1])


def _agent(obj, idx, loc):
    where = f"agents[{idx}]"
    _check_keys(obj, _AGENT, set(), where, loc)
    body = obj["body"]
    _check_keys(body, {"width", "height"}, set(), f"{where}.body", loc)
    if not isinstance(obj["id"], str):
        raise loc.error(f"{where}.id must be a string", "id")
    script = obj["script"]
    if script is not None:
        if not isinstance(script, list):
            raise loc.error(f"{where}.script must be a list", "script")
        script = tuple(_pair(c, "script", loc) for c in script)
    goal = None if obj["goal"] is None else _pair(obj["goal"], "goal", loc)
    x, y = _pair(obj["position"], "position", loc)
    state = AgentState(
        id=obj["id"], x=x, y=y,
        heading=_num(obj, "heading", loc), speed=_num(obj, "speed", loc),
        steering=_num(obj, "steering", loc),
        body=BodyBillboard(_num(body, "width", loc), _num(body, "height", loc)),
        accel_limits=_pair(obj["accel_limits"], "accel_limits", loc),
        goal=goal, setpoint_speed=_num(obj, "setpoint_speed", loc),
    )
    return AgentSpec(state, obj["mode"], script)


def loads(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno}: {exc.msg}") from None
    loc = _Locator(text)
    _check_keys(doc, _TOP, set(), "scenario", loc)
    for name, (req, opt) in _SECTIONS.items():
        _check_keys(doc[name], req, opt, name, loc)
    if not isinstance(doc["name"], str):
        raise loc.error("name must be a string", "name")
    if not isinstance(doc["agents"], list):
        raise loc.error("agents must be a list", "agents")
    s, c, k, e = doc["sim"], doc["camera"], doc["controller"], doc["estimator"]
    try:
        config = SimConfig(
            dt=_num(s, "dt", loc), steps=_num(s, "steps", loc, int),
            intrinsics=CameraIntrinsics(
                _num(c, "focal_length", loc), _num(c, "cx", loc), _num(c, "cy", loc),
                _num(c, "width", loc, int), _num(c, "height", loc, int)),
            controller=ControllerParams(
                T_s=_num(k, "T_s", loc), w_theta=_num(k, "w_theta", loc, int),
                w_a=_num(k, "w_a", loc, int), epsilon=_num(k, "epsilon", loc),
                tau_dot_E=_num(k, "tau_dot_E", loc), k_p=_num(k, "k_p", loc),
                literal_init=bool(k.get("literal_init", False))),
            estimator=EstimatorParams(_num(e, "smoothing_alpha", loc),
                                      _num(e, "min_samples", loc, int)),
            steering_limit=_num(s, "steering_limit", loc),
            steering_rate_limit=_num(s, "steering_rate_limit", loc),
            pixel_noise=float(s.get("pixel_noise", 0.0)),
        )
        agents = tuple(_agent(a, i, loc) for i, a in enumerate(doc["agents"]))
        return Scenario(doc["name"], config, agents)
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None


def to_dict(scenario: Scenario) -> dict:
    cfg = scenario.config
    intr, ctl, est = cfg.intrinsics, cfg.controller, cfg.estimator
    return {
        "name": scenario.name,
        "sim": {"dt": cfg.dt, "steps": cfg.steps, "steering_limit": cfg.steering_limit,
                "steering_rate_limit": cfg.steering_rate_limit,
                "pixel_noise": cfg.pixel_noise},
        "camera": {"focal_length": intr.focal_length, "cx": intr.cx, "cy": intr.cy,
                   "width": intr.width, "height": intr.height},
        "controller": {"T_s": ctl.T_s, "w_theta": ctl.w_theta, "w_a": ctl.w_a,
                       "epsilon": ctl.epsilon, "tau_dot_E": ctl.tau_dot_E, "k_p": ctl.k_p,
                       "literal_init": ctl.literal_init},
        "estimator": {"smoothing_alpha": est.smoothing_alpha, "min_samples": est.min_samples},
        "agents": [
            {
                "id": a.state.id, "mode": a.mode,
                "position": [a.state.x, a.state.y], "heading": a.state.heading,
                "speed": a.state.speed, "steering": a.state.steering,
                "body": {"width": a.state.body.world_width, "height": a.state.body.world_height},
                "accel_limits": list(a.state.accel_limits),
                "goal": None if a.state.goal is None else list(a.state.goal),
                "setpoint_speed": a.state.setpoint_speed,
                "script": None if a.script is None else [list(c) for c in a.script],
            }
            for a in scenario.agents
        ],
    }


def dumps(scenario: Scenario) -> str:
    return json.dumps(to_dict(scenario), indent=2) + "\n"


def load(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def save(scenario: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(scenario))


def _g9(v: float) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return f"{v:.9g}"


def trace_row(r: TraceRecord) -> str:
    return ",".join([
        str(r.step), _g9(r.time), r.agent, _g9(r.x), _g9(r.y), _g9(r.heading),
        _g9(r.speed), _g9(r.steer_cmd), _g9(r.accel_scaled), _g9(r.accel_ms2),
        _g9(r.min_tau), str(r.safe_cols), _g9(r.accel_lo), _g9(r.accel_hi),
        _g9(r.min_sep), "1" if r.collided else "0",
    ])


def write_trace(records, fh) -> None:
    fh.write(TRACE_HEADER + "\n")
    for r in records:
        fh.write(trace_row(r) + "\n")
