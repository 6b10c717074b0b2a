"""Scenario builders shared by the simulator and acceptance tests."""
import math

from isp_nav.camera import BodyBillboard, CameraIntrinsics
from isp_nav.control import ControllerParams
from isp_nav.sim import AgentSpec, AgentState, Scenario, SimConfig

SMALL_CAMERA = CameraIntrinsics.centered(160, 120, 80.0)

# Head-on family: headway chosen above the discrete stopping headway
# (see test_acceptance.discrete_stop).
HEAD_ON_CONTROLLER = ControllerParams(T_s=2.5, w_theta=61, w_a=64, epsilon=0.1, k_p=0.5)


def head_on(distance, steps=900, controller=HEAD_ON_CONTROLLER, speed=15.0, a_min=-5.0):
    cfg = SimConfig(dt=0.01, steps=steps, intrinsics=SMALL_CAMERA, controller=controller,
                    steering_limit=0.5, steering_rate_limit=0.05)
    ego = AgentState("ego", 0.0, 0.0, speed=speed, accel_limits=(a_min, 3.0),
                     goal=(300.0, 0.0), setpoint_speed=speed)
    obstacle = AgentState("obstacle", float(distance), 0.0)
    return Scenario(f"head_on_{distance}", cfg,
                    (AgentSpec(ego), AgentSpec(obstacle, "scripted")))


def exact_stop_decel(v0, gap, dt):
    """Constant deceleration that brings the simulator's semi-implicit Euler
    integrator to zero speed exactly ``gap`` metres ahead.

    Under that integrator the position after k steps is the continuous
    constant-deceleration curve with initial speed ``v0 - a dt / 2``, so the
    condition is ``(v0 - a dt / 2)**2 == 2 a gap``.
    """
    qa, qb, qc = dt * dt / 4.0, -(v0 * dt + 2.0 * gap), v0 * v0
    return (-qb - math.sqrt(qb * qb - 4 * qa * qc)) / (2 * qa)


def scripted_braking(decel, v0=15.0, gap=40.0, dt=0.01, steps=1500, a_min=-10.0):
    cfg = SimConfig(dt=dt, steps=steps, intrinsics=SMALL_CAMERA)
    ego = AgentState("ego", 0.0, 0.0, speed=v0, accel_limits=(a_min, 3.0))
    cmd = -decel / abs(a_min)
    script = ((0.0, cmd),) * steps
    return Scenario("scripted_braking", cfg,
                    (AgentSpec(ego, "scripted", script),
                     AgentSpec(AgentState("obstacle", gap, 0.0), "scripted")))


def convoy(steps=150):
    """Ego, a near car pulling slowly closer, and a farther van closing fast.

    The van's ROI lies inside the car's: the car is spatially nearer but the
    van is temporally nearer.
    """
    cfg = SimConfig(dt=0.01, steps=steps, intrinsics=CameraIntrinsics.centered(320, 240, 160.0))
    ego = AgentState("pickup", 0.0, 0.0, speed=10.0)
    car = AgentState("car", 15.0, 0.0, speed=9.0, body=BodyBillboard(2.0, 1.5))
    van = AgentState("van", 45.0, 0.0, heading=math.pi, speed=8.0,
                     body=BodyBillboard(2.2, 2.5))
    return Scenario("convoy", cfg, tuple(AgentSpec(a, "scripted") for a in (ego, car, van)))


def scripted_crash(steps=400):
    cfg = SimConfig(dt=0.01, steps=steps, intrinsics=SMALL_CAMERA)
    a = AgentState("a", 0.0, 0.0, speed=10.0)
    b = AgentState("b", 40.0, 0.0, heading=math.pi, speed=10.0)
    return Scenario("crash", cfg, (AgentSpec(a, "scripted"), AgentSpec(b, "scripted")))


def cruise(goal=(500.0, 50.0), steps=1500):
    cfg = SimConfig(dt=0.01, steps=steps)
    ego = AgentState("ego", 0.0, 0.0, speed=5.0, goal=goal, setpoint_speed=12.0)
    return Scenario("cruise", cfg, (AgentSpec(ego),))
