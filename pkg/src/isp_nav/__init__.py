"""Image-space potential fields for monocular, constant-space navigation."""
from .camera import (BodyBillboard, CameraIntrinsics, CameraPose, angle_to_column,
                     column_to_angle, project_billboard, project_scale, to_camera_frame)
from .control import (AccelInterval, ControllerParams, ControlSet, column_min_map,
                      guided_control, safe_controls)
from .field import (BACKGROUND, IspField, PotentialTuple, RegionOfInterest, compose,
                    compose_many, make_field, min_over_window, write_roi)
from .sim import AgentSpec, AgentState, Scenario, SimConfig, Simulation, run, step_agent
from .tau import (EstimatorParams, ScaleTrack, braking_decision, object_field,
                  tau_from_scale, update_track)

__version__ = "0.1.0"
