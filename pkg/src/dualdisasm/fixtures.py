"""Reference fixture: a chassis with a snap-fit cover and a scripted demonstration corpus.

The chassis is a box standing in front of the robot with a small mounting fin
on top for the fixation gripper. The cover is a T-profile: a plate clipped to
the chassis front by three hooks, and a rib the disassembly gripper pinches.
Hooks release when the cover is pulled toward the robot (-x).

Demonstrations are written in camera coordinates through the inverse of the
stored calibration, so replaying them exercises the whole hand-to-robot chain.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Callable, List

import numpy as np

from . import rotation as rot
from .hand_pose import Calibration, HandKeypoints, build_hand_frame, write_trajectory
from .mesh_geometry import box_mesh, extrude_polygon, merge_meshes, save_obj
from .pose import RigidPose

FRAME_RATE = 20.0
DURATION = 10.0
GRASP_POINT = np.array([0.54, 0.0, 0.20])
GRASP_CLOSE_T = 1.0
PULL_START = 1.3

# camera x -> robot -y, camera y -> robot -z, camera depth -> robot +x
CAMERA_ROTATION = np.array([[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]])
CAMERA_POSITION = np.array([-0.4, 0.0, 0.5])

HOOK_TEMPLATE = {"theta": 0.35, "extraction_axis": [-1.0, 0.0, 0.0], "k_in": 40000.0, "k_out": 750.0,
                 "k_rot": 300.0, "release_deflection": 0.016, "break_force": 150.0}
HOOK_ANCHORS = [[0.60, 0.15, 0.30], [0.60, -0.15, 0.30], [0.60, 0.15, 0.10], [0.60, -0.15, 0.10]]


def chassis_mesh():
    body = box_mesh((0.30, 0.50, 0.40), (0.75, 0.0, 0.20))
    fin = box_mesh((0.02, 0.10, 0.06), (0.85, 0.0, 0.43))
    return merge_meshes([body, fin])


def cover_mesh():
    profile = [(0.60, -0.20), (0.60, 0.20), (0.56, 0.20), (0.56, 0.015), (0.52, 0.015),
               (0.52, -0.015), (0.56, -0.015), (0.56, -0.20)]
    return extrude_polygon(profile, 0.05, 0.35)


def calibration() -> Calibration:
    return Calibration(RigidPose(CAMERA_POSITION, rot.from_matrix(CAMERA_ROTATION)))


def grasp_orientation() -> np.ndarray:
    """Rib grasp: jaws close along +y, the gripper approaches along +x."""
    return rot.from_matrix(np.column_stack([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]]))


def hand_keypoints(t: float, pose: RigidPose, cal: Calibration, grip: str) -> HandKeypoints:
    """Keypoints whose hand frame, mapped through ``cal``, reproduces ``pose``."""
    cam = cal.inverse().transform.compose(pose)
    R = cam.matrix
    x, y = R[:, 0], R[:, 1]
    v = rot.cross(y, x)
    a = np.radians(20.0)
    w = cam.position
    for sign in (1.0, -1.0):
        kp = HandKeypoints(t, w, w + 0.09 * (np.cos(a) * x + sign * np.sin(a) * v),
                           w + 0.06 * (np.cos(a) * x - sign * np.sin(a) * v), grip=grip)
        if np.dot(build_hand_frame(kp).matrix[:, 0], x) > 0:
            return kp
    raise AssertionError("could not realise hand frame")


def _smooth(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def _direction(off_axis_deg: float, toward) -> np.ndarray:
    """Pull direction tilted from -x by ``off_axis_deg`` toward ``toward``."""
    a = np.radians(off_axis_deg)
    t = np.asarray(toward, dtype=float)
    return np.cos(a) * np.array([-1.0, 0.0, 0.0]) + np.sin(a) * t / np.linalg.norm(t)


def _path_straight(direction, length=0.35, pull_time=5.0):
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)

    def f(t):
        return length * _smooth((t - PULL_START) / pull_time) * d, np.zeros(3)
    return f


def _path_curved(length=0.35, pull_time=5.0, bow=0.045):
    def f(t):
        u = _smooth((t - PULL_START) / pull_time)
        return np.array([-length * u, 0.0, bow * np.sin(np.pi * u)]), np.zeros(3)
    return f


def _path_jump(direction, jump=(0.0, 0.0, 0.2), at=1.15, length=0.35, pull_time=5.0):
    base = _path_straight(direction, length, pull_time)

    def f(t):
        p, r = base(t)
        return p + (np.asarray(jump) if t >= at else 0.0), r
    return f


def _path_twist(direction, length=0.35, pull_time=6.0, twist=np.radians(5.0)):
    base = _path_straight(direction, length, pull_time)

    def f(t):
        p, _ = base(t)
        u = _smooth((t - PULL_START) / pull_time)
        return p, np.array([twist * np.sin(2 * np.pi * u), 0.0, 0.0])
    return f


# Human pulls rarely line up with the release direction; the corpus pulls
# 20-25 degrees off it. One demonstration carries a 0.2 m tracking jump.
TRAJECTORIES = {
    "slant_down_pull": _path_straight(_direction(25.0, (0.0, 0.0, -1.0))),
    "curved_pull": _path_curved(),
    "jump_pull": _path_jump(_direction(10.0, (0.0, 0.0, -1.0))),
    "slant_side_pull": _path_straight(_direction(25.0, (0.0, 1.0, 0.0))),
    "twisting_pull": _path_twist(_direction(25.0, (0.0, -1.0, 1.0))),
}
EXTRA_TRAJECTORIES = {
    "aligned_pull": _path_straight((-1.0, 0.0, 0.0)),
    "aligned_jump_pull": _path_jump((-1.0, 0.0, 0.0)),
}


def demonstration(path: Callable, cal: Calibration, offset=(0.004, -0.003, 0.005)) -> List[HandKeypoints]:
    """Approach the rib, close the hand, then follow ``path`` (offsets from the grasp point)."""
    q0 = grasp_orientation()
    start = GRASP_POINT + np.asarray(offset) + np.array([-0.12, 0.0, 0.03])
    frames = []
    for k in range(int(round(DURATION * FRAME_RATE)) + 1):
        t = k / FRAME_RATE
        if t < GRASP_CLOSE_T:
            u = _smooth(t / (0.8 * GRASP_CLOSE_T))
            p, q = (1 - u) * start + u * (GRASP_POINT + offset), q0
        else:
            dp, rv = path(t)
            p = GRASP_POINT + np.asarray(offset) + dp
            q = rot.normalize(rot.multiply(rot.from_rotvec(rv), q0))
        grip = "close" if t >= GRASP_CLOSE_T else "open"
        frames.append(hand_keypoints(t, RigidPose(p, q), cal, grip))
    return frames


def scene_dict() -> dict:
    return {
        "base_mesh": "chassis.obj",
        "part_mesh": "cover.obj",
        "hooks": [dict(HOOK_TEMPLATE, anchor=a) for a in HOOK_ANCHORS],
        "gripper": {},
        "limits": {"slip_force": 150.0, "mount_break_force": 250.0, "workspace_radius": 1.2},
        "plant": {"max_ee_speed": 0.1, "support_k_trans": 50000.0, "support_k_rot": 5000.0},
        "controller": {"M": [0.5, 0.5, 0.5, 0.05, 0.05, 0.05], "D": [60.0, 60.0, 60.0, 3.0, 3.0, 3.0],
                       "K": [250.0, 250.0, 250.0, 20.0, 20.0, 20.0], "dt_max": 0.01},
        "fixation_grasp": {"center": [0.85, 0.0, 0.44],
                           "orientation": rot.from_matrix(np.column_stack([[1.0, 0, 0], [0, 0, -1.0],
                                                                           [0, 1.0, 0]])).tolist(),
                           "jaw_width": 0.02},
        "pipeline": {"depth_axis": [0.0, 0.0, 1.0], "ema_alpha": 0.5},
    }


def write_reference_fixture(out_dir) -> dict:
    """Write meshes, scene, calibration, demonstrations and an experiment config into ``out_dir``."""
    out = Path(out_dir)
    (out / "trajectories").mkdir(parents=True, exist_ok=True)
    chassis, cover = chassis_mesh(), cover_mesh()
    save_obj(chassis, out / "chassis.obj")
    save_obj(cover, out / "cover.obj")
    (out / "scene.json").write_text(json.dumps(scene_dict(), indent=2) + "\n")
    cal = calibration()
    (out / "calibration.json").write_text(json.dumps(cal.to_dict(), indent=2) + "\n")
    names = []
    for name, path in {**TRAJECTORIES, **EXTRA_TRAJECTORIES}.items():
        write_trajectory(demonstration(path, cal), out / "trajectories" / f"{name}.jsonl")
        if name in TRAJECTORIES:
            names.append(f"trajectories/{name}.jsonl")
    experiment = {
        "scene_path": "scene.json",
        "trajectory_paths": names,
        "calibration_path": "calibration.json",
        "methods": [{"name": "baseline", "dual_arm": False, "hybrid": False},
                    {"name": "comparison", "dual_arm": False, "hybrid": True},
                    {"name": "proposed", "dual_arm": True, "hybrid": True}],
        "trials_per_method": 10,
        "noise_sigma": 0.002,
        "base_seed": 0,
        "output_dir": "results",
    }
    (out / "experiment.json").write_text(json.dumps(experiment, indent=2) + "\n")
    manifest = {"meshes": {"chassis.obj": len(chassis), "cover.obj": len(cover)},
                "trajectories": {f"trajectories/{n}.jsonl": int(round(DURATION * FRAME_RATE)) + 1
                                 for n in {**TRAJECTORIES, **EXTRA_TRAJECTORIES}}}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest
