"""Demonstrator hand keypoints to end-effector poses."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Sequence

import numpy as np

from . import rotation as rot
from .pose import EndEffectorPose, RigidPose

PARALLEL_LIMIT = 0.99


class HandFrameError(ValueError):
    """Keypoints do not define a usable hand frame."""


@dataclass(frozen=True)
class HandKeypoints:
    timestamp: float
    wrist: np.ndarray
    index_base: np.ndarray
    thumb_base: np.ndarray
    visibility: tuple = (True, True, True)
    grip: str = "open"

    @property
    def fully_visible(self) -> bool:
        return all(self.visibility)

    def to_record(self) -> dict:
        return {"t": self.timestamp, "wrist": [float(x) for x in self.wrist],
                "index_base": [float(x) for x in self.index_base],
                "thumb_base": [float(x) for x in self.thumb_base],
                "visible": [bool(v) for v in self.visibility], "grip": self.grip}

    @classmethod
    def from_record(cls, rec: dict) -> "HandKeypoints":
        return cls(float(rec["t"]), np.asarray(rec["wrist"], dtype=float),
                   np.asarray(rec["index_base"], dtype=float), np.asarray(rec["thumb_base"], dtype=float),
                   tuple(bool(v) for v in rec.get("visible", (True, True, True))), rec.get("grip", "open"))


@dataclass(frozen=True)
class Calibration:
    """Camera-to-robot rigid transform."""

    transform: RigidPose

    @classmethod
    def identity(cls) -> "Calibration":
        return cls(RigidPose(np.zeros(3)))

    @classmethod
    def load(cls, path) -> "Calibration":
        data = json.loads(Path(path).read_text())
        return cls(RigidPose(data["translation"], rot.normalize(data["rotation"])))

    def to_dict(self) -> dict:
        return {"rotation": [float(x) for x in self.transform.orientation],
                "translation": [float(x) for x in self.transform.position]}

    def inverse(self) -> "Calibration":
        return Calibration(self.transform.inverse())


def read_trajectory(path) -> List[HandKeypoints]:
    frames = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            frames.append(HandKeypoints.from_record(json.loads(line)))
    return frames


def write_trajectory(frames: Sequence[HandKeypoints], path) -> None:
    Path(path).write_text("".join(json.dumps(f.to_record()) + "\n" for f in frames))


def _unit(v):
    n = np.linalg.norm(v)
    if not np.isfinite(n) or n < 1e-12:
        raise HandFrameError("keypoint coincides with the wrist")
    return v / n


def build_hand_frame(kp: HandKeypoints, depth_axis=(0.0, 0.0, 1.0)) -> EndEffectorPose:
    """Wrist-origin hand frame in camera coordinates.

    x bisects the wrist-to-index and wrist-to-thumb directions, signed so the
    thumb-to-index sweep runs clockwise seen along the depth axis; y is the
    depth axis; z = x cross y. x is re-projected to be orthogonal to y.
    """
    if not kp.fully_visible:
        raise HandFrameError("required keypoints are not visible")
    wrist = np.asarray(kp.wrist, dtype=float)
    y = _unit(np.asarray(depth_axis, dtype=float))
    a = _unit(np.asarray(kp.index_base, dtype=float) - wrist)
    b = _unit(np.asarray(kp.thumb_base, dtype=float) - wrist)
    bis = a + b
    if np.linalg.norm(bis) < 1e-9 or np.linalg.norm(rot.cross(a, b)) < 1e-9:
        raise HandFrameError("index and thumb bases are collinear with the wrist")
    bis = bis / np.linalg.norm(bis)
    sweep = float(np.dot(rot.cross(b, a), y))
    if abs(sweep) < 1e-9:
        raise HandFrameError("finger plane contains the depth axis; direction is ambiguous")
    x_raw = bis if sweep < 0 else -bis
    if abs(np.dot(x_raw, y)) > PARALLEL_LIMIT:
        raise HandFrameError("hand x-axis is nearly parallel to the depth axis")
    x = x_raw - np.dot(x_raw, y) * y
    x /= np.linalg.norm(x)
    z = rot.cross(x, y)
    return EndEffectorPose(wrist, rot.from_matrix(np.column_stack([x, y, z])), frame_id="camera")


def camera_to_robot(pose: EndEffectorPose, cal: Calibration) -> EndEffectorPose:
    if pose.frame_id != "camera":
        raise ValueError(f"expected a camera-frame pose, got frame_id={pose.frame_id!r}")
    out = cal.transform.compose(pose)
    return EndEffectorPose(out.position, out.orientation, frame_id="robot")


def filter_stable_keypoints(stream: Sequence[HandKeypoints], alpha: float = 0.5) -> List[HandKeypoints]:
    """Drop frames with hidden keypoints, then exponentially smooth the rest."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    out = []
    prev = None
    for kp in stream:
        if not kp.fully_visible:
            continue
        cur = np.stack([kp.wrist, kp.index_base, kp.thumb_base]).astype(float)
        prev = cur if prev is None else alpha * cur + (1.0 - alpha) * prev
        out.append(replace(kp, wrist=prev[0], index_base=prev[1], thumb_base=prev[2]))
    return out
