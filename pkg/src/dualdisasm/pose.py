"""Rigid poses shared across the pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rotation as rot


@dataclass(frozen=True)
class RigidPose:
    position: np.ndarray
    orientation: np.ndarray = field(default_factory=lambda: rot.IDENTITY.copy())

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "orientation", rot.check_unit(self.orientation, tol=1e-9))

    @property
    def matrix(self) -> np.ndarray:
        return rot.to_matrix(self.orientation)

    def homogeneous(self) -> np.ndarray:
        h = np.eye(4)
        h[:3, :3] = self.matrix
        h[:3, 3] = self.position
        return h

    def compose(self, other: "RigidPose") -> "RigidPose":
        """``self * other``: express ``other`` (given in this frame) in the parent frame."""
        return RigidPose(self.position + rot.rotate(self.orientation, other.position),
                         rot.normalize(rot.multiply(self.orientation, other.orientation)))

    def inverse(self) -> "RigidPose":
        qi = rot.conjugate(self.orientation)
        return RigidPose(-rot.rotate(qi, self.position), qi)

    def transform_point(self, p) -> np.ndarray:
        return self.position + rot.rotate(self.orientation, p)

    def to_list(self) -> list:
        return [*map(float, self.position), *map(float, self.orientation)]


@dataclass(frozen=True)
class EndEffectorPose(RigidPose):
    """Gripper pose; ``frame_id`` is ``"camera"`` or ``"robot"``."""

    frame_id: str = "robot"

    def __post_init__(self):
        super().__post_init__()
        if self.frame_id not in ("camera", "robot"):
            raise ValueError(f"unknown frame_id {self.frame_id!r}")
