"""Antipodal grasp candidates for a parallel-jaw gripper and hand-pose snapping."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import rotation as rot
from .mesh_geometry import (ContactPoint, TriMesh, cluster_facets, gripper_collision_mask,
                            ray_opposite_contact, sample_contact_points, tangent_basis)


@dataclass(frozen=True)
class GripperSpec:
    max_opening: float = 0.15
    finger_length: float = 0.0437
    finger_box: tuple = (0.012, 0.055, 0.022)
    palm_box: tuple = (0.19, 0.06, 0.07)
    grip_force_limit: float = 185.0

    def __post_init__(self):
        if self.max_opening <= 0 or self.finger_length <= 0:
            raise ValueError("gripper max_opening and finger_length must be positive")
        if min(self.finger_box) <= 0 or min(self.palm_box) <= 0 or len(self.finger_box) != 3 or len(self.palm_box) != 3:
            raise ValueError("gripper box extents must be three positive numbers")
        if self.grip_force_limit <= 0:
            raise ValueError("grip_force_limit must be positive")


@dataclass(frozen=True)
class SamplingParams:
    angle_tol: float = 0.05
    spacing: float = 0.01
    min_boundary_dist: float = 0.005
    approach_steps: int = 8
    antipodal_tol: float = float(np.radians(10.0))


@dataclass(frozen=True)
class SimilarityThresholds:
    max_pos_diff: float = 0.05
    max_ori_diff: float = 0.25

    def __post_init__(self):
        if self.max_pos_diff <= 0 or self.max_ori_diff <= 0:
            raise ValueError("similarity thresholds must be positive")


@dataclass(frozen=True)
class GraspCandidate:
    center: np.ndarray
    orientation: np.ndarray
    jaw_width: float
    contact_a: ContactPoint
    contact_b: ContactPoint
    rotation_index: int = 0

    @property
    def matrix(self) -> np.ndarray:
        return rot.to_matrix(self.orientation)

    @property
    def closing_axis(self) -> np.ndarray:
        return self.matrix[:, 0]

    @property
    def approach_axis(self) -> np.ndarray:
        return self.matrix[:, 1]

    def to_dict(self) -> dict:
        return {
            "center": [float(x) for x in self.center],
            "orientation": [float(x) for x in self.orientation],
            "jaw_width": float(self.jaw_width),
            "contact_a": {"position": [float(x) for x in self.contact_a.position], "face_id": self.contact_a.face_id},
            "contact_b": {"position": [float(x) for x in self.contact_b.position], "face_id": self.contact_b.face_id},
            "rotation_index": self.rotation_index,
        }


def grasp_frame(closing_axis, step: int, steps: int) -> np.ndarray:
    """Gripper rotation with the given closing axis and the ``step``-th approach direction.

    Approach directions are spread evenly about the closing axis, starting from
    the deterministic tangent of :func:`tangent_basis`.
    """
    c = np.asarray(closing_axis, dtype=float)
    c = c / np.linalg.norm(c)
    u, v = tangent_basis(c)
    phi = 2.0 * np.pi * step / steps
    a = np.cos(phi) * u + np.sin(phi) * v
    return np.column_stack([c, a, rot.cross(c, a)])


def candidate_from_pair(a: ContactPoint, b: ContactPoint, step: int, steps: int) -> GraspCandidate:
    pa = np.asarray(a.position, dtype=float)
    pb = np.asarray(b.position, dtype=float)
    width = float(np.linalg.norm(pb - pa))
    frame = grasp_frame((pb - pa) / width, step, steps)
    return GraspCandidate(0.5 * (pa + pb), rot.from_matrix(frame), width, a, b, step)


def antipodal_pairs(target: TriMesh, gripper: GripperSpec, params: SamplingParams) -> List[Tuple[ContactPoint, ContactPoint]]:
    """Sampled contacts paired with their opposite contact, ordered by face id."""
    contacts = []
    for cluster in cluster_facets(target, params.angle_tol):
        contacts.extend(sample_contact_points(target, cluster, params.spacing, params.min_boundary_dist))
    contacts.sort(key=lambda c: c.face_id)
    pairs = []
    for c in contacts:
        other = ray_opposite_contact(target, c, params.antipodal_tol, params.angle_tol)
        if other is None:
            continue
        if np.linalg.norm(other.position - c.position) <= gripper.max_opening:
            pairs.append((c, other))
    return pairs


def generate_grasp_candidates(target: TriMesh, gripper: GripperSpec,
                              params: SamplingParams = SamplingParams()) -> List[GraspCandidate]:
    cands = [candidate_from_pair(a, b, k, params.approach_steps)
             for a, b in antipodal_pairs(target, gripper, params) for k in range(params.approach_steps)]
    hit = gripper_collision_mask([target], cands, gripper)
    return [c for c, h in zip(cands, hit) if not h]


def filter_colliding_candidates(candidates: Sequence[GraspCandidate], obstacles: Sequence[TriMesh],
                                gripper: GripperSpec) -> List[GraspCandidate]:
    candidates = list(candidates)
    hit = gripper_collision_mask(obstacles, candidates, gripper)
    return [c for c, h in zip(candidates, hit) if not h]


def grasp_similarity(candidate: GraspCandidate, hand) -> Tuple[float, float]:
    """Position distance and orientation difference mapped linearly onto [0, 1]."""
    qc = rot.check_unit(candidate.orientation)
    qh = rot.check_unit(hand.orientation)
    pos_diff = float(np.linalg.norm(np.asarray(candidate.center) - np.asarray(hand.position)))
    return pos_diff, rot.angle_between(qc, qh) / np.pi


def snap_to_grasp(candidates: Sequence[GraspCandidate], hand,
                  th: SimilarityThresholds = SimilarityThresholds()) -> Optional[GraspCandidate]:
    best, best_score = None, np.inf
    for c in candidates:
        pd, od = grasp_similarity(c, hand)
        if pd > th.max_pos_diff or od > th.max_ori_diff:
            continue
        score = pd + od * th.max_pos_diff
        if score < best_score:
            best, best_score = c, score
    return best


def write_candidates(candidates: Sequence[GraspCandidate], path) -> None:
    Path(path).write_text(json.dumps({"candidates": [c.to_dict() for c in candidates]}, indent=1) + "\n")
