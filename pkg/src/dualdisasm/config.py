"""Scene configuration files.

A scene file is JSON. Mesh paths are resolved relative to the file. Every
section is optional except the meshes and hooks; omitted values fall back to
the dataclass defaults and are written back out by :meth:`SceneBundle.to_dict`
so reports always carry the full parameter set.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import rotation as rot
from .disassembly_affordance import DisassemblyError, SnapFitHook
from .grasp_affordance import (GraspCandidate, GripperSpec, SamplingParams, SimilarityThresholds,
                               filter_colliding_candidates, generate_grasp_candidates)
from .impedance_control import ImpedanceParams
from .mesh_geometry import TriMesh, check_gripper_collision, load_mesh
from .sim_core import FailureLimits, PlantParams, Scene, TrialOptions

log = logging.getLogger(__name__)

HOOK_BOUNDS_TOL = 1e-6


class ConfigError(ValueError):
    """Configuration content is invalid (as opposed to unreadable)."""


def read_json(path) -> dict:
    """Parse a JSON file; syntax errors become :class:`ConfigError`, I/O errors propagate."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def _build(cls, data: Optional[dict], section: str):
    data = dict(data or {})
    known = {f.name for f in fields(cls)}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown keys in {section}: {sorted(extra)}")
    for k, v in data.items():
        if isinstance(v, list):
            data[k] = tuple(v)
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {section}: {exc}") from exc


def _plain(obj) -> dict:
    out = {}
    for f in fields(obj):
        v = getattr(obj, f.name)
        if isinstance(v, np.ndarray):
            v = v.tolist()
        elif isinstance(v, tuple):
            v = list(v)
        out[f.name] = v
    return out


def _pose_candidate(data: dict) -> GraspCandidate:
    try:
        center = np.asarray(data["center"], dtype=float).reshape(3)
        q = rot.check_unit(np.asarray(data["orientation"], dtype=float))
        width = float(data["jaw_width"])
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid fixation_grasp: {exc}") from exc
    return GraspCandidate(center, rot.normalize(q), width, None, None, 0)


@dataclass(frozen=True)
class SceneBundle:
    """A loaded scene together with the controller and pipeline settings stored beside it."""

    scene: Scene
    controller: ImpedanceParams
    options: TrialOptions
    sampling: SamplingParams
    source: dict

    def to_dict(self) -> dict:
        s = self.scene
        out = dict(self.source)
        out.update({
            "hooks": [h.to_dict() for h in s.hooks],
            "gripper": _plain(s.gripper),
            "limits": _plain(s.limits),
            "plant": _plain(s.plant),
            "controller": self.controller.to_dict(),
            "sampling": _plain(self.sampling),
            "similarity": _plain(self.options.similarity),
            "pipeline": {"depth_axis": list(self.options.depth_axis), "ema_alpha": self.options.ema_alpha},
            "face_counts": {"base": len(s.base), "part": len(s.part)},
            "candidate_count": len(s.candidates),
        })
        if s.fixation_grasp is not None:
            fg = s.fixation_grasp
            out["fixation_grasp"] = {"center": fg.center.tolist(), "orientation": fg.orientation.tolist(),
                                     "jaw_width": fg.jaw_width}
        return out


def disassembly_candidates(part: TriMesh, base: TriMesh, gripper: GripperSpec,
                           sampling: SamplingParams) -> List[GraspCandidate]:
    """Collision-free grasps on the part, also clear of the chassis."""
    cands = generate_grasp_candidates(part, gripper, sampling)
    return filter_colliding_candidates(cands, [base], gripper)


def scene_from_dict(data: dict, root=".", candidates: bool = True) -> SceneBundle:
    root = Path(root)
    for key in ("base_mesh", "part_mesh", "hooks"):
        if key not in data:
            raise ConfigError(f"scene is missing {key!r}")
    base = load_mesh(root / data["base_mesh"])
    part = load_mesh(root / data["part_mesh"])
    try:
        hooks = [SnapFitHook(**h) for h in data["hooks"]]
    except (TypeError, DisassemblyError) as exc:
        raise ConfigError(f"invalid hook: {exc}") from exc
    lo, hi = part.bounds()
    for i, h in enumerate(hooks):
        if np.any(h.anchor < lo - HOOK_BOUNDS_TOL) or np.any(h.anchor > hi + HOOK_BOUNDS_TOL):
            raise ConfigError(f"hook {i} anchor {h.anchor.tolist()} lies outside the part bounds")
    gripper = _build(GripperSpec, data.get("gripper"), "gripper")
    limits = _build(FailureLimits, data.get("limits"), "limits")
    plant = _build(PlantParams, data.get("plant"), "plant")
    sampling = _build(SamplingParams, data.get("sampling"), "sampling")
    similarity = _build(SimilarityThresholds, data.get("similarity"), "similarity")
    ctrl = data.get("controller") or {}
    try:
        controller = ImpedanceParams(**ctrl)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid controller: {exc}") from exc
    pipe = dict(data.get("pipeline") or {})
    options = TrialOptions(depth_axis=tuple(float(x) for x in pipe.get("depth_axis", (0.0, 0.0, 1.0))),
                           ema_alpha=float(pipe.get("ema_alpha", 0.5)), similarity=similarity)
    fixation = _pose_candidate(data["fixation_grasp"]) if data.get("fixation_grasp") else None
    if fixation is not None and check_gripper_collision([part], fixation, gripper):
        raise ConfigError("fixation grasp collides with the part")
    cands = tuple(disassembly_candidates(part, base, gripper, sampling)) if candidates else ()
    log.info("scene: %d base faces, %d part faces, %d hooks, %d grasp candidates",
             len(base), len(part), len(hooks), len(cands))
    scene = Scene(base=base, part=part, hooks=tuple(hooks), gripper=gripper, limits=limits, plant=plant,
                  fixation_grasp=fixation, candidates=cands)
    source = {"base_mesh": data["base_mesh"], "part_mesh": data["part_mesh"]}
    return SceneBundle(scene, controller, options, sampling, source)


def load_scene(path, candidates: bool = True) -> SceneBundle:
    path = Path(path)
    return scene_from_dict(read_json(path), path.parent, candidates)


def with_candidates(bundle: SceneBundle, cands) -> SceneBundle:
    return replace(bundle, scene=replace(bundle.scene, candidates=tuple(cands)))
