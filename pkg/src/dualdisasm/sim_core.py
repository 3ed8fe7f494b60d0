"""Quasi-static fix-and-disassemble simulation.

Two bodies are simulated without inertia: the chassis (``base``) and the
target part. The part hangs on the chassis through snap-fit hook springs and is
pulled by the disassembly gripper through a six-axis grasp spring. In
single-arm mode the chassis rests on a compliant support; in dual-arm mode the
fixation arm locks it in place. Every step solves the static balance of this
spring network, then updates hook engagement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import rotation as rot
from .disassembly_affordance import SnapFitHook
from .grasp_affordance import GraspCandidate, GripperSpec, SimilarityThresholds, snap_to_grasp
from .hand_pose import (Calibration, HandFrameError, HandKeypoints, build_hand_frame, camera_to_robot,
                        filter_stable_keypoints)
from .impedance_control import (HYBRID, POSITION_ONLY, ControlTarget, ImpedanceParams, ImpedanceState,
                                hybrid_target)
from .mesh_geometry import TriMesh
from .metrics import PoseSample, pose_deviation
from .pose import EndEffectorPose, RigidPose

FAILURES = ("slip", "mount_break", "workspace", "hook_broken", "no_grasp", "aborted")
RELEASE_RTOL = 1e-9


class ConvergenceError(RuntimeError):
    """The static balance did not converge within the iteration budget."""


@dataclass(frozen=True)
class FailureLimits:
    slip_force: float = 90.0
    mount_break_force: float = 250.0
    workspace_radius: float = 1.2

    def __post_init__(self):
        if min(self.slip_force, self.mount_break_force, self.workspace_radius) <= 0:
            raise ValueError("failure limits must be positive")


@dataclass(frozen=True)
class PlantParams:
    """Physical constants of the simulated plant that the controller does not see."""

    grasp_k_trans: float = 5000.0
    grasp_k_rot: float = 50.0
    support_k_trans: float = 20000.0
    support_k_rot: float = 800.0
    max_ee_speed: float = 0.5
    max_ee_angular_speed: float = 2.0
    solver_iterations: int = 50
    solver_relaxation: float = 1.0
    solver_tol: float = 1e-6

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class Scene:
    base: TriMesh
    part: TriMesh
    hooks: Tuple[SnapFitHook, ...]
    gripper: GripperSpec = field(default_factory=GripperSpec)
    limits: FailureLimits = field(default_factory=FailureLimits)
    plant: PlantParams = field(default_factory=PlantParams)
    part_pose: RigidPose = field(default_factory=lambda: RigidPose(np.zeros(3)))
    base_pose: RigidPose = field(default_factory=lambda: RigidPose(np.zeros(3)))
    fixation_grasp: Optional[GraspCandidate] = None
    disassembly_grasp: Optional[GraspCandidate] = None
    candidates: Tuple[GraspCandidate, ...] = ()
    part_center: Optional[np.ndarray] = None
    base_center: Optional[np.ndarray] = None
    ee_pose: Optional[RigidPose] = None
    grasp_offset: Optional[RigidPose] = None
    released: Tuple[bool, ...] = ()
    broken: Tuple[bool, ...] = ()
    peak_wrench: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "hooks", tuple(self.hooks))
        n = len(self.hooks)
        if not self.released:
            object.__setattr__(self, "released", (False,) * n)
        if not self.broken:
            object.__setattr__(self, "broken", (False,) * n)
        if self.part_center is None:
            object.__setattr__(self, "part_center", 0.5 * np.add(*self.part.bounds()))
        if self.base_center is None:
            object.__setattr__(self, "base_center", 0.5 * np.add(*self.base.bounds()))

    @property
    def anchored(self) -> bool:
        return self.fixation_grasp is not None

    @property
    def grasped(self) -> bool:
        return self.disassembly_grasp is not None and self.ee_pose is not None

    @property
    def engaged(self) -> List[int]:
        return [i for i in range(len(self.hooks)) if not (self.released[i] or self.broken[i])]

    def establish_grasp(self, grasp: GraspCandidate) -> "Scene":
        pose = RigidPose(grasp.center, grasp.orientation)
        return replace(self, disassembly_grasp=grasp, ee_pose=pose,
                       grasp_offset=self.part_pose.inverse().compose(pose))

    def release_grasp(self) -> "Scene":
        return replace(self, disassembly_grasp=None, ee_pose=None, grasp_offset=None)


# ---------------------------------------------------------------------------
# body kinematics: a pose maps rest coordinates p0 to R (p0 - c) + c + d
# ---------------------------------------------------------------------------

def _body_state(pose: RigidPose, center) -> Tuple[np.ndarray, np.ndarray]:
    R = pose.matrix
    return R @ center + pose.position - center, R


def _body_pose(d, R, center) -> RigidPose:
    return RigidPose(center + d - R @ center, rot.from_matrix(R))


def _hook_world_stiffness(hook: SnapFitHook, R_base) -> np.ndarray:
    e = hook.extraction_axis
    local = hook.k_in * np.eye(3) + (hook.extraction_stiffness - hook.k_in) * np.outer(e, e)
    return R_base @ local @ R_base.T


def _cross_rows(a, b) -> np.ndarray:
    return np.stack([a[:, 1] * b[:, 2] - a[:, 2] * b[:, 1], a[:, 2] * b[:, 0] - a[:, 0] * b[:, 2],
                     a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]], axis=1)


def _skews(v) -> np.ndarray:
    X = np.zeros((len(v), 3, 3))
    X[:, 0, 1], X[:, 0, 2], X[:, 1, 2] = -v[:, 2], v[:, 1], -v[:, 0]
    X[:, 1, 0], X[:, 2, 0], X[:, 2, 1] = v[:, 2], -v[:, 1], v[:, 0]
    return X


class _Network:
    """Residual and linearised stiffness of the spring network for fixed topology."""

    def __init__(self, scene: Scene, ee: Optional[RigidPose]):
        hooks = [scene.hooks[i] for i in scene.engaged]
        self.n = len(hooks)
        self.ee = ee
        self.grasp_offset = scene.grasp_offset if ee is not None else None
        self.cp = scene.part_center
        self.cb = scene.base_center
        self.free_base = not scene.anchored
        self.free_part = bool(hooks) or ee is not None
        self.pl = scene.plant
        if hooks:
            self.anchors = np.array([h.anchor for h in hooks])
            e = np.array([h.extraction_axis for h in hooks])
            k_in = np.array([h.k_in for h in hooks])
            k_e = np.array([h.extraction_stiffness for h in hooks])
            self.S_local = k_in[:, None, None] * np.eye(3) + (k_e - k_in)[:, None, None] * e[:, :, None] * e[:, None, :]
            self.k_rot = float(sum(h.k_rot for h in hooks))
        if ee is not None:
            self.g_arm = scene.grasp_offset.position - self.cp
            self.g_rot = scene.grasp_offset.matrix
            self.ee_p = ee.position
            self.ee_RT = ee.matrix.T

    def evaluate(self, dp, Rp, db, Rb):
        """Generalised forces on (part, base) and the 12x12 tangent stiffness."""
        pl = self.pl
        r = np.zeros(12)
        K = np.zeros((12, 12))
        part_c = self.cp + dp
        base_c = self.cb + db
        if self.n:
            rB = (self.anchors - self.cp) @ Rp.T
            rA = (self.anchors - self.cb) @ Rb.T
            S = np.einsum("ij,njk,lk->nil", Rb, self.S_local, Rb)
            f = -np.einsum("nij,nj->ni", S, rB + part_c - rA - base_c)
            ftot = f.sum(axis=0)
            r[0:3] += ftot
            r[3:6] += _cross_rows(rB, f).sum(axis=0)
            r[6:9] -= ftot
            r[9:12] -= _cross_rows(rA, f).sum(axis=0)
            phi = Rb @ rot.matrix_rotvec(Rb.T @ Rp)
            r[3:6] -= self.k_rot * phi
            r[9:12] += self.k_rot * phi
            XB, XA = _skews(rB), _skews(rA)
            SXB = S @ XB
            SXA = S @ XA
            Ssum = S.sum(axis=0)
            # blocks of J^T S J with J = [I, -X], X the skew matrix of the lever arm
            K[0:3, 0:3] += Ssum
            K[0:3, 3:6] -= SXB.sum(axis=0)
            K[3:6, 0:3] += (XB @ S).sum(axis=0)
            # geometric term: rotating a body swings the lever arm of a loaded spring
            FB = _skews(f)
            K[3:6, 3:6] -= (XB @ SXB + FB @ XB).sum(axis=0)
            K[6:9, 6:9] += Ssum
            K[6:9, 9:12] -= SXA.sum(axis=0)
            K[9:12, 6:9] += (XA @ S).sum(axis=0)
            K[9:12, 9:12] -= (XA @ SXA - FB @ XA).sum(axis=0)
            KAB = np.zeros((6, 6))
            KAB[0:3, 0:3] = Ssum
            KAB[0:3, 3:6] = -SXB.sum(axis=0)
            KAB[3:6, 0:3] = (XA @ S).sum(axis=0)
            KAB[3:6, 3:6] = -(XA @ SXB).sum(axis=0)
            K[6:12, 0:6] -= KAB
            K[0:6, 6:12] -= KAB.T
            kr = self.k_rot * np.eye(3)
            K[3:6, 3:6] += kr
            K[9:12, 9:12] += kr
            K[3:6, 9:12] -= kr
            K[9:12, 3:6] -= kr
        if self.ee is not None:
            rg = Rp @ self.g_arm
            f = -pl.grasp_k_trans * (part_c + rg - self.ee_p)
            e = rot.matrix_rotvec(Rp @ self.g_rot @ self.ee_RT)
            r[0:3] += f
            r[3:6] += rot.cross(rg, f) - pl.grasp_k_rot * e
            J = np.hstack([np.eye(3), -rot.skew(rg)])
            K[0:6, 0:6] += pl.grasp_k_trans * (J.T @ J)
            K[3:6, 3:6] += pl.grasp_k_rot * np.eye(3) - rot.skew(f) @ rot.skew(rg)
        if self.free_base:
            r[6:9] -= pl.support_k_trans * db
            r[9:12] -= pl.support_k_rot * rot.matrix_rotvec(Rb)
            K[6:9, 6:9] += pl.support_k_trans * np.eye(3)
            K[9:12, 9:12] += pl.support_k_rot * np.eye(3)
        return r, K

    def solve(self, dp, Rp, db, Rb):
        active = np.zeros(12, dtype=bool)
        active[0:6] = self.free_part
        active[6:12] = self.free_base
        if not active.any():
            return dp, Rp, db, Rb
        pl = self.pl
        for _ in range(pl.solver_iterations):
            r, K = self.evaluate(dp, Rp, db, Rb)
            ra = r[active]
            if np.linalg.norm(ra) < pl.solver_tol:
                return dp, Rp, db, Rb
            step = np.zeros(12)
            step[active] = pl.solver_relaxation * np.linalg.solve(K[np.ix_(active, active)], ra)
            dp = dp + step[0:3]
            Rp = rot.rotvec_matrix(step[3:6]) @ Rp
            db = db + step[6:9]
            Rb = rot.rotvec_matrix(step[9:12]) @ Rb
        r, _ = self.evaluate(dp, Rp, db, Rb)
        if np.linalg.norm(r[active]) >= pl.solver_tol:
            raise ConvergenceError(f"static balance residual {np.linalg.norm(r[active]):.3g} N after "
                                   f"{pl.solver_iterations} iterations")
        return dp, Rp, db, Rb


def hook_status(scene: Scene, i: int) -> Tuple[float, float]:
    """Out-of-plane deflection and load magnitude of hook ``i`` in the current configuration."""
    h = scene.hooks[i]
    pB = scene.part_pose.transform_point(h.anchor)
    pA = scene.base_pose.transform_point(h.anchor)
    Rb = scene.base_pose.matrix
    u = pB - pA
    axial = float(np.dot(Rb.T @ u, h.extraction_axis))
    return h.out_of_plane_deflection(axial), float(np.linalg.norm(_hook_world_stiffness(h, Rb) @ u))


def grasp_wrench(scene: Scene) -> np.ndarray:
    """Wrench the part exerts on the gripper (force, torque about the grasp centre)."""
    if not scene.grasped:
        return np.zeros(6)
    G = scene.part_pose.compose(scene.grasp_offset)
    pl = scene.plant
    f = -pl.grasp_k_trans * (scene.ee_pose.position - G.position)
    tau = -pl.grasp_k_rot * rot.matrix_rotvec(scene.ee_pose.matrix @ G.matrix.T)
    return np.concatenate([f, tau])


def _track(ee: RigidPose, target: RigidPose, plant: PlantParams, dt: float) -> RigidPose:
    d = target.position - ee.position
    n = np.linalg.norm(d)
    lim = plant.max_ee_speed * dt
    pos = target.position if n <= lim else ee.position + d * (lim / n)
    e = rot.matrix_rotvec(target.matrix @ ee.matrix.T)
    a = np.linalg.norm(e)
    alim = plant.max_ee_angular_speed * dt
    if a <= alim:
        q = target.orientation
    else:
        q = rot.normalize(rot.multiply(rot.from_rotvec(e * (alim / a)), ee.orientation))
    return RigidPose(pos, q)


def _settle_free(scene: Scene) -> Scene:
    """Closed-form balance once no hook is engaged.

    The part hangs on the grasp spring alone, so it sits exactly at the
    gripper; an unloaded free chassis relaxes back onto its support.
    """
    if scene.grasped:
        scene = replace(scene, part_pose=scene.ee_pose.compose(scene.grasp_offset.inverse()))
    if not scene.anchored:
        scene = replace(scene, base_pose=RigidPose(np.zeros(3)))
    return scene


def step_scene(scene: Scene, ee_target: ControlTarget, grip: str, dt: float) -> Tuple[Scene, np.ndarray]:
    """Advance the plant by ``dt`` toward ``ee_target.reference``.

    The gripper follows the reference subject to speed limits, the spring
    network is re-balanced, and hooks are released or broken as their
    deflection and load dictate. Returns the new scene and the wrench on the
    gripper once the step has settled. A hook that lets go during the step
    still loaded the gripper up to that moment; the largest such load is kept
    in ``peak_wrench`` of the returned scene.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if grip == "open" and scene.grasped:
        scene = scene.release_grasp()
    ee = None
    if scene.grasped:
        ee = _track(scene.ee_pose, ee_target.reference, scene.plant, dt)
        scene = replace(scene, ee_pose=ee)
    dp, Rp = _body_state(scene.part_pose, scene.part_center)
    db, Rb = _body_state(scene.base_pose, scene.base_center)
    peak = None
    for _ in range(len(scene.hooks) + 1):
        if scene.engaged:
            dp, Rp, db, Rb = _Network(scene, ee).solve(dp, Rp, db, Rb)
            scene = replace(scene, part_pose=_body_pose(dp, Rp, scene.part_center),
                            base_pose=_body_pose(db, Rb, scene.base_center))
        else:
            scene = _settle_free(scene)
        w = grasp_wrench(scene)
        if peak is None or np.linalg.norm(w[:3]) > np.linalg.norm(peak[:3]):
            peak = w
        released, broken = list(scene.released), list(scene.broken)
        changed = False
        for i in scene.engaged:
            deflection, load = hook_status(scene, i)
            if deflection >= scene.hooks[i].release_deflection * (1.0 - RELEASE_RTOL):
                released[i] = changed = True
            elif load > scene.hooks[i].break_force:
                broken[i] = changed = True
        if not changed:
            break
        scene = replace(scene, released=tuple(released), broken=tuple(broken))
    return replace(scene, peak_wrench=peak), grasp_wrench(scene)


def detect_failure(scene: Scene, wrench, ee_pose) -> Optional[str]:
    """First violated limit in priority order slip, mount_break, workspace."""
    w = np.asarray(wrench, dtype=float)
    lim = scene.limits
    f = w[:3]
    if ee_pose is not None:
        c = rot.to_matrix(ee_pose.orientation)[:, 0]
        tangential = float(np.linalg.norm(f - np.dot(f, c) * c))
    else:
        tangential = 0.0
    if tangential > lim.slip_force:
        return "slip"
    if float(np.linalg.norm(w)) > lim.mount_break_force:
        return "mount_break"
    if ee_pose is not None and float(np.linalg.norm(ee_pose.position)) > lim.workspace_radius:
        return "workspace"
    return None


# ---------------------------------------------------------------------------
# trials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ControllerConfig:
    mode: str = HYBRID
    params: ImpedanceParams = field(default_factory=ImpedanceParams)


@dataclass(frozen=True)
class NoiseModel:
    seed: int = 0
    sigma: float = 0.0


@dataclass(frozen=True)
class TrialOptions:
    depth_axis: tuple = (0.0, 0.0, 1.0)
    ema_alpha: float = 0.5
    similarity: SimilarityThresholds = field(default_factory=SimilarityThresholds)
    stop_on_completion: bool = False


@dataclass
class DeviationRecord:
    t: float
    pose: RigidPose
    deviation: float


@dataclass
class TrialResult:
    success: bool
    failure: Optional[str]
    deviation_series: List[DeviationRecord]
    released_hooks: int
    total_hooks: int
    duration: float
    peak_contact_force: float
    completion_time: Optional[float] = None
    grasp_time: Optional[float] = None

    def pose_samples(self) -> List[PoseSample]:
        return [PoseSample(r.t, r.pose.position, r.pose.orientation) for r in self.deviation_series]

    def summary(self) -> dict:
        return {"success": self.success, "failure": self.failure, "released_hooks": self.released_hooks,
                "total_hooks": self.total_hooks, "duration": self.duration,
                "peak_contact_force": self.peak_contact_force, "completion_time": self.completion_time,
                "grasp_time": self.grasp_time,
                "max_deviation": max((r.deviation for r in self.deviation_series), default=0.0)}


def _noisy(frames: Sequence[HandKeypoints], noise: NoiseModel) -> List[HandKeypoints]:
    if noise.sigma <= 0:
        return list(frames)
    rng = np.random.default_rng(noise.seed)
    out = []
    for kp in frames:
        off = rng.normal(0.0, noise.sigma, size=3)
        out.append(replace(kp, wrist=np.asarray(kp.wrist) + off, index_base=np.asarray(kp.index_base) + off,
                           thumb_base=np.asarray(kp.thumb_base) + off))
    return out


def _teleop_nominal(grasp_pose: RigidPose, hand0: RigidPose, hand: RigidPose) -> EndEffectorPose:
    """Replay the hand's motion since the grasp instant, starting from the grasp pose."""
    pos = grasp_pose.position + (hand.position - hand0.position)
    dq = rot.multiply(hand.orientation, rot.conjugate(hand0.orientation))
    q = rot.normalize(rot.multiply(dq, grasp_pose.orientation))
    return EndEffectorPose(pos, q, frame_id="robot")


def run_trial(scene: Scene, trajectory: Sequence[HandKeypoints], cal: Calibration,
              controller: ControllerConfig = ControllerConfig(), dual_arm: bool = True,
              noise: NoiseModel = NoiseModel(), options: TrialOptions = TrialOptions()) -> TrialResult:
    """Replay one demonstration through the full teleoperation pipeline."""
    if dual_arm and scene.fixation_grasp is None:
        raise ValueError("dual-arm trial needs a fixation grasp in the scene")
    if not dual_arm:
        scene = replace(scene, fixation_grasp=None)
    if controller.mode not in (HYBRID, POSITION_ONLY):
        raise ValueError(f"unknown control mode {controller.mode!r}")
    frames = filter_stable_keypoints(_noisy(trajectory, noise), options.ema_alpha)
    initial = scene.base_pose
    init_sample = PoseSample(0.0, initial.position, initial.orientation)
    series: List[DeviationRecord] = []
    total = len(scene.hooks)

    def record(t):
        p = scene.base_pose
        series.append(DeviationRecord(t, p, pose_deviation(PoseSample(t, p.position, p.orientation), init_sample)))

    params = controller.params
    imp = ImpedanceState()
    wrench = np.zeros(6)
    peak = 0.0
    failure = None
    completion = None
    grasp_time = None
    hand0 = grasp_pose = None
    t_prev = None
    for kp in frames:
        try:
            hand = camera_to_robot(build_hand_frame(kp, options.depth_axis), cal)
        except HandFrameError:
            continue
        if not scene.grasped:
            if kp.grip == "close" and grasp_time is None:
                cand = snap_to_grasp(scene.candidates, hand, options.similarity)
                if cand is not None:
                    scene = scene.establish_grasp(cand)
                    hand0, grasp_pose, grasp_time = hand, scene.ee_pose, kp.timestamp
            record(kp.timestamp)
            t_prev = kp.timestamp
            continue
        nominal = _teleop_nominal(grasp_pose, hand0, hand)
        interval = kp.timestamp - t_prev
        n_sub = max(1, math.ceil(interval / params.dt_max - 1e-9))
        dt = min(interval / n_sub, params.dt_max) if interval > 0 else params.dt_max
        for j in range(n_sub):
            target, imp = hybrid_target(controller.mode, nominal, imp, params, wrench, dt)
            try:
                scene, wrench = step_scene(scene, target, kp.grip, dt)
            except ConvergenceError:
                failure = "aborted"
                break
            load = scene.peak_wrench
            peak = max(peak, float(np.linalg.norm(load[:3])))
            failure = detect_failure(scene, load, scene.ee_pose)
            if failure is None and any(scene.broken):
                failure = "hook_broken"
            if failure:
                break
            if completion is None and all(scene.released):
                completion = t_prev + (j + 1) * dt
        record(kp.timestamp)
        t_prev = kp.timestamp
        if failure or (completion is not None and options.stop_on_completion):
            break
    if grasp_time is None and failure is None:
        failure = "no_grasp"
    released = sum(scene.released)
    duration = series[-1].t - series[0].t if series else 0.0
    return TrialResult(success=failure is None and released == total, failure=failure, deviation_series=series,
                       released_hooks=released, total_hooks=total, duration=duration,
                       peak_contact_force=peak, completion_time=completion, grasp_time=grasp_time)
