import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualdisasm import rotation as rot
from dualdisasm.grasp_affordance import (GraspCandidate, GripperSpec, SamplingParams, SimilarityThresholds,
                                         filter_colliding_candidates, generate_grasp_candidates, grasp_frame,
                                         grasp_similarity, snap_to_grasp, write_candidates)
from dualdisasm.mesh_geometry import (box_mesh, check_gripper_collision, gripper_boxes, icosphere, load_mesh,
                                      merge_meshes)
from dualdisasm.pose import EndEffectorPose

BOX = (0.1, 0.2, 0.3)


def aabb_penetrated_by_boxes(half, boxes, tol=1e-9) -> np.ndarray:
    """Which oriented boxes penetrate the origin-centred axis-aligned box ``half`` (15-axis test)."""
    c = np.array([b.center for b in boxes])
    r = np.array([b.axes for b in boxes])
    h = np.array([b.half for b in boxes])
    eye = np.broadcast_to(np.eye(3), r.shape)
    axes = [eye[:, :, i] for i in range(3)] + [r[:, :, j] for j in range(3)]
    axes += [np.cross(eye[:, :, i], r[:, :, j]) for i in range(3) for j in range(3)]
    separated = np.zeros(len(boxes), dtype=bool)
    for L in axes:
        n = np.linalg.norm(L, axis=1)
        ok = n > 1e-12
        L = L / np.where(ok, n, 1.0)[:, None]
        ra = np.abs(L) @ half
        rb = np.sum(np.abs(np.einsum("bij,bi->bj", r, L)) * h, axis=1)
        separated |= ok & (np.abs(np.einsum("bi,bi->b", c, L)) >= ra + rb - tol)
    return ~separated


def box_grasp_oracle(extents, gripper, params):
    """Analytic antipodal pairs of an axis-aligned box, each kept when no gripper box enters the box."""
    half = np.asarray(extents) / 2
    raw = []
    for a in range(3):
        if extents[a] > gripper.max_opening:
            continue
        b, c = [k for k in range(3) if k != a]
        kb = np.floor(half[b] / params.spacing + 1e-9)
        kc = np.floor(half[c] / params.spacing + 1e-9)
        for s in (1.0, -1.0):
            for i in np.arange(-kb, kb + 1):
                for j in np.arange(-kc, kc + 1):
                    ob, oc = i * params.spacing, j * params.spacing
                    if min(half[b] - abs(ob), half[c] - abs(oc)) < params.min_boundary_dist - 1e-12:
                        continue
                    pa = np.zeros(3)
                    pa[a], pa[b], pa[c] = s * half[a], ob, oc
                    pb = pa.copy()
                    pb[a] = -pa[a]
                    for k in range(params.approach_steps):
                        raw.append((pa, pb, extents[a], k))
    boxes = [bx for pa, pb, w, k in raw
             for bx in gripper_boxes(0.5 * (pa + pb), grasp_frame(pb - pa, k, params.approach_steps), w, gripper)]
    if not raw:
        return []
    hit = aabb_penetrated_by_boxes(half, boxes).reshape(len(raw), -1).any(axis=1)
    return [g for g, h in zip(raw, hit) if not h]


def candidate_key(pa, pb, k):
    return tuple(np.round(np.r_[pa, pb], 9)) + (k,)


def test_box_candidates_equal_analytic_oracle():
    gripper = GripperSpec(max_opening=0.15)
    params = SamplingParams()
    got = generate_grasp_candidates(box_mesh(BOX), gripper, params)
    want = box_grasp_oracle(BOX, gripper, params)
    assert len(got) == len(want) > 0
    assert sorted(candidate_key(c.contact_a.position, c.contact_b.position, c.rotation_index) for c in got) == \
        sorted(candidate_key(pa, pb, k) for pa, pb, _, k in want)
    assert all(abs(c.jaw_width - 0.1) < 1e-12 for c in got)


def test_small_cube_has_all_three_face_pairs():
    cands = generate_grasp_candidates(box_mesh((0.05, 0.05, 0.05)), GripperSpec(max_opening=0.15))
    axes = {tuple(np.round(np.abs(c.closing_axis), 6)) for c in cands}
    assert axes == {(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)}
    want = box_grasp_oracle((0.05, 0.05, 0.05), GripperSpec(max_opening=0.15), SamplingParams())
    assert len(cands) == len(want)


def test_sphere_wider_than_opening_has_no_candidates():
    assert generate_grasp_candidates(icosphere(0.1, 2), GripperSpec(max_opening=0.15)) == []


def test_candidate_invariants_and_ordering():
    gspec = GripperSpec(max_opening=0.15)
    cands = generate_grasp_candidates(box_mesh((0.05, 0.08, 0.12)), gspec)
    assert cands
    keys = [c.contact_a.face_id for c in cands]
    assert keys == sorted(keys)
    for c in cands:
        pa, pb = c.contact_a.position, c.contact_b.position
        assert np.linalg.norm(c.center - 0.5 * (pa + pb)) < 1e-9
        assert abs(c.jaw_width - np.linalg.norm(pb - pa)) < 1e-12
        assert c.jaw_width <= gspec.max_opening
        assert abs(np.linalg.norm(c.orientation) - 1) < 1e-9
        assert abs(np.dot(c.closing_axis, (pb - pa) / c.jaw_width)) > np.cos(np.radians(10))


def test_generation_is_deterministic():
    a = generate_grasp_candidates(box_mesh(BOX), GripperSpec())
    b = generate_grasp_candidates(box_mesh(BOX), GripperSpec())
    assert all(np.array_equal(x.center, y.center) and np.array_equal(x.orientation, y.orientation)
               for x, y in zip(a, b))


# --- filtering -------------------------------------------------------------

def test_filter_without_obstacles_is_identity():
    cands = generate_grasp_candidates(box_mesh((0.05, 0.05, 0.05)), GripperSpec())
    assert filter_colliding_candidates(cands, [], GripperSpec()) == cands


def test_filter_against_obstacle_at_every_palm_is_empty():
    gspec = GripperSpec()
    cands = generate_grasp_candidates(box_mesh((0.05, 0.05, 0.05)), gspec)[:40]
    blocks = merge_meshes([box_mesh((0.01, 0.01, 0.01), gripper_boxes(c.center, c.matrix, c.jaw_width, gspec)[2].center)
                           for c in cands])
    assert filter_colliding_candidates(cands, [blocks], gspec) == []


def test_reference_filter_matches_per_candidate_box_oracle(reference_dir):
    # the chassis is the union of a body box and a fin box
    body = ((0.75, 0.0, 0.20), (0.15, 0.25, 0.20))
    fin = ((0.85, 0.0, 0.43), (0.01, 0.05, 0.03))
    part = load_mesh(reference_dir / "cover.obj")
    chassis = load_mesh(reference_dir / "chassis.obj")
    gspec = GripperSpec()
    cands = generate_grasp_candidates(part, gspec)
    kept = filter_colliding_candidates(cands, [chassis], gspec)
    boxes = [bx for c in cands for bx in gripper_boxes(c.center, c.matrix, c.jaw_width, gspec)]
    hit = np.zeros(len(boxes), dtype=bool)
    for ctr, h in (body, fin):
        shifted = [bx._replace(center=bx.center - np.array(ctr)) for bx in boxes]
        hit |= aabb_penetrated_by_boxes(np.array(h), shifted)
    hit = hit.reshape(len(cands), -1).any(axis=1)
    expected = [c for c, h in zip(cands, hit) if not h]
    assert [id(c) for c in kept] == [id(c) for c in expected]
    assert 0 < len(kept) < len(cands)


def test_filter_output_is_subsequence(reference_dir):
    part = load_mesh(reference_dir / "cover.obj")
    cands = generate_grasp_candidates(part, GripperSpec())
    kept = filter_colliding_candidates(cands, [load_mesh(reference_dir / "chassis.obj")], GripperSpec())
    it = iter(cands)
    assert all(any(k is c for c in it) for k in kept)
    assert all(not check_gripper_collision([load_mesh(reference_dir / "chassis.obj")], k, GripperSpec()) for k in kept)


# --- similarity and snapping -------------------------------------------------

def cand(center, q):
    return GraspCandidate(np.asarray(center, dtype=float), np.asarray(q, dtype=float), 0.05, None, None, 0)


def hand(center, q):
    return EndEffectorPose(np.asarray(center, dtype=float), np.asarray(q, dtype=float))


def test_similarity_examples():
    q = rot.from_rotvec([0.1, 0.2, 0.3])
    assert grasp_similarity(cand([1, 2, 3], q), hand([1, 2, 3], q)) == (0.0, 0.0)
    for axis in np.eye(3):
        pd, od = grasp_similarity(cand([0, 0, 0], rot.IDENTITY), hand([0, 0, 0], rot.from_rotvec(np.pi * axis)))
        assert od == pytest.approx(1.0, abs=1e-12)
    pd, od = grasp_similarity(cand([0, 0, 0], rot.IDENTITY),
                              hand([0.03, 0.04, 0], rot.from_rotvec([0, 0, np.pi / 2])))
    assert pd == pytest.approx(0.05, abs=1e-15)
    assert od == pytest.approx(0.5, abs=1e-12)


def test_similarity_rejects_non_unit():
    with pytest.raises(ValueError):
        grasp_similarity(cand([0, 0, 0], [0, 0, 0, 1.1]), hand([0, 0, 0], rot.IDENTITY))


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_similarity_sign_flip_invariant(seed):
    rng = np.random.default_rng(seed)
    qa, qb = rot.random_quaternions(rng, 2)
    c = rng.normal(size=3)
    base = grasp_similarity(cand(c, qa), hand(c, qb))[1]
    assert grasp_similarity(cand(c, -qa), hand(c, qb))[1] == pytest.approx(base, abs=1e-12)
    assert grasp_similarity(cand(c, qa), hand(c, -qb))[1] == pytest.approx(base, abs=1e-12)


def five_candidates():
    rng = np.random.default_rng(11)
    centers = rng.uniform(-0.2, 0.2, (5, 3))
    quats = rot.random_quaternions(rng, 5)
    return [cand(c, q) for c, q in zip(centers, quats)]


def brute_force_snap(cands, h, th):
    scored = []
    for i, c in enumerate(cands):
        pd = np.linalg.norm(c.center - h.position)
        od = 2 * np.arccos(min(1.0, abs(np.dot(c.orientation, h.orientation)))) / np.pi
        if pd <= th.max_pos_diff and od <= th.max_ori_diff:
            scored.append((pd + od * th.max_pos_diff, i))
    return cands[min(scored)[1]] if scored else None


def test_snap_examples():
    cands = five_candidates()
    th = SimilarityThresholds()
    assert snap_to_grasp(cands, hand(cands[2].center, cands[2].orientation), th) is cands[2]
    far = hand([5, 5, 5], rot.IDENTITY)
    assert snap_to_grasp(cands, far, th) is None
    near3 = hand(cands[3].center + [0.01, -0.01, 0.005], rot.multiply(rot.from_rotvec([0, 0.1, 0]), cands[3].orientation))
    assert snap_to_grasp(cands, near3, th) is cands[3]
    assert brute_force_snap(cands, near3, th) is cands[3]


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), pos=st.floats(0.01, 0.5), ori=st.floats(0.05, 1.0))
def test_snap_matches_brute_force_and_respects_thresholds(seed, pos, ori):
    rng = np.random.default_rng(seed)
    cands = [cand(c, q) for c, q in zip(rng.uniform(-0.1, 0.1, (8, 3)), rot.random_quaternions(rng, 8))]
    h = hand(rng.uniform(-0.1, 0.1, 3), rot.random_quaternions(rng, 1)[0])
    th = SimilarityThresholds(pos, ori)
    got = snap_to_grasp(cands, h, th)
    assert got is brute_force_snap(cands, h, th)
    if got is not None:
        pd, od = grasp_similarity(got, h)
        assert pd <= th.max_pos_diff and od <= th.max_ori_diff


def test_candidates_export(tmp_path):
    cands = generate_grasp_candidates(box_mesh((0.05, 0.05, 0.05)), GripperSpec())[:3]
    write_candidates(cands, tmp_path / "c.json")
    data = json.loads((tmp_path / "c.json").read_text())
    assert len(data["candidates"]) == 3
    assert data["candidates"][0]["center"] == [float(x) for x in cands[0].center]
