from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from dualdisasm import rotation as rot
from dualdisasm.metrics import (NORMALIZED_DURATION, PoseSample, deviation_series, normalize_timeline,
                                pose_deviation, quaternion_angle, success_rate, write_deviation_csv)

Z90 = rot.from_rotvec([0.0, 0.0, np.pi / 2])


def sample(t=0.0, p=(0.0, 0.0, 0.0), q=rot.IDENTITY):
    return PoseSample(t, np.array(p, dtype=float), np.asarray(q, dtype=float))


def trace_angle(qa, qb):
    R = Rotation.from_quat(qa).as_matrix().T @ Rotation.from_quat(qb).as_matrix()
    return float(np.arccos(np.clip((np.trace(R) - 1) / 2, -1, 1)))


def test_quaternion_angle_examples():
    assert quaternion_angle(Z90, Z90) == 0.0
    assert quaternion_angle(-Z90, Z90) == 0.0
    assert quaternion_angle(Z90, rot.IDENTITY) == pytest.approx(np.pi / 2, abs=1e-12)
    assert quaternion_angle(Z90, rot.IDENTITY) == pytest.approx(trace_angle(Z90, rot.IDENTITY), abs=1e-12)
    with pytest.raises(ValueError):
        quaternion_angle([0, 0, 0, 2.0], rot.IDENTITY)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_quaternion_angle_matches_trace_oracle(seed):
    qa, qb = Rotation.random(2, random_state=seed).as_quat()
    ang = quaternion_angle(qa, qb)
    # the trace formula loses precision near 0 and pi
    assert ang == pytest.approx(trace_angle(qa, qb), abs=1e-7)
    assert ang == quaternion_angle(qb, qa)
    assert ang == quaternion_angle(-qa, qb) == quaternion_angle(qa, -qb)


def test_pose_deviation_examples():
    a = sample()
    assert pose_deviation(a, a) == 0.0
    assert pose_deviation(sample(p=(0.03, 0.04, 0.0)), a) == pytest.approx(0.05, abs=1e-15)
    assert pose_deviation(sample(p=(0.1, 0.0, 0.0), q=Z90), a) == pytest.approx(0.1 + np.pi / 2, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_pose_deviation_rigid_invariance(seed):
    rng = np.random.default_rng(seed)
    qs = rot.random_quaternions(rng, 3)
    a = sample(p=rng.normal(size=3), q=qs[0])
    b = sample(p=rng.normal(size=3), q=qs[1])
    d = pose_deviation(a, b)
    assert d >= 0
    R, t = rot.to_matrix(qs[2]), rng.normal(size=3)

    def move(s):
        return sample(s.t, R @ s.position + t, rot.multiply(qs[2], s.orientation))
    assert pose_deviation(move(a), move(b)) == pytest.approx(d, abs=1e-9)


def test_pose_deviation_zero_only_for_equal_poses():
    a = sample(p=(0.2, 0.1, 0.0), q=Z90)
    assert pose_deviation(sample(p=(0.2, 0.1, 0.0), q=-Z90), a) == 0.0
    assert pose_deviation(sample(p=(0.2, 0.1, 1e-6), q=Z90), a) > 0
    assert pose_deviation(sample(p=(0.2, 0.1, 0.0), q=rot.from_rotvec([0, 0, np.pi / 2 + 1e-6])), a) > 0


def test_normalize_identity():
    rng = np.random.default_rng(0)
    qs = rot.random_quaternions(rng, 161)
    series = [sample(0.1 * i, rng.normal(size=3), qs[i]) for i in range(161)]
    out = normalize_timeline(series)
    assert len(out) == 161
    for a, b in zip(series, out):
        assert abs(a.t - b.t) < 1e-12
        assert np.allclose(a.position, b.position, atol=1e-12)
        assert rot.angle_between(a.orientation, b.orientation) < 1e-12


def test_normalize_stretches_span():
    series = [sample(t, (t, 0.0, 0.0)) for t in np.linspace(0.0, 8.0, 9)]
    out = normalize_timeline(series)
    assert out[0].t == 0.0 and out[-1].t == NORMALIZED_DURATION
    mid = out[80]
    assert mid.t == pytest.approx(8.0, abs=1e-12)
    assert mid.position[0] == pytest.approx(4.0, abs=1e-12)


def test_normalize_slerp_midpoint():
    out = normalize_timeline([sample(0.0), sample(2.0, q=Z90)])
    half = rot.from_rotvec([0.0, 0.0, np.pi / 4])
    assert rot.angle_between(out[80].orientation, half) < 1e-12


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 40))
def test_normalize_keeps_endpoint_deviation(seed, n):
    rng = np.random.default_rng(seed)
    t = np.cumsum(rng.uniform(0.01, 1.0, size=n))
    qs = rot.random_quaternions(rng, n)
    series = [sample(t[i], rng.normal(size=3), qs[i]) for i in range(n)]
    before = deviation_series(series)
    after = deviation_series(normalize_timeline(series))
    assert after[0, 1] == before[0, 1] == 0.0
    assert after[-1, 1] == before[-1, 1]


def test_normalize_validation():
    with pytest.raises(ValueError):
        normalize_timeline([sample()])
    with pytest.raises(ValueError):
        normalize_timeline([sample(1.0), sample(1.0)])


def test_deviation_series_columns():
    rows = deviation_series([sample(0.0), sample(1.0, (0.03, 0.04, 0.0), Z90)])
    assert rows.shape == (2, 4)
    assert np.allclose(rows[1], [1.0, 0.05 + np.pi / 2, 0.05, np.pi / 2], atol=1e-12)


def test_write_deviation_csv(tmp_path):
    path = tmp_path / "dev.csv"
    write_deviation_csv([sample(0.0), sample(0.5, (0.0, 0.1, 0.0))], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,deviation,pos_term,ang_term"
    assert [float(x) for x in lines[2].split(",")] == [0.5, 0.1, 0.1, 0.0]


@pytest.mark.parametrize("wins,n,rate", [(8, 10, 0.8), (10, 10, 1.0), (0, 1, 0.0)])
def test_success_rate_examples(wins, n, rate):
    results = [SimpleNamespace(success=i < wins) for i in range(n)]
    assert success_rate(results) == rate


def test_success_rate_empty():
    with pytest.raises(ValueError):
        success_rate([])
