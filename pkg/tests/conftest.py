from pathlib import Path

import numpy as np
import pytest

from dualdisasm.config import load_scene
from dualdisasm.hand_pose import Calibration, read_trajectory

REFERENCE = Path(__file__).resolve().parents[1] / "fixtures" / "reference"


@pytest.fixture(scope="session")
def reference_dir() -> Path:
    return REFERENCE


@pytest.fixture(scope="session")
def reference_bundle():
    return load_scene(REFERENCE / "scene.json")


@pytest.fixture(scope="session")
def reference_calibration():
    return Calibration.load(REFERENCE / "calibration.json")


@pytest.fixture(scope="session")
def trajectory():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = read_trajectory(REFERENCE / "trajectories" / f"{name}.jsonl")
        return cache[name]
    return get


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record and print one pass/fail line for an acceptance criterion."""
    def report(name, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
