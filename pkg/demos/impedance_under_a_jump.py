"""A sudden jump in the operator's hand, replayed with and without impedance control.

The demonstration jerks upward just after the grasp closes. Pure position
tracking drags the cover against its hooks until the grip gives way; the
hybrid controller yields to the hook reaction and the pull completes.

    python3 demos/impedance_under_a_jump.py
"""

from pathlib import Path

from dualdisasm.config import load_scene
from dualdisasm.hand_pose import Calibration, read_trajectory
from dualdisasm.impedance_control import HYBRID, POSITION_ONLY
from dualdisasm.sim_core import ControllerConfig, run_trial

REF = Path(__file__).resolve().parents[1] / "fixtures" / "reference"
bundle = load_scene(REF / "scene.json")
cal = Calibration.load(REF / "calibration.json")
frames = read_trajectory(REF / "trajectories" / "aligned_jump_pull.jsonl")

for mode in (POSITION_ONLY, HYBRID):
    for dual in (False, True):
        res = run_trial(bundle.scene, frames, cal, ControllerConfig(mode, bundle.controller), dual,
                        options=bundle.options)
        s = res.summary()
        print(f"{mode:>13} {'dual' if dual else 'single':>6}-arm: success={s['success']!s:5} "
              f"failure={s['failure'] or '-':5} peak force {s['peak_contact_force']:6.1f} N "
              f"hooks {s['released_hooks']}/{s['total_hooks']}")
