"""How hook slope sets the pull needed to open a snap fit, and which way to pull.

    python3 demos/snap_fit_forces.py
"""

from pathlib import Path

import numpy as np

from dualdisasm.config import load_scene
from dualdisasm.disassembly_affordance import (decompose_hook_force, estimate_disassembly_direction,
                                               required_extraction_force)

REF = Path(__file__).resolve().parents[1] / "fixtures" / "reference"
hooks = load_scene(REF / "scene.json", candidates=False).scene.hooks
h = hooks[0]

print("theta   required pull   horizontal / vertical split of a 10 N hook load")
for theta in np.arange(0.0, 1.41, 0.2):
    hk = type(h)(**{**h.to_dict(), "theta": float(theta)})
    horiz, vert = decompose_hook_force(hk, 10.0)
    print(f"{theta:5.2f}   {required_extraction_force(hk):8.2f} N      {horiz:6.2f} / {vert:6.2f} N")

d = estimate_disassembly_direction(hooks)
print(f"\nestimated pull direction for the cover: {np.round(d, 6)}")
print(f"per-hook required pull: {required_extraction_force(h):.2f} N, {len(hooks)} hooks")
