"""Grasp affordances on the reference cover.

Clusters the cover's facets, samples contacts, pairs them by ray casting and
drops grasps whose gripper would hit the chassis. Run from the repository root:

    python3 demos/grasp_affordance_tour.py
"""

from collections import Counter
from pathlib import Path

import numpy as np

from dualdisasm.config import load_scene
from dualdisasm.grasp_affordance import generate_grasp_candidates
from dualdisasm.mesh_geometry import cluster_facets

REF = Path(__file__).resolve().parents[1] / "fixtures" / "reference"

bundle = load_scene(REF / "scene.json")
scene = bundle.scene

clusters = cluster_facets(scene.part, bundle.sampling.angle_tol)
print(f"cover: {len(scene.part)} faces in {len(clusters)} planar clusters")
for c in clusters:
    print(f"  normal {np.round(c.mean_normal, 3)}  area {c.total_area * 1e4:7.2f} cm^2  faces {len(c.face_indices)}")

raw = generate_grasp_candidates(scene.part, scene.gripper, bundle.sampling)
print(f"\n{len(raw)} antipodal candidates before collision filtering")
print(f"{len(scene.candidates)} remain once the chassis is taken into account")

# which jaw widths survive: the thin rib is the obvious handle
widths = Counter(round(c.jaw_width, 3) for c in scene.candidates)
for w, n in sorted(widths.items()):
    print(f"  width {w:.3f} m: {n}")
