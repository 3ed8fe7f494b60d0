"""Snap-fit hooks as spring elements and the disassembly direction they imply.

A hook is engaged at angle ``theta`` between its projection and the horizontal
extraction axis. A horizontal pull ``F`` splits into ``F cos(theta)``, which
bends the hook out of plane, and ``F sin(theta)``, carried in plane. The hook
lets go once the out-of-plane deflection reaches ``release_deflection``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize

from . import rotation as rot

SINGULAR_MARGIN = 1e-6
COS_FLOOR = 1e-3


class DisassemblyError(ValueError):
    pass


@dataclass(frozen=True)
class SnapFitHook:
    anchor: np.ndarray
    theta: float
    extraction_axis: np.ndarray
    k_in: float
    k_out: float
    k_rot: float
    release_deflection: float
    break_force: float

    def __post_init__(self):
        object.__setattr__(self, "anchor", np.asarray(self.anchor, dtype=float).reshape(3))
        axis = np.asarray(self.extraction_axis, dtype=float).reshape(3)
        if abs(np.linalg.norm(axis) - 1.0) > 1e-9:
            raise DisassemblyError("extraction_axis must be unit length")
        object.__setattr__(self, "extraction_axis", axis)
        if not 0.0 <= self.theta <= np.pi / 2:
            raise DisassemblyError(f"theta={self.theta} outside [0, pi/2]")
        if min(self.k_in, self.k_out, self.k_rot, self.release_deflection, self.break_force) <= 0:
            raise DisassemblyError("hook stiffnesses, release deflection and break force must be positive")

    @property
    def extraction_stiffness(self) -> float:
        """Stiffness felt along the extraction axis while the hook is engaged.

        Chosen so a pull that reaches ``release_deflection`` out of plane is
        exactly :func:`required_extraction_force`.
        """
        c = np.cos(self.theta)
        return self.k_out / (c * c)

    def out_of_plane_deflection(self, axial_displacement: float) -> float:
        return axial_displacement / np.cos(self.theta)

    def to_dict(self) -> dict:
        return {"anchor": self.anchor.tolist(), "theta": self.theta,
                "extraction_axis": self.extraction_axis.tolist(), "k_in": self.k_in,
                "k_out": self.k_out, "k_rot": self.k_rot,
                "release_deflection": self.release_deflection, "break_force": self.break_force}


class HookForceDecomposition(NamedTuple):
    horizontal: float
    vertical: float


def decompose_hook_force(hook: SnapFitHook, F: float) -> HookForceDecomposition:
    if F < 0:
        raise DisassemblyError("applied force must be non-negative")
    return HookForceDecomposition(F * np.cos(hook.theta), F * np.sin(hook.theta))


def required_extraction_force(hook: SnapFitHook) -> float:
    """Horizontal pull that bends the hook to its release deflection."""
    if hook.theta >= np.pi / 2 - SINGULAR_MARGIN:
        raise DisassemblyError("hook angle too close to pi/2: no horizontal extraction possible")
    return hook.k_out * hook.release_deflection / np.cos(hook.theta)


def fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(1.0 - z * z)
    phi = np.pi * (3.0 - np.sqrt(5.0)) * i
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def direction_cost(d, hooks: Sequence[SnapFitHook], forces=None) -> float:
    """Worst per-hook force needed when pulling along ``d``."""
    d = np.asarray(d, dtype=float)
    if forces is None:
        forces = [required_extraction_force(h) for h in hooks]
    return max(f / max(float(np.dot(d, h.extraction_axis)), COS_FLOOR) for f, h in zip(forces, hooks))


def estimate_disassembly_direction(hooks: Sequence[SnapFitHook], n_directions: int = 2000) -> np.ndarray:
    """Unit pull direction minimising the largest per-hook required force.

    A Fibonacci-sphere scan picks the start point; Nelder-Mead on the tangent
    plane refines it.
    """
    hooks = list(hooks)
    if not hooks:
        raise DisassemblyError("at least one hook is required")
    forces = np.array([required_extraction_force(h) for h in hooks])
    axes = np.array([h.extraction_axis for h in hooks])
    dirs = fibonacci_sphere(n_directions)
    cos = np.maximum(dirs @ axes.T, COS_FLOOR)
    best = dirs[int(np.argmin((forces / cos).max(axis=1)))]

    # warm start from the best force-weighted axis combination if it beats the grid
    blend = (axes / forces[:, None]).sum(axis=0)
    if np.linalg.norm(blend) > 1e-12:
        blend /= np.linalg.norm(blend)
        if direction_cost(blend, hooks, forces) < direction_cost(best, hooks, forces):
            best = blend

    u, v = rot.tangent_basis(best)

    def cost(x):
        d = best + x[0] * u + x[1] * v
        return direction_cost(d / np.linalg.norm(d), hooks, forces)

    res = minimize(cost, np.zeros(2), method="Nelder-Mead",
                   options={"xatol": 1e-11, "fatol": 1e-13, "initial_simplex": [[0, 0], [0.02, 0], [0, 0.02]],
                            "maxiter": 4000})
    d = best + res.x[0] * u + res.x[1] * v
    d /= np.linalg.norm(d)
    return d if cost(res.x) <= cost(np.zeros(2)) else best
