"""Hybrid position / impedance control.

The correction ``x`` obeys ``M x'' + D x' + K x = F`` independently on each of
six axes (three translational, three rotational) and is added to the nominal
target to obtain the reference pose.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from . import rotation as rot
from .pose import EndEffectorPose

POSITION_ONLY = "position_only"
HYBRID = "hybrid"
MODES = (POSITION_ONLY, HYBRID)


def _six(values) -> np.ndarray:
    a = np.asarray(values, dtype=float)
    return np.full(6, float(a)) if a.ndim == 0 else a.reshape(6)


@dataclass(frozen=True)
class ImpedanceParams:
    M: np.ndarray = field(default_factory=lambda: np.array([2.0, 2.0, 2.0, 0.05, 0.05, 0.05]))
    D: np.ndarray = field(default_factory=lambda: np.array([90.0, 90.0, 90.0, 2.0, 2.0, 2.0]))
    K: np.ndarray = field(default_factory=lambda: np.array([1000.0, 1000.0, 1000.0, 20.0, 20.0, 20.0]))
    dt_max: float = 0.01

    def __post_init__(self):
        for name in ("M", "D", "K"):
            v = _six(getattr(self, name))
            if not np.all(v > 0):
                raise ValueError(f"impedance {name} must be positive on every axis")
            object.__setattr__(self, name, v)

    def to_dict(self) -> dict:
        return {"M": self.M.tolist(), "D": self.D.tolist(), "K": self.K.tolist(), "dt_max": self.dt_max}


@dataclass(frozen=True)
class ImpedanceState:
    x: np.ndarray = field(default_factory=lambda: np.zeros(6))
    x_dot: np.ndarray = field(default_factory=lambda: np.zeros(6))

    def __post_init__(self):
        object.__setattr__(self, "x", _six(self.x))
        object.__setattr__(self, "x_dot", _six(self.x_dot))
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.x_dot))):
            raise ValueError("impedance state must be finite")


@dataclass(frozen=True)
class ControlTarget:
    nominal: EndEffectorPose
    reference: EndEffectorPose
    mode: str


def step_impedance(state: ImpedanceState, params: ImpedanceParams, F, dt: float) -> ImpedanceState:
    """One semi-implicit Euler step of the decoupled mass-spring-damper."""
    F = np.asarray(F, dtype=float).reshape(6)
    if not np.all(np.isfinite(F)):
        raise ValueError("wrench must be finite")
    if not 0.0 < dt <= params.dt_max:
        raise ValueError(f"dt={dt} must lie in (0, {params.dt_max}]")
    acc = (F - params.D * state.x_dot - params.K * state.x) / params.M
    x_dot = state.x_dot + acc * dt
    return ImpedanceState(state.x + x_dot * dt, x_dot)


def reference_position(nominal: EndEffectorPose, state: ImpedanceState) -> EndEffectorPose:
    """Shift the nominal pose by the translational correction and rotate it by the rotational one."""
    if not np.any(state.x):
        return nominal
    q = rot.normalize(rot.multiply(rot.from_rotvec(state.x[3:]), nominal.orientation))
    return EndEffectorPose(nominal.position + state.x[:3], q, frame_id=nominal.frame_id)


def hybrid_target(mode: str, nominal: EndEffectorPose, state: ImpedanceState, params: ImpedanceParams,
                  F, dt: float) -> Tuple[ControlTarget, ImpedanceState]:
    if mode == POSITION_ONLY:
        return ControlTarget(nominal, nominal, mode), state
    if mode != HYBRID:
        raise ValueError(f"unknown control mode {mode!r}")
    state = step_impedance(state, params, F, dt)
    return ControlTarget(nominal, reference_position(nominal, state), mode), state
