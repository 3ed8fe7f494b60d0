"""Seeded multi-method experiments over a demonstration corpus, and their reports."""

from __future__ import annotations

import csv
import io
import json
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import ConfigError, SceneBundle, load_scene, read_json
from .hand_pose import Calibration, HandKeypoints, read_trajectory
from .impedance_control import HYBRID, POSITION_ONLY
from .metrics import NORMALIZED_DURATION, RESAMPLE_STEP, deviation_series, normalize_timeline, success_rate
from .sim_core import ControllerConfig, NoiseModel, TrialResult, run_trial

log = logging.getLogger(__name__)

N_SAMPLES = int(round(NORMALIZED_DURATION / RESAMPLE_STEP)) + 1


@dataclass(frozen=True)
class MethodSpec:
    name: str
    dual_arm: bool
    hybrid: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "dual_arm": self.dual_arm, "hybrid": self.hybrid, "affordance": True}


@dataclass(frozen=True)
class ExperimentConfig:
    scene_path: Path
    trajectory_paths: Tuple[Path, ...]
    calibration_path: Optional[Path]
    methods: Tuple[MethodSpec, ...]
    trials_per_method: int = 10
    noise_sigma: float = 0.0
    base_seed: int = 0
    output_dir: Path = Path("results")

    def __post_init__(self):
        if self.trials_per_method < 1:
            raise ConfigError("trials_per_method must be at least 1")
        if not self.methods:
            raise ConfigError("at least one method is required")
        names = [m.name for m in self.methods]
        if len(set(names)) != len(names):
            raise ConfigError(f"method names must be unique: {names}")
        if not self.trajectory_paths:
            raise ConfigError("at least one trajectory is required")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be non-negative")

    @classmethod
    def from_dict(cls, data: dict, root=".") -> "ExperimentConfig":
        root = Path(root)
        known = {"scene_path", "trajectory_paths", "calibration_path", "methods", "trials_per_method",
                 "noise_sigma", "base_seed", "output_dir"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown experiment keys: {sorted(extra)}")
        try:
            methods = tuple(MethodSpec(str(m["name"]), bool(m["dual_arm"]), bool(m["hybrid"]))
                            for m in data["methods"])
            cal = data.get("calibration_path")
            return cls(scene_path=root / data["scene_path"],
                       trajectory_paths=tuple(root / p for p in data["trajectory_paths"]),
                       calibration_path=root / cal if cal else None,
                       methods=methods,
                       trials_per_method=int(data.get("trials_per_method", 10)),
                       noise_sigma=float(data.get("noise_sigma", 0.0)),
                       base_seed=int(data.get("base_seed", 0)),
                       output_dir=root / data.get("output_dir", "results"))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"invalid experiment config: missing or malformed {exc}") from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        return cls.from_dict(read_json(path), path.parent)

    def echo(self) -> dict:
        """Run-independent part of the config (no seed, no output location)."""
        return {"scene_path": self.scene_path.name,
                "trajectory_paths": [f"{p.parent.name}/{p.name}" for p in self.trajectory_paths],
                "calibration_path": self.calibration_path.name if self.calibration_path else None,
                "methods": [m.to_dict() for m in self.methods],
                "trials_per_method": self.trials_per_method,
                "noise_sigma": self.noise_sigma}


@dataclass
class TrialRecord:
    method: str
    trial: int
    seed: int
    trajectory: str
    result: TrialResult
    curve: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        out = {"method": self.method, "trial": self.trial, "seed": self.seed, "trajectory": self.trajectory}
        out.update(self.result.summary())
        out["normalized_completion_time"] = normalized_completion_time(self.result)
        out["normalized_max_deviation"] = float(self.curve.max()) if self.curve is not None else 0.0
        return out


@dataclass
class ExperimentReport:
    config: dict
    run: dict
    methods: List[MethodSpec]
    records: List[TrialRecord]

    def method_records(self, name: str) -> List[TrialRecord]:
        return [r for r in self.records if r.method == name]

    def success_rates(self) -> Dict[str, Optional[float]]:
        out = {}
        for m in self.methods:
            recs = self.method_records(m.name)
            out[m.name] = success_rate([r.result for r in recs]) if recs else None
        return out

    def to_dict(self) -> dict:
        rates = self.success_rates()
        methods = []
        for m in self.methods:
            recs = self.method_records(m.name)
            entry = m.to_dict()
            entry.update({"trials": len(recs), "successes": sum(r.result.success for r in recs),
                          "success_rate": rates[m.name],
                          "failures": dict(sorted(Counter(r.result.failure for r in recs
                                                          if r.result.failure).items()))})
            if recs:
                curves = np.array([r.curve for r in recs])
                entry["deviation_curve"] = {"mean": curves.mean(axis=0).tolist(), "max": curves.max(axis=0).tolist()}
                entry["max_peak_contact_force"] = max(r.result.peak_contact_force for r in recs)
            methods.append(entry)
        return {"config": self.config, "run": self.run, "methods": methods,
                "timeline": {"duration": NORMALIZED_DURATION, "step": RESAMPLE_STEP, "samples": N_SAMPLES},
                "trials": [r.to_dict() for r in self.records]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def normalized_deviation(result: TrialResult) -> np.ndarray:
    """Deviation resampled on the fixed 16 s timeline; a trial with no time span is all zeros."""
    samples = result.pose_samples()
    if len(samples) < 2 or samples[-1].t <= samples[0].t:
        return np.zeros(N_SAMPLES)
    return deviation_series(normalize_timeline(samples))[:, 1]


def normalized_completion_time(result: TrialResult) -> Optional[float]:
    if result.completion_time is None or result.duration <= 0:
        return None
    t0 = result.deviation_series[0].t
    return (result.completion_time - t0) * NORMALIZED_DURATION / result.duration


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------

_WORKER: dict = {}


def _init_worker(bundle, cal, trajectories, sigma):
    _WORKER.update(bundle=bundle, cal=cal, trajectories=trajectories, sigma=sigma)


def _run_task(task):
    method, trial, seed, traj_index = task
    w = _WORKER
    bundle: SceneBundle = w["bundle"]
    ctrl = ControllerConfig(HYBRID if method.hybrid else POSITION_ONLY, bundle.controller)
    result = run_trial(bundle.scene, w["trajectories"][traj_index], w["cal"], ctrl, method.dual_arm,
                       NoiseModel(seed, w["sigma"]), bundle.options)
    return result, normalized_deviation(result)


@dataclass(frozen=True)
class LoadedInputs:
    bundle: SceneBundle
    calibration: Calibration
    trajectories: Tuple[Tuple[HandKeypoints, ...], ...]


def load_inputs(cfg: ExperimentConfig, bundle: Optional[SceneBundle] = None) -> LoadedInputs:
    """Read every referenced file up front so a bad path fails before any trial runs."""
    for p in (cfg.scene_path, cfg.calibration_path, *cfg.trajectory_paths):
        if p is not None and not Path(p).is_file():
            raise FileNotFoundError(f"missing input file: {p}")
    bundle = bundle or load_scene(cfg.scene_path)
    cal = Calibration.load(cfg.calibration_path) if cfg.calibration_path else Calibration.identity()
    trajs = []
    for p in cfg.trajectory_paths:
        try:
            trajs.append(tuple(read_trajectory(p)))
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"{p}: {exc}") from exc
    return LoadedInputs(bundle, cal, tuple(trajs))


def run_experiment(cfg: ExperimentConfig, jobs: int = 1, inputs: Optional[LoadedInputs] = None) -> ExperimentReport:
    """Run every method on ``trials_per_method`` seeded trials.

    Trial ``i`` of every method uses seed ``base_seed + i`` and demonstration
    ``i mod len(trajectory_paths)``, so methods are compared on matched inputs.
    Results do not depend on ``jobs``.
    """
    inputs = inputs or load_inputs(cfg)
    n_traj = len(inputs.trajectories)
    tasks = [(m, i, cfg.base_seed + i, i % n_traj) for m in cfg.methods for i in range(cfg.trials_per_method)]
    init = (inputs.bundle, inputs.calibration, inputs.trajectories, cfg.noise_sigma)
    if jobs <= 1:
        _init_worker(*init)
        outputs = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=init) as pool:
            outputs = list(pool.map(_run_task, tasks))
    records = []
    for (m, i, seed, k), (result, curve) in zip(tasks, outputs):
        records.append(TrialRecord(m.name, i, seed, f"{cfg.trajectory_paths[k].parent.name}/{cfg.trajectory_paths[k].name}",
                                   result, curve))
        log.info("%s trial %d: success=%s failure=%s", m.name, i, result.success, result.failure)
    config = cfg.echo()
    config["scene"] = inputs.bundle.to_dict()
    config["calibration"] = inputs.calibration.to_dict()
    run = {"base_seed": cfg.base_seed, "seeds": [cfg.base_seed + i for i in range(cfg.trials_per_method)]}
    return ExperimentReport(config, run, list(cfg.methods), records)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

class ReportWriteError(OSError):
    """Writing the report failed part way; ``written`` lists the files already on disk."""

    def __init__(self, message: str, written: Sequence[Path]):
        super().__init__(message)
        self.written = list(written)


def summary_table(report: ExperimentReport) -> str:
    rates = report.success_rates()
    header = f"{'method':<14}{'affordance':>11}{'hybrid':>8}{'dual_arm':>10}{'success':>10}{'rate':>7}  failures"
    lines = [header, "-" * len(header)]
    for m in report.methods:
        recs = report.method_records(m.name)
        rate = "n/a" if rates[m.name] is None else f"{rates[m.name]:.2f}"
        fails = Counter(r.result.failure for r in recs if r.result.failure)
        fail_txt = ", ".join(f"{k}={v}" for k, v in sorted(fails.items())) or "-"
        lines.append(f"{m.name:<14}{'yes':>11}{'yes' if m.hybrid else 'no':>8}{'yes' if m.dual_arm else 'no':>10}"
                     f"{sum(r.result.success for r in recs):>6}/{len(recs):<3}{rate:>7}  {fail_txt}")
    return "\n".join(lines) + "\n"


def deviation_csv(records: Sequence[TrialRecord]) -> str:
    curves = np.array([r.curve for r in records])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "mean", "max"] + [f"trial_{r.trial}" for r in records])
    for k in range(N_SAMPLES):
        t = NORMALIZED_DURATION if k == N_SAMPLES - 1 else k * RESAMPLE_STEP
        col = curves[:, k]
        w.writerow([f"{t:.1f}", repr(float(col.mean())), repr(float(col.max()))] + [repr(float(v)) for v in col])
    return buf.getvalue()


def emit_report(report: ExperimentReport, out_dir) -> List[Path]:
    """Write ``report.json``, ``summary.txt`` and one ``deviation_<method>.csv`` per method with trials."""
    out = Path(out_dir)
    written: List[Path] = []
    files = [("report.json", report.to_json()), ("summary.txt", summary_table(report))]
    for m in report.methods:
        recs = report.method_records(m.name)
        if recs:
            files.append((f"deviation_{m.name}.csv", deviation_csv(recs)))
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files:
            path = out / name
            path.write_text(text)
            written.append(path)
    except OSError as exc:
        raise ReportWriteError(f"could not write report into {out}: {exc}", written) from exc
    return written
