"""Command-line entry point: ``sim run|grasps|direction|trial``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, load_scene
from .disassembly_affordance import estimate_disassembly_direction, required_extraction_force
from .grasp_affordance import write_candidates
from .hand_pose import Calibration, read_trajectory
from .harness import ExperimentConfig, ReportWriteError, emit_report, normalized_deviation, run_experiment, summary_table
from .impedance_control import HYBRID, POSITION_ONLY
from .sim_core import ControllerConfig, NoiseModel, run_trial

log = logging.getLogger("dualdisasm")

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3


def _setup_logging():
    level = os.environ.get("SIM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def cmd_run(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    out = Path(args.out) if args.out else cfg.output_dir
    report = run_experiment(cfg, jobs=args.jobs)
    emit_report(report, out)
    sys.stdout.write(summary_table(report))
    return EXIT_OK


def cmd_grasps(args) -> int:
    bundle = load_scene(args.scene)
    write_candidates(bundle.scene.candidates, args.out)
    print(f"{len(bundle.scene.candidates)} candidates written to {args.out}")
    return EXIT_OK


def cmd_direction(args) -> int:
    bundle = load_scene(args.scene, candidates=False)
    hooks = bundle.scene.hooks
    d = estimate_disassembly_direction(hooks)
    origin = sum(h.anchor for h in hooks) / len(hooks)
    out = {"origin": origin.tolist(), "direction": d.tolist(),
           "hooks": [{"anchor": h.anchor.tolist(), "extraction_axis": h.extraction_axis.tolist(),
                      "required_force": required_extraction_force(h)} for h in hooks]}
    print(json.dumps(out, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_trial(args) -> int:
    bundle = load_scene(args.scene)
    cal = Calibration.load(args.calibration) if args.calibration else Calibration.identity()
    try:
        frames = read_trajectory(args.trajectory)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{args.trajectory}: {exc}") from exc
    ctrl = ControllerConfig(HYBRID if args.mode == "hybrid" else POSITION_ONLY, bundle.controller)
    result = run_trial(bundle.scene, frames, cal, ctrl, args.arms == "dual", NoiseModel(args.seed, args.noise),
                       bundle.options)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = {"scene": bundle.to_dict(), "mode": args.mode, "arms": args.arms, "seed": args.seed,
              "noise_sigma": args.noise, "result": result.summary(),
              "normalized_max_deviation": float(normalized_deviation(result).max())}
    (out / "trial.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    with open(out / "trial.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "y", "z", "qx", "qy", "qz", "qw", "deviation"])
        for rec in result.deviation_series:
            w.writerow([repr(float(v)) for v in (rec.t, *rec.pose.position, *rec.pose.orientation, rec.deviation)])
    print(json.dumps(result.summary(), sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sim", description="Simulated affordance-guided dual-arm disassembly.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a multi-method experiment and write reports")
    r.add_argument("--config", required=True)
    r.add_argument("--out", help="report directory (default: output_dir from the config)")
    r.add_argument("--seed", type=int, help="override base_seed")
    r.add_argument("--jobs", type=int, default=1, help="parallel trial workers")
    r.set_defaults(func=cmd_run)

    g = sub.add_parser("grasps", help="export collision-free grasp candidates for the scene part")
    g.add_argument("--scene", required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_grasps)

    d = sub.add_parser("direction", help="estimate the disassembly direction from the scene hooks")
    d.add_argument("--scene", required=True)
    d.set_defaults(func=cmd_direction)

    t = sub.add_parser("trial", help="replay one demonstration")
    t.add_argument("--scene", required=True)
    t.add_argument("--trajectory", required=True)
    t.add_argument("--calibration", help="camera-to-robot calibration JSON (default: identity)")
    t.add_argument("--mode", choices=("hybrid", "position"), default="hybrid")
    t.add_argument("--arms", choices=("dual", "single"), default="dual")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--noise", type=float, default=0.0, help="hand position noise sigma (m)")
    t.add_argument("--out", default=".", help="directory for trial.json and trial.csv")
    t.set_defaults(func=cmd_trial)
    return p


def main(argv=None) -> int:
    """Invalid content exits 2 (every validation error is a ValueError), unreadable or unwritable files exit 3."""
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ReportWriteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for path in exc.written:
            print(f"  written: {path}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
