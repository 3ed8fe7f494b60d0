"""The three-method comparison on the reference corpus, with deviation curves.

Writes the same report files as ``sim run`` into ``results/`` and prints the
success table and the mean normalized deviation at a few time marks.

    python3 demos/method_comparison.py [--jobs N]
"""

import argparse
from pathlib import Path

from dualdisasm.harness import ExperimentConfig, emit_report, run_experiment, summary_table

REF = Path(__file__).resolve().parents[1] / "fixtures" / "reference"

ap = argparse.ArgumentParser()
ap.add_argument("--jobs", type=int, default=1)
ap.add_argument("--out", default="results")
args = ap.parse_args()

cfg = ExperimentConfig.load(REF / "experiment.json")
report = run_experiment(cfg, jobs=args.jobs)
for path in emit_report(report, args.out):
    print("wrote", path)
print()
print(summary_table(report))

marks = [0, 40, 80, 120, 160]
print("mean deviation (m + rad) at normalized t =", ", ".join(f"{k / 10:.0f} s" for k in marks))
for entry in report.to_dict()["methods"]:
    curve = entry["deviation_curve"]["mean"]
    print(f"  {entry['name']:<11}", "  ".join(f"{curve[k]:.4f}" for k in marks))
