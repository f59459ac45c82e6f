"""
OULAD: which demographics matter, and do the models agree?
==========================================================

Runs the analysis on the Open University Learning Analytics Dataset
(demographics from studentInfo.csv, courses AAA/BBB/DDD/EEE). The
dataset is not bundled; point RASHOMON_OULAD_DIR at a directory
containing studentInfo.csv, or place it under data/oulad.

This demo uses a reduced search budget so it finishes in a couple of
minutes; the acceptance suite runs the full 424-model space.
"""

import os
import sys
import tempfile
from pathlib import Path

from rashomon_vi import format_summary, parse_config, run_pipeline

candidates = []
if os.environ.get("RASHOMON_OULAD_DIR"):
    candidates.append(Path(os.environ["RASHOMON_OULAD_DIR"]))
candidates.append(Path(__file__).resolve().parent.parent / "data" / "oulad")
oulad = next((c for c in candidates if (c / "studentInfo.csv").exists()), None)

if oulad is None:
    print("OULAD not found. Download the dataset (CC-BY 4.0) from")
    print("  https://analyse.kmi.open.ac.uk/open-dataset")
    print("and set RASHOMON_OULAD_DIR to the directory holding studentInfo.csv.")
    sys.exit(0)

cfg = parse_config(
    {
        "data": {"source": "oulad", "oulad_dir": str(oulad),
                 "courses": ["AAA", "BBB", "DDD", "EEE"]},
        "master_seed": 101,
        "search": {"n_random": 24, "bayes": {"n_iter": 4, "n_init": 4}},
        "pvi_repeats": 10,
    }
)

out = Path(tempfile.mkdtemp(prefix="rashomon-oulad-")) / "run"
print(f"running {cfg.search.total_models()} models x 8 combinations...")
summary = run_pipeline(cfg, out_dir=out, workers=os.cpu_count() or 1)

print()
print(format_summary(summary))
print(f"\nartifacts under {out}")

# The headline contrast: binary setups tend to agree on the ordering
# more than multiclass ones (lower VIOD / mean tau for multiclass).
print("\nbinary vs multiclass mean tau per course:")
taus = {}
for combo in summary["combos"]:
    taus[(combo["setup"], combo["course"])] = combo.get("mean_tau")
for course in ("AAA", "BBB", "DDD", "EEE"):
    b, m = taus.get(("binary", course)), taus.get(("multiclass", course))
    if b is not None and m is not None:
        print(f"  {course}: binary {b:+.3f} vs multiclass {m:+.3f}")
