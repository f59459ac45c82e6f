"""Command-line interface.

Every stage of the pipeline is runnable on its own (``ingest``, ``space``,
``rashomon``, ``pvi``, ``viod``), ``run`` executes the whole workflow, and
``report`` re-emits the summary files from an existing run directory.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import validate_config
from .errors import ConfigError, PipelineStageError
from .pipeline import format_summary, report_from_dir, run_pipeline

_STAGE_COMMANDS = {
    "run": "viod",
    "ingest": "ingest",
    "space": "space",
    "rashomon": "rashomon",
    "pvi": "pvi",
    "viod": "viod",
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="path to the JSON run config")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("--workers", type=int, default=1,
                        help="worker pool size; never affects results")
    parser.add_argument("--seed", type=int, default=None,
                        help="master seed (overrides config)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rashomon-vi",
        description="Rashomon-set variable-importance analysis over tuned tree ensembles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "run": "full pipeline: ingest, model space, Rashomon set, PVI, VIOD",
        "ingest": "load/synthesize the datasets and dump them as CSV",
        "space": "build and persist the tuned model space",
        "rashomon": "extract the Rashomon set and write its summary",
        "pvi": "compute permutation variable importance over the set",
        "viod": "compute rank-discrepancy (Kendall tau / VIOD) reports",
    }
    for name, stage_help in helps.items():
        _add_common(sub.add_parser(name, help=stage_help))
    report = sub.add_parser("report", help="re-emit summary files from a run directory")
    report.add_argument("--out", required=True, help="existing run directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            summary = report_from_dir(args.out)
            text = format_summary(summary)
            if text:
                print(text)
            return 0
        cfg = validate_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, master_seed=args.seed)
        out = Path(args.out) if args.out is not None else Path(cfg.out_dir)
        summary = run_pipeline(
            cfg, out_dir=out, workers=args.workers, until=_STAGE_COMMANDS[args.command]
        )
        text = format_summary(summary)
        if text:
            print(text)
        print(f"artifacts written to {out}")
        return 0
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 2
    except PipelineStageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
