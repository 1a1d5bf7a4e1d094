"""Run subcommand implementation."""

from __future__ import annotations

import sys
from pathlib import Path

from ..exceptions import TSplineBPXError
from ..experiments import run_experiment
from ..renderers import render_report
from ..serializers import load_config_json


def run_run(config_path: Path, *, output_dir: Path | None, svg: bool) -> int:
    try:
        config = load_config_json(config_path)
    except FileNotFoundError:
        print(f"Error: file not found: {config_path}", file=sys.stderr)
        return 1
    except TSplineBPXError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"Error reading file: {exc}", file=sys.stderr)
        return 1

    updates: dict[str, object] = {}
    if output_dir is not None:
        updates["output_dir"] = str(output_dir)
    if svg:
        updates["svg"] = True
    if updates:
        config = config.model_copy(update=updates)

    try:
        report = run_experiment(config)
    except TSplineBPXError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"Error writing results: {exc}", file=sys.stderr)
        return 1

    print(render_report(report))
    if config.output_dir:
        print(f"Results written to {config.output_dir}")
    if report.deviation is not None and not report.deviation.passed:
        return 1
    return 0
