"""
audit - re-fit the decay from an existing trajectory CSV
"""

import argparse
from pathlib import Path

from kdvlab.core.errors import ConfigError
from kdvlab.experiments.io import write_json
from kdvlab.experiments.scenario import audit_trajectory


def register(subparsers):
    parser = subparsers.add_parser("audit", help="Recompute N(n) and the decay fit from trajectory.csv")
    parser.add_argument("trajectory", type=Path)
    parser.add_argument("--delta", type=float, default=1.0, help="Segment length used by the run")
    parser.add_argument("--output", type=Path, default=None, help="Report path (default: audit_refit.json next to the trajectory)")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    if not args.trajectory.is_file():
        raise ConfigError(f"trajectory file {args.trajectory} not found")
    report = audit_trajectory(args.trajectory, args.delta)
    output = args.output or args.trajectory.with_name("audit_refit.json")
    write_json(output, report)
    print(report.model_dump_json(indent=2))
    return 0
