"""
simulate - asymptotic stability scenario
"""

import argparse
from pathlib import Path

from loguru import logger

from kdvlab.experiments.scenario import load_scenario_config, run_stability_scenario

# flag -> ScenarioConfig field, parsed type
FLAGS = {
    "c0": float,
    "a": float,
    "epsilon": float,
    "shape": str,
    "shape_center": float,
    "half_length": float,
    "n_points": int,
    "dt": float,
    "t_final": float,
    "delta": float,
    "sample_stride": int,
    "scheme": str,
    "max_reprojections": int,
    "output": str,
    "seed": int,
}


def register(subparsers):
    parser = subparsers.add_parser("simulate", help="Run a stability scenario and write trajectory.csv and audit.json")
    parser.add_argument("--config", type=Path, default=None, help="Flat key=value file with ScenarioConfig fields")
    for name, kind in FLAGS.items():
        parser.add_argument(f"--{name.replace('_', '-')}", dest=name, type=kind, default=None)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    overrides = {name: getattr(args, name) for name in FLAGS}
    cfg = load_scenario_config(args.config, **overrides)
    audit = run_stability_scenario(cfg)
    if not audit.ok:
        logger.error(f"Run failed: {audit.failure}")
        return 2
    logger.info(f"Outputs written to {cfg.output}")
    return 0
