"""
spectrum - dense spectral survey of A_a
"""

import argparse

from kdvlab.experiments.spectrum_survey import SpectrumSurveyConfig, run_spectrum_survey


def register(subparsers):
    parser = subparsers.add_parser("spectrum", help="Eigenvalues of A_a over a sweep of weights and speeds")
    parser.add_argument("--weights", type=float, nargs="*", default=None, help="Weights a (empty for no rows)")
    parser.add_argument("--speeds", type=float, nargs="*", default=None, help="Speeds c")
    parser.add_argument("--half-length", type=float, default=None)
    parser.add_argument("--n-points", type=int, default=None)
    parser.add_argument("--output", default=None)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    values = {
        "weights": args.weights,
        "speeds": args.speeds,
        "half_length": args.half_length,
        "n_points": args.n_points,
        "output": args.output,
    }
    cfg = SpectrumSurveyConfig(**{key: value for key, value in values.items() if value is not None})
    run_spectrum_survey(cfg)
    return 0
