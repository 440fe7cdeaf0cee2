"""
norms - estimate probes on the X^{s,b,1} scale
"""

import argparse

from kdvlab.experiments.norm_probes import NormProbeConfig, ProbeKind, run_norm_probes


def register(subparsers):
    parser = subparsers.add_parser("norms", help="Seeded ensembles through the norm and estimate probes")
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--s", type=float, default=None, help="Regularity index")
    parser.add_argument("--kinds", nargs="+", default=None, choices=[kind.value for kind in ProbeKind])
    parser.add_argument("--ensemble-size", type=int, default=None)
    parser.add_argument("--n-points", type=int, default=None)
    parser.add_argument("--n-t", type=int, default=None)
    parser.add_argument("--refinement-check", action="store_true", help="Repeat the ratio probes at doubled resolution")
    parser.add_argument("--output", default=None)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    values = {
        "seed": args.seed,
        "s": args.s,
        "kinds": args.kinds,
        "ensemble_size": args.ensemble_size,
        "n_points": args.n_points,
        "n_t": args.n_t,
        "output": args.output,
    }
    cfg = NormProbeConfig(**{key: value for key, value in values.items() if value is not None})
    run_norm_probes(cfg, check_refinement=args.refinement_check)
    return 0
