"""Command line: distances, means, tests, studies, landmarks, Hopf charts.

Subcommands
-----------
distance   shape distance between two configuration files (12 digits)
mean       Fréchet mean of a sample file: mean CSV plus diagnostics JSON
test       two-sample test: TestOutcome JSON on stdout (optionally a file)
simulate   level/power study from a JSON config: result CSV + power curves
landmarks  five-landmark extraction from polylines: CSV + audit JSON
hopf       unit-sphere chart coordinates of three-landmark planar samples

Exit codes: 0 success, 2 numerical failure (singular covariance or a cut
locus hit), 64 usage error, 65 malformed data or unreadable file.  Seeds
come from explicit flags only; no environment variables are consulted.
"""

import argparse
import json
import os
import sys

import numpy as np

from .errors import (
    AntipodalPointError,
    ShapeSpacesError,
    SingularCovarianceError,
)
from .filaments import extract_landmarks, ingest_polylines
from .frechet import frechet_mean
from .geometry import to_preshape
from .io import (
    format_float,
    read_configuration,
    read_samples,
    write_configuration,
    write_json,
    write_samples,
)
from .simulation import (
    StudyConfig,
    emit_power_curve,
    emit_table,
    run_level_power_study,
)
from .spaces import hopf_from_preshape, shape_distance
from .twosample import (
    VARIANTS,
    bootstrap_test,
    test_individual_asymmetric,
    test_individual_lifting,
    test_pooled_intrinsic,
    test_pooled_lifting,
)

USAGE_ERROR = 64
DATA_ERROR = 65
NUMERICAL_ERROR = 2

QUANTILE_TESTS = {
    "pooled_tangent": test_pooled_lifting,
    "pooled_intrinsic": test_pooled_intrinsic,
    "individual": test_individual_lifting,
    "individual_asymmetric": test_individual_asymmetric,
}


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with exit code 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


KIND_CHOICES = ("rotation", "reflection", "rr", "reverse_labeling_reflection")


def _kind_flag(parser):
    parser.add_argument(
        "--kind",
        choices=KIND_CHOICES,
        default="rr",
        help="shape space: rotation, reflection, or rr (reverse-labeling reflection)",
    )


def build_parser():
    parser = _Parser(prog="shapespaces", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("distance", help="shape distance between two configurations")
    p.add_argument("first", help="configuration CSV or JSON")
    p.add_argument("second", help="configuration CSV or JSON")
    _kind_flag(p)

    p = commands.add_parser("mean", help="Fréchet mean of a sample collection")
    p.add_argument("samples", help="sample collection CSV or JSON")
    _kind_flag(p)
    p.add_argument("--tol", type=float, default=1e-9, help="tangent residual tolerance")
    p.add_argument("--max-iter", type=int, default=200, help="iteration cap")
    p.add_argument("--mean", required=True, help="output CSV for the mean configuration")
    p.add_argument("--report", required=True, help="output JSON for the diagnostics")

    p = commands.add_parser("test", help="two-sample test for equal shape means")
    p.add_argument("first", help="sample collection for the first group")
    p.add_argument("second", help="sample collection for the second group")
    _kind_flag(p)
    p.add_argument("--variant", choices=VARIANTS, default="pooled_intrinsic")
    p.add_argument(
        "--method",
        choices=("bootstrap", "quantile"),
        default="bootstrap",
        help="bootstrap calibration (default) or the Hotelling quantile",
    )
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--bootstrap-B", type=int, default=1000, dest="bootstrap_b")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="optional JSON output path")

    p = commands.add_parser("simulate", help="level/power study from a JSON config")
    p.add_argument("config", help="StudyConfig JSON file")
    p.add_argument("--table", required=True, help="output CSV of rejection tallies")
    p.add_argument("--curve", help="optional CSV of rate-vs-separation series")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--replicates", type=int, help="override the replicate count")
    p.add_argument("--bootstrap-B", type=int, dest="bootstrap_b", help="override B")
    p.add_argument("--alpha", type=float, help="override the level")
    p.add_argument("--noise-sd", type=float, dest="noise_sd", help="override the noise")
    p.add_argument("--kind", choices=KIND_CHOICES, help="override the shape space kind")
    p.add_argument(
        "--include-quantile",
        action="store_true",
        help="also tally the quantile-calibrated versions",
    )
    p.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count() or 1,
        help="parallel replicate workers (default: available cores)",
    )
    p.add_argument(
        "--strict",
        action="store_true",
        help="force sequential reduction for bit-exact output",
    )

    p = commands.add_parser("landmarks", help="five-landmark extraction from polylines")
    p.add_argument("curves", help="polyline CSV (curve_id,x,y) or JSON")
    p.add_argument("--step", type=float, help="resampling step (default: length/200)")
    p.add_argument("--max-shift", type=float, default=0.15, dest="max_shift")
    p.add_argument("--landmarks", required=True, help="output CSV of 2x5 configurations")
    p.add_argument("--audit", required=True, help="output JSON of indices/scores/shifts")

    p = commands.add_parser("hopf", help="unit-sphere chart of three-landmark samples")
    p.add_argument("samples", help="sample collection of planar triangles")
    p.add_argument("--output", required=True, help="output CSV of x,y,z rows")

    return parser


def cmd_distance(args):
    first = read_configuration(args.first)
    second = read_configuration(args.second)
    value = shape_distance(to_preshape(first), to_preshape(second), args.kind)
    print(f"{value:.12f}")
    return 0


def cmd_mean(args):
    samples = [to_preshape(c) for c in read_samples(args.samples)]
    result = frechet_mean(samples, args.kind, tol=args.tol, max_iter=args.max_iter)
    write_configuration(args.mean, result.mean)
    write_json(
        args.report,
        {
            "mean": result.mean.T.tolist(),
            "iterations": result.iterations,
            "residual": result.residual,
            "value": result.value,
            "unique_alignments": result.unique_alignments,
            "converged": result.converged,
            "kind": args.kind,
            "samples": len(samples),
        },
    )
    return 0


def cmd_test(args):
    w = np.stack([to_preshape(c) for c in read_samples(args.first)])
    z = np.stack([to_preshape(c) for c in read_samples(args.second)])
    if args.method == "bootstrap":
        outcome = bootstrap_test(
            w, z, args.kind,
            alpha=args.alpha, B=args.bootstrap_b,
            variant=args.variant, seed=args.seed,
        )
    else:
        outcome = QUANTILE_TESTS[args.variant](w, z, args.kind, alpha=args.alpha)
    payload = outcome.to_json()
    print(json.dumps(payload, indent=2))
    if args.output:
        write_json(args.output, payload)
    return 0


def cmd_simulate(args):
    cfg = StudyConfig.from_file(
        args.config,
        seed=args.seed,
        replicates=args.replicates,
        bootstrap_B=args.bootstrap_b,
        alpha=args.alpha,
        noise_sd=args.noise_sd,
        kind=args.kind,
    )
    threads = 1 if args.strict else max(1, args.threads)
    result = run_level_power_study(
        cfg, threads=threads, include_quantile=args.include_quantile
    )
    emit_table(result, args.table)
    if args.curve:
        emit_power_curve(result, args.curve)
    return 0


def cmd_landmarks(args):
    curves = ingest_polylines(args.curves)
    marks = []
    audits = []
    for index, polyline in enumerate(curves):
        landmark_set, audit = extract_landmarks(
            polyline, step=args.step, max_shift=args.max_shift
        )
        marks.append(landmark_set.configuration)
        audit["curve"] = index
        audits.append(audit)
    write_samples(args.landmarks, marks)
    write_json(args.audit, {"curves": audits})
    return 0


def cmd_hopf(args):
    lines = ["x,y,z"]
    for config in read_samples(args.samples):
        point = hopf_from_preshape(to_preshape(config))
        lines.append(",".join(format_float(v) for v in point))
    with open(args.output, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return 0


HANDLERS = {
    "distance": cmd_distance,
    "mean": cmd_mean,
    "test": cmd_test,
    "simulate": cmd_simulate,
    "landmarks": cmd_landmarks,
    "hopf": cmd_hopf,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return HANDLERS[args.command](args)
    except (SingularCovarianceError, AntipodalPointError) as exc:
        print(f"shapespaces {args.command}: numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except (ShapeSpacesError, OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"shapespaces {args.command}: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
