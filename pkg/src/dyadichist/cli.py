"""Command-line front end: fit, stream, dist, simulate, and check.

Exit codes: 0 success, 1 usage/spec error, 2 data error, 3 numerical or
capacity error.  All outputs go to standard output; diagnostics to standard
error.  Decimal formatting always uses the dot separator.
"""

from __future__ import annotations

import argparse
import json
import sys
try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .core import DiscreteMeasure, ModelConfig, discretize, fit_batch
from .errors import (
    CapacityError,
    ConsistencyError,
    DataFormatError,
    DegenerateHistogramError,
    DomainError,
    ImproperPosteriorError,
    NumericalError,
)
from .hist_io import (
    FORMAT_VERSION,
    histogram_to_json,
    load_histogram,
    parse_point_line,
    read_points_csv,
)
from .distributions import parse_ground_truth
from .selfcheck import SUITES, run_suites
from .simulate import ExperimentSpec, results_to_csv, results_to_json, run_experiment
from .streaming import StreamConfig, new_stream
from .wasserstein import (
    DiscreteMassOracle,
    HistogramMassOracle,
    multires_bound,
    ot_discrete,
    quantile_of_discrete,
    quantile_of_histogram,
    wasserstein_1d,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    """argparse with the usage-error exit code pinned to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parse_prior(text: str):
    if text == "zero" or text == "auto":
        return text
    if text.startswith("const:"):
        try:
            value = float(text[6:])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad prior constant in {text!r}") from None
        if value < 0:
            raise argparse.ArgumentTypeError("prior constant must be >= 0")
        return value
    raise argparse.ArgumentTypeError(f"prior must be zero, auto or const:c, got {text!r}")


def _parse_int_list(text: str):
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def _build_parser() -> _Parser:
    from . import __version__

    parser = _Parser(prog="dyadichist", description=__doc__)
    parser.add_argument(
        "--version",
        action="version",
        version=f"dyadichist {__version__} (histogram format {FORMAT_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a histogram to a points CSV file")
    fit.add_argument("--in", dest="infile", required=True)
    fit.add_argument("--d", type=int, required=True)
    fit.add_argument("--v", type=float, required=True)
    fit.add_argument("--p", type=float, default=2.0)
    fit.add_argument("--depth", type=int, default=None)
    fit.add_argument("--prior", type=_parse_prior, default="zero")
    fit.set_defaults(func=_cmd_fit)

    stream = sub.add_parser("stream", help="stream points from stdin, emit JSON snapshots")
    stream.add_argument("--cap", type=int, required=True)
    stream.add_argument("--d", type=int, required=True)
    stream.add_argument("--v", type=float, required=True)
    stream.add_argument("--p", type=float, default=2.0)
    stream.add_argument("--prior", type=_parse_prior, default="zero")
    stream.add_argument("--emit-every", type=int, default=0)
    stream.set_defaults(func=_cmd_stream)

    dist = sub.add_parser("dist", help="Wasserstein distance between two measure files")
    dist.add_argument("--a", required=True)
    dist.add_argument("--b", required=True)
    dist.add_argument("--v", type=float, required=True)
    dist.add_argument("--p", type=float, default=2.0)
    dist.add_argument("--as", dest="as_kind", choices=("points", "hist"), default=None)
    mode = dist.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exact-1d", action="store_true")
    mode.add_argument("--discrete", action="store_true")
    mode.add_argument("--bound", type=int, metavar="K", default=None)
    dist.set_defaults(func=_cmd_dist)

    sim = sub.add_parser("simulate", help="run a Monte-Carlo error-curve experiment")
    sim.add_argument("--spec", default=None, help="TOML key/value experiment file")
    sim.add_argument("--gt", default=None, help="e.g. uniform:1, beta:0.9, split:2,0.27")
    sim.add_argument("--v", type=float, default=None)
    sim.add_argument("--p", type=float, default=2.0)
    sim.add_argument("--log2n", type=_parse_int_list, default=(2, 4, 6, 8, 10, 12))
    sim.add_argument("--reps", type=int, default=100)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--estimators", default=None, help="comma-separated estimator names")
    sim.add_argument("--m", type=int, default=1000, help="truth discretization size (d >= 2)")
    sim.add_argument("--threads", type=int, default=1)
    sim.add_argument("--json", default=None, help="also write a JSON mirror to this path")
    sim.set_defaults(func=_cmd_simulate)

    check = sub.add_parser("check", help="run the built-in property suites")
    check.add_argument("--suite", action="append", choices=sorted(SUITES), default=None)
    check.set_defaults(func=_cmd_check)

    return parser


def _cmd_fit(args) -> int:
    points = read_points_csv(args.infile, d=args.d)
    if points.size == 0:
        points = points.reshape(0, args.d)
    config = ModelConfig(d=args.d, v=args.v, p=args.p, depth=args.depth, prior=args.prior)
    hist = fit_batch(points, config)
    print(json.dumps(histogram_to_json(hist)))
    return EXIT_OK


def _cmd_stream(args) -> int:
    config = StreamConfig(M=args.cap, d=args.d, v=args.v, p=args.p, prior=args.prior)
    counter = new_stream(config)
    emitted_at = -1
    for lineno, line in enumerate(sys.stdin, start=1):
        if not line.strip():
            continue
        coords = parse_point_line(line, lineno, args.d)
        counter.push(np.asarray(coords))
        if args.emit_every > 0 and counter.r % args.emit_every == 0:
            print(json.dumps(histogram_to_json(counter.current_estimate())))
            emitted_at = counter.r
    if counter.r > 0 and counter.r != emitted_at:
        print(json.dumps(histogram_to_json(counter.current_estimate())))
    return EXIT_OK


def _load_measure(path: str, as_kind):
    kind = as_kind
    if kind is None:
        if path.endswith(".json"):
            kind = "hist"
        elif path.endswith(".csv"):
            kind = "points"
        else:
            raise DataFormatError(f"cannot detect the kind of {path!r}; pass --as")
    if kind == "hist":
        return "hist", load_histogram(path)
    points = read_points_csv(path)
    if points.shape[0] == 0:
        raise DataFormatError(f"points file {path!r} is empty")
    return "points", DiscreteMeasure.empirical(points)


def _cmd_dist(args) -> int:
    kind_a, obj_a = _load_measure(args.a, args.as_kind)
    kind_b, obj_b = _load_measure(args.b, args.as_kind)
    dim_a = obj_a.d if kind_a == "hist" else obj_a.atoms.shape[1]
    dim_b = obj_b.d if kind_b == "hist" else obj_b.atoms.shape[1]
    if dim_a != dim_b:
        raise DataFormatError(f"dimension mismatch: {dim_a} vs {dim_b}")
    if args.exact_1d:
        if dim_a != 1:
            raise DataFormatError("--exact-1d needs one-dimensional inputs")
        qa = quantile_of_histogram(obj_a) if kind_a == "hist" else quantile_of_discrete(obj_a)
        qb = quantile_of_histogram(obj_b) if kind_b == "hist" else quantile_of_discrete(obj_b)
        value = wasserstein_1d(qa, qb, args.v)
    elif args.discrete:
        ma = discretize(obj_a) if kind_a == "hist" else obj_a
        mb = discretize(obj_b) if kind_b == "hist" else obj_b
        value = ot_discrete(ma, mb, args.v, args.p)
    else:
        oa = HistogramMassOracle(obj_a) if kind_a == "hist" else DiscreteMassOracle(obj_a)
        ob = HistogramMassOracle(obj_b) if kind_b == "hist" else DiscreteMassOracle(obj_b)
        value = multires_bound(oa, ob, args.bound, args.v, args.p, dim_a)
    print(f"{value:.12g}")
    return EXIT_OK


def _spec_from_args(args) -> ExperimentSpec:
    fields = {
        "gt": args.gt,
        "v": args.v,
        "p": args.p,
        "log2_n_list": args.log2n,
        "reps": args.reps,
        "seed": args.seed,
        "estimators": args.estimators,
        "truth_discretization_m": args.m,
    }
    if args.spec is not None:
        with open(args.spec, "rb") as fh:
            try:
                file_fields = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ValueError(f"bad spec file: {exc}") from exc
        for key in file_fields:
            if key not in fields:
                raise ValueError(f"unknown spec key {key!r}")
        fields.update(file_fields)
    if fields["gt"] is None or fields["v"] is None:
        raise ValueError("an experiment needs at least gt and v (flags or spec file)")
    if isinstance(fields["gt"], str):
        fields["gt"] = parse_ground_truth(fields["gt"])
    ests = fields["estimators"]
    if ests is None:
        from .simulate import ESTIMATORS

        ests = ESTIMATORS
    elif isinstance(ests, str):
        ests = tuple(part.strip() for part in ests.split(","))
    fields["estimators"] = tuple(ests)
    fields["log2_n_list"] = tuple(fields["log2_n_list"])
    return ExperimentSpec(**fields)


def _cmd_simulate(args) -> int:
    try:
        spec = _spec_from_args(args)
    except (ValueError, OSError) as exc:
        print(f"dyadichist simulate: invalid spec: {exc}", file=sys.stderr)
        return EXIT_USAGE
    result = run_experiment(spec, threads=max(1, args.threads))
    sys.stdout.write(results_to_csv(result))
    if args.json is not None:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(results_to_json(result))
    return EXIT_OK


def _cmd_check(args) -> int:
    report = run_suites(args.suite)
    all_ok = True
    for name, passed, message in report:
        all_ok &= passed
        print(f"{name}: {'PASS' if passed else 'FAIL'} - {message}")
    return EXIT_OK if all_ok else EXIT_NUMERIC


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (DataFormatError, DomainError, ConsistencyError) as exc:
        print(f"dyadichist: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (
        CapacityError,
        NumericalError,
        ImproperPosteriorError,
        DegenerateHistogramError,
    ) as exc:
        print(f"dyadichist: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"dyadichist: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
