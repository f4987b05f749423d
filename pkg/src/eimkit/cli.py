"""Command-line entry point.

Exit status: 0 on success, 1 on usage errors, 2 on data or numerical
errors. Diagnostics go to stderr; results go to stdout or ``--out``.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .errors import EimkitError
from .evaluation import approximation, evaluate_symmetric, interpolation_report
from .geim import LinearFormDictionary, geim_build, geim_discard, geim_reconstruct
from .greedy import GreedyConfig, build
from .harness import (
    DEFAULT_N_EVAL,
    DEFAULT_RANK,
    DEFAULT_TRAIN_NX,
    DEFAULT_TRAIN_NY,
    DEFAULT_TRAIN_SEED,
    run_paper_experiment,
)
from .linalg import DEFAULT_CUTOFF_REL
from .model import (
    INNER_NORMS,
    NORM_VARIANTS,
    GeimModel,
    NormSpec,
    RectangularModel,
    SeparatedModel,
    deserialize_model,
    ingest_snapshots,
    model_to_dict,
    read_matrix_csv,
    write_snapshots,
)
from .rectangular import discard

log = logging.getLogger("eimkit")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _cell(text):
    vals = _int_list(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected I,J, got {text!r}")
    return vals


def _default_threads():
    env = os.environ.get("EIMKIT_THREADS")
    if env is None:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        raise UsageError(f"EIMKIT_THREADS must be an integer, got {env!r}") from None


def _add_norm_flags(p):
    p.add_argument("--dmax", type=int, required=True, help="maximum number of couples")
    p.add_argument("--norm", choices=NORM_VARIANTS, default="linf-joint", help="selection variant")
    p.add_argument("--inner-norm", choices=INNER_NORMS, default="linf", help="norm ranking rows/columns")
    p.add_argument("--weights", help="CSV weight matrix for --inner-norm weighted")
    p.add_argument("--tol", type=float, default=None, help="absolute pivot tolerance (default 1e-12*max|A|)")


def _parser():
    parser = _Parser(prog="eimkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"eimkit {__version__}")
    parser.add_argument("--threads", type=int, default=None, help="worker cap (fallback: EIMKIT_THREADS)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", help="greedy square model from a snapshot CSV")
    p.add_argument("--snapshots", required=True)
    _add_norm_flags(p)
    p.add_argument("--out")

    p = sub.add_parser("evaluate", help="evaluate a model on the snapshot grid")
    p.add_argument("--model", required=True)
    p.add_argument("--snapshots", required=True)
    p.add_argument("--cell", type=_cell, help="single cell I,J (0-based)")
    p.add_argument("--out")

    p = sub.add_parser("discard", help="rectangular model after dropping selected points")
    p.add_argument("--model", required=True)
    p.add_argument("--snapshots", required=True)
    p.add_argument("--drop", type=_int_list, required=True, help="0-based positions, e.g. 2,5")
    p.add_argument("--side", choices=("y", "x"), default="y")
    p.add_argument("--cutoff", type=float, default=DEFAULT_CUTOFF_REL)
    p.add_argument("--out")

    p = sub.add_parser("geim-build", help="generalized model from a library and a dictionary")
    p.add_argument("--library", required=True, help="CSV, one function per row (P x G)")
    p.add_argument("--dictionary", required=True, help="CSV, one linear form per row (S x G)")
    _add_norm_flags(p)
    p.add_argument("--out")

    p = sub.add_parser("geim-reconstruct", help="reconstruct a function from its measurements")
    p.add_argument("--model", required=True)
    p.add_argument("--measurements", required=True, help="comma-separated values or a CSV file")
    p.add_argument("--drop", type=_int_list, default=[], help="failed form positions")
    p.add_argument("--cutoff", type=float, default=DEFAULT_CUTOFF_REL)
    p.add_argument("--out")

    p = sub.add_parser("paper-experiment", help="pair-discard study on cos((v.x)y)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-eval", type=int, default=DEFAULT_N_EVAL)
    p.add_argument("--train-nx", type=int, default=DEFAULT_TRAIN_NX)
    p.add_argument("--train-ny", type=int, default=DEFAULT_TRAIN_NY)
    p.add_argument("--train-seed", type=int, default=DEFAULT_TRAIN_SEED)
    p.add_argument("--rank", type=int, default=DEFAULT_RANK)
    p.add_argument("--side", choices=("x", "y"), default="x")
    p.add_argument("--cutoff", type=float, default=DEFAULT_CUTOFF_REL)
    p.add_argument("--out", help="report JSON")
    p.add_argument("--csv", help="per-pair errors CSV")

    p = sub.add_parser("report", help="interpolation report of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--snapshots", required=True)
    p.add_argument("--out")
    return parser


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(d):
    return json.dumps(d, indent=1) + "\n"


def _model_json(model, meta):
    d = model_to_dict(model)
    d["meta"] = meta
    return _dump(d)


def _load_model(path):
    with open(path, "rb") as fh:
        return deserialize_model(fh.read())


def _norm(args):
    weights = read_matrix_csv(args.weights) if args.weights else None
    return NormSpec(args.norm, args.inner_norm, weights)


def _pivot_table(trace):
    lines = [f"{'k':>3}  {'pivot':>12}  {'cond(F^k)':>12}"]
    for k, (r, c) in enumerate(zip(trace.residuals, trace.condition_estimates), start=1):
        lines.append(f"{k:>3}  {r:12.4e}  {c:12.4e}")
    return "\n".join(lines) + "\n"


def _norm_meta(args):
    return {"dmax": args.dmax, "norm": args.norm, "innerNorm": args.inner_norm, "tol": args.tol}


def cmd_build(args):
    xs, ys, A = ingest_snapshots(args.snapshots)
    model = build(A, GreedyConfig(args.dmax, args.tol, _norm(args)))
    _emit(_model_json(model, {"command": "build", **_norm_meta(args)}), args.out)
    if args.out:
        sys.stdout.write(_pivot_table(model.trace))


def cmd_evaluate(args):
    model = _load_model(args.model)
    if isinstance(model, GeimModel):
        raise UsageError("evaluate: GEIM models are evaluated with geim-reconstruct")
    xs, ys, A = ingest_snapshots(args.snapshots)
    if args.cell:
        i, j = args.cell
        if not (0 <= i < A.nx and 0 <= j < A.ny):
            raise UsageError(f"evaluate: cell ({i}, {j}) outside the {A.nx} x {A.ny} grid")
        _emit(f"{evaluate_symmetric(model, A, i, j)!r}\n", args.out)
        return
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_snapshots(xs, ys, approximation(model, A), fh)
    else:
        write_snapshots(xs, ys, approximation(model, A), sys.stdout)


def cmd_discard(args):
    model = _load_model(args.model)
    if not isinstance(model, SeparatedModel):
        raise UsageError("discard: expects a square model")
    xs, ys, A = ingest_snapshots(args.snapshots)
    rect = discard(model, args.drop, A, cutoff_rel=args.cutoff, side=args.side)
    meta = {"command": "discard", "drop": sorted(args.drop), "side": args.side, "cutoff": args.cutoff}
    _emit(_model_json(rect, meta), args.out)


def cmd_geim_build(args):
    library = read_matrix_csv(args.library)
    dictionary = LinearFormDictionary(read_matrix_csv(args.dictionary))
    model = geim_build(library, dictionary, GreedyConfig(args.dmax, args.tol, _norm(args)))
    _emit(_model_json(model, {"command": "geim-build", **_norm_meta(args)}), args.out)
    if args.out:
        sys.stdout.write(_pivot_table(model.trace))


def _measurements(text):
    if os.path.exists(text):
        return read_matrix_csv(text)
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise UsageError(f"geim-reconstruct: cannot parse measurements {text!r}") from None


def cmd_geim_reconstruct(args):
    model = _load_model(args.model)
    if not isinstance(model, GeimModel):
        raise UsageError("geim-reconstruct: expects a GEIM model")
    if args.drop:
        model = geim_discard(model, args.drop, cutoff_rel=args.cutoff)
    meas = _measurements(args.measurements)
    rec = np.atleast_2d(geim_reconstruct(model, meas))
    _emit("".join(",".join(repr(float(v)) for v in row) + "\n" for row in rec), args.out)


def cmd_paper_experiment(args, threads):
    report = run_paper_experiment(
        train_nx=args.train_nx,
        train_ny=args.train_ny,
        n_eval=args.n_eval,
        seed=args.seed,
        train_seed=args.train_seed,
        rank=args.rank,
        side=args.side,
        cutoff_rel=args.cutoff,
        threads=threads,
    )
    if args.out:
        _emit(report.to_json(), args.out)
    if args.csv:
        _emit(report.to_csv(), args.csv)
    sys.stdout.write(report.to_table())


def cmd_report(args):
    model = _load_model(args.model)
    if isinstance(model, GeimModel):
        raise UsageError("report: GEIM models are not tabulated on a snapshot grid")
    xs, ys, A = ingest_snapshots(args.snapshots)
    rep = interpolation_report(model, A)
    d = {"d": len(model.x_idx), "dY": len(model.y_idx), **rep.to_dict()}
    if isinstance(model, RectangularModel):
        d["side"] = model.side
        d["dropped"] = list(model.dropped)
    else:
        d["pivots"] = list(model.trace.residuals)
    _emit(_dump(d), args.out)


COMMANDS = {
    "build": cmd_build,
    "evaluate": cmd_evaluate,
    "discard": cmd_discard,
    "geim-build": cmd_geim_build,
    "geim-reconstruct": cmd_geim_reconstruct,
    "report": cmd_report,
}


def main(argv=None):
    try:
        args = _parser().parse_args(argv)
        threads = args.threads if args.threads is not None else _default_threads()
        if threads < 1:
            raise UsageError("--threads must be >= 1")
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)

    try:
        if args.command == "paper-experiment":
            cmd_paper_experiment(args, threads)
        else:
            COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except EimkitError as exc:
        print(f"{exc.module}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, KeyError, IndexError, OSError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
