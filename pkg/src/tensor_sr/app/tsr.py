"""
Command-line script for tensor-based super-resolution: train a model,
super-resolve images, evaluate and inspect models
"""

import sys
import time
import argparse
from contextlib import redirect_stderr, nullcontext
from pathlib import Path

from typing import List

import numpy as np

from .. import VERSION
from ..helper.exception import ConfigError
from ..tensor import atom_norms_sq
from ..image import GrayImage
from ..api import (load_model, image_files, DirectorySource, train_model,
                   super_resolve, super_resolve_source, generation_config,
                   eval_model)
from .config import CliConfig, load_config, config_help

# Exceptions that are a problem with the invocation rather than the data
USAGE_ERRORS = (ConfigError, FileNotFoundError)


def cmd_train(args: argparse.Namespace):
    cfg = load_config(args.config) if args.config else CliConfig()
    spec = cfg.train_spec(image_files(args.images), out=args.out)
    model = train_model(spec, verbose=args.verbose - 1)
    if args.verbose > 0:
        for it, value in enumerate(model.meta.trace[2::2], start=1):
            print("iteration {}: objective {:.10g}".format(it, value))
        for w in model.meta.warnings:
            print("warning:", w)


def cmd_superres(args: argparse.Namespace):
    model = load_model(args.model)
    cfg = generation_config(model, args.lam)
    start = time.perf_counter()
    if Path(args.input).is_dir():
        src = DirectorySource(args.input)
        for name, out in super_resolve_source(model, src, Path(args.out), cfg,
                                              debug=args.verbose > 1):
            print("{}: {}x{}".format(name, *out.shape))
    else:
        low = GrayImage.load(args.input)
        out = super_resolve(model, low, cfg, debug=args.verbose > 1)
        out.save(args.out)
        print("output: {}x{}".format(*out.shape))
    print("time: {:.3f} s".format(time.perf_counter() - start))


def cmd_eval(args: argparse.Namespace):
    model = load_model(args.model)
    cfg = generation_config(model, args.lam)
    report = eval_model(model, args.truth_dir, cfg, verbose=args.verbose - 1)
    print("{:<24} {:>10} {:>10} {:>10}".format("image", "PSNR", "bicubic", "baseline"))
    for row in report.rows:
        print("{:<24} {:>10.4f} {:>10.4f} {:>10.4f}".format(
            row.name, row.psnr, row.bicubic_psnr, row.baseline_psnr))
    agg = report.aggregate
    print("{:<24} {:>10.4f} {:>10.4f} {:>10.4f}".format(
        "mean", agg["psnr"], agg["bicubic_psnr"], agg["baseline_psnr"]))
    if args.save_report:
        report.dump(args.save_report)


def cmd_inspect(args: argparse.Namespace):
    model = load_model(args.model)
    cfg, meta = model.fold, model.meta
    d_h, d_l, m, n = model.dims
    print("format: TSR1 version {}".format(model.version))
    print("a={} r={} c={} m={} n={} d_h={} d_l={}".format(cfg.a, cfg.r, cfg.c,
                                                          m, n, d_h, d_l))
    print("lambda={:g} seed={}".format(meta.lam, meta.seed))
    print("shifts:", " ".join("({},{})".format(*s) for s in cfg.shifts))
    print("filter set:", model.filter_set)
    norms = atom_norms_sq(model.pair.stacked())
    print("atom norm^2: min={:.6g} mean={:.6g} max={:.6g}".format(
        norms.min(), np.mean(norms), norms.max()))
    if meta.trace:
        print("training: T={} S={} tol={:g} N={}".format(meta.outer_iter, meta.inner_iter,
                                                        meta.tol, meta.num_samples))
        print("objective: initial={:.10g} final={:.10g}".format(meta.trace[0],
                                                               meta.trace[-1]))
    for w in meta.warnings:
        print("warning:", w)


# --------------------------------------------------------------------------


def parse_args(args: List[str]) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="tsr",
        description=f"Tensor-based single image super-resolution (version {VERSION})")

    opts = argparse.ArgumentParser(add_help=False)
    g9 = opts.add_argument_group("Options")
    g9.add_argument("--verbose", "-v", type=int, default=1,
                    help="Print progress messages (0-2, default: %(default)d)")
    g9.add_argument("--reraise", action='store_true',
                    help="Re-raise on exceptions")

    sub = parser.add_subparsers(dest="cmd", metavar="COMMAND")
    sub.required = True

    def subcommand(name: str, help: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help, parents=[opts], epilog=config_help(),
                              formatter_class=argparse.RawDescriptionHelpFormatter)

    s = subcommand("train", "train a model from a directory of images")
    g0 = s.add_argument_group("Input/output paths")
    g0.add_argument("--config", metavar="FILE", help="configuration file")
    g0.add_argument("--images", metavar="DIR", required=True,
                    help="directory of PNG/PGM training images")
    g0.add_argument("--out", metavar="MODEL", required=True,
                    help="output model file")
    s.set_defaults(func=cmd_train)

    s = subcommand("superres", "super-resolve an image (or a directory of images)")
    g0 = s.add_argument_group("Input/output paths")
    g0.add_argument("--model", required=True, help="model file")
    g0.add_argument("--input", required=True, help="low-resolution image or directory")
    g0.add_argument("--out", required=True, help="output image or directory")
    g1 = s.add_argument_group("Generation")
    g1.add_argument("--lambda", dest="lam", type=float,
                    help="sparsity weight (default: the one used in training)")
    s.set_defaults(func=cmd_superres)

    s = subcommand("eval", "evaluate a model against ground-truth images")
    g0 = s.add_argument_group("Input/output paths")
    g0.add_argument("--model", required=True, help="model file")
    g0.add_argument("--truth-dir", metavar="DIR", required=True,
                    help="directory of high-resolution PNG/PGM images")
    g0.add_argument("--save-report", metavar="CSVFILE",
                    help="write the per-image report to a CSV file")
    g1 = s.add_argument_group("Generation")
    g1.add_argument("--lambda", dest="lam", type=float,
                    help="sparsity weight (default: the one used in training)")
    s.set_defaults(func=cmd_eval)

    s = subcommand("inspect", "print the contents of a model")
    g0 = s.add_argument_group("Input/output paths")
    g0.add_argument("--model", required=True, help="model file")
    s.set_defaults(func=cmd_inspect)

    return parser.parse_args(args)


def main(args: List[str] = None):
    if args is None:
        args = sys.argv[1:]
    args = parse_args(args)
    # debug progress messages go to stdout
    progress = redirect_stderr(sys.stdout) if args.verbose > 1 else nullcontext()
    try:
        with progress:
            args.func(args)
    except Exception as e:
        if args.reraise:
            raise
        msg = " ".join(str(e).split())
        print(f"Error: {msg}", file=sys.stderr)
        sys.exit(2 if isinstance(e, USAGE_ERRORS) else 1)


if __name__ == "__main__":
    main()
