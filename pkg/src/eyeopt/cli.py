"""``eyeopt`` command line.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace

import numpy as np

from . import __version__

log = logging.getLogger("eyeopt")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _seed_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument(
        "--seed",
        type=int,
        default=argparse.SUPPRESS,
        help="unsigned 64-bit seed; overrides the config file seed",
    )
    return p


def build_parser() -> argparse.ArgumentParser:
    seed = _seed_parent()
    parser = _Parser(prog="eyeopt", description=__doc__.splitlines()[0], parents=[seed])
    parser.add_argument("--version", action="version", version=f"eyeopt {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("optimize", parents=[seed], help="run the optimizer on a built-in objective")
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--objective", required=True, help="sphere, branin, rastrigin, hartmann6 or mock-tuning")
    p.add_argument("--out", required=True, help="history output, one JSON record per line")
    p.add_argument("--timing", action="store_true", help="record wall time per evaluation (breaks byte-identical reruns)")

    p = sub.add_parser("benchmark", parents=[seed], help="compare optimizers at a fixed budget")
    p.add_argument("--objectives", required=True, help="comma-separated objective names")
    p.add_argument("--methods", default="agbo,random,ga-only,bo-only", help="comma-separated subset of agbo,random,ga-only,bo-only")
    p.add_argument("--seeds", type=int, default=10, help="number of seeds per (objective, method)")
    p.add_argument("--budget", type=int, default=60, help="objective evaluations per run")
    p.add_argument("--init-points", type=int, default=10, help="random initial points")
    p.add_argument("--out", required=True, help="CSV output")

    p = sub.add_parser("standardize", parents=[seed], help="standardize a fundus photograph")
    p.add_argument("--input", required=True, help="input image (PNG)")
    p.add_argument("--output", required=True, help="output PNG")
    p.add_argument("--size", type=int, default=512, help="output side in pixels (default 512)")

    p = sub.add_parser("features", parents=[seed], help="extract optic nerve head features")
    p.add_argument("--image", required=True, help="standardized image (PNG, RGB or gray)")
    p.add_argument("--disc", required=True, help="disc mask PNG, nonzero = foreground")
    p.add_argument("--cup", required=True, help="cup mask PNG, nonzero = foreground")
    p.add_argument("--laterality", choices=("right", "left"), default="right")
    p.add_argument("--out", required=True, help="JSON output")

    p = sub.add_parser("loss", parents=[seed], help="evaluate the loss terms on CSV columns")
    p.add_argument("--pred", required=True, help="CSV, one predicted probability per line")
    p.add_argument("--truth", required=True, help="CSV, one label in [0, 1] per line")
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--beta", type=float, default=0.5, help="false-negative penalty weight")
    p.add_argument("--lambda-dice", type=float, default=1.0)
    p.add_argument("--lambda-ce", type=float, default=1.0)
    return parser


def _read_column(path) -> np.ndarray:
    vals = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                vals.append(float(row[0]))
            except ValueError:
                if vals:
                    raise
                continue  # header line
    return np.asarray(vals, dtype=np.float64)


def _cmd_optimize(args) -> None:
    from .objectives import get_objective
    from .runio import load_config, run_and_persist

    try:
        obj = get_objective(args.objective)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    cfg = load_config(args.config)
    if hasattr(args, "seed"):
        cfg = replace(cfg, seed=args.seed)
    if cfg.space is not None and len(cfg.space) != obj.arity:
        raise ValueError(f"config space has {len(cfg.space)} dimensions, objective {obj.name} has {obj.arity}")
    res = run_and_persist(cfg, obj, args.out, timing=args.timing)
    print(json.dumps({"best_x": list(res.best[0]), "best_f": res.best[1], "evaluations": len(res.history)}))


def _cmd_benchmark(args) -> None:
    from .agbo import METHODS, AgboConfig, compare_methods
    from .objectives import get_objective

    names = [s for s in args.objectives.split(",") if s]
    methods = [s for s in args.methods.split(",") if s]
    for m in methods:
        if m not in METHODS:
            raise UsageError(f"unknown method {m!r}; expected one of {','.join(METHODS)}")
    if args.seeds < 1:
        raise UsageError("--seeds must be >= 1")
    if args.budget < args.init_points:
        raise UsageError("--budget must be >= --init-points")
    try:
        objectives = [get_objective(n) for n in names]
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    base_seed = getattr(args, "seed", 0)
    seeds = [base_seed + i for i in range(args.seeds)]
    rows = compare_methods(objectives, methods, seeds, args.budget, AgboConfig(init_points=args.init_points))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["objective", "method", "seed", "best"], lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({**r, "best": repr(r["best"])})


def _cmd_standardize(args) -> None:
    from .imaging import read_png, standardize, write_png

    if args.size < 16:
        raise UsageError("--size must be >= 16")
    write_png(args.output, standardize(read_png(args.input), out_size=args.size))


def _cmd_features(args) -> None:
    from .features import SegmentationMasks, extract_features
    from .imaging import read_png, rgb_to_gray

    img = read_png(args.image, "RGB")
    gray = rgb_to_gray(img)
    masks = SegmentationMasks(read_png(args.disc, "L") > 0, read_png(args.cup, "L") > 0)
    rec = extract_features(gray, masks, args.laterality)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(rec.to_dict(), fh, indent=2)
        fh.write("\n")


def _cmd_loss(args) -> None:
    from .losses import (
        FocalParams,
        SegLossWeights,
        cross_entropy_loss,
        dice_loss,
        fn_penalty,
        focal_loss,
        total_loss,
    )

    p = _read_column(args.pred)
    g = _read_column(args.truth)
    if p.shape != g.shape:
        raise ValueError(f"{args.pred} has {p.size} values but {args.truth} has {g.size}")
    try:
        fp = FocalParams(alpha=args.alpha, gamma=args.gamma, beta_fn=args.beta)
        w = SegLossWeights(args.lambda_dice, args.lambda_ce)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    dice = dice_loss(p, g)
    ce = cross_entropy_loss(p, g, fp.eps)
    out = {
        "dice": dice,
        "cross_entropy": ce,
        "seg": w.lambda_dice * dice + w.lambda_ce * ce,
        "focal": focal_loss(p, g, fp),
        "fn_penalty": fn_penalty(p, g),
        "total": total_loss(p, g, fp),
    }
    print(json.dumps(out))


COMMANDS = {
    "optimize": _cmd_optimize,
    "benchmark": _cmd_benchmark,
    "standardize": _cmd_standardize,
    "features": _cmd_features,
    "loss": _cmd_loss,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if hasattr(args, "seed") and not 0 <= args.seed < 2**64:
        print("eyeopt: error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 1
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"eyeopt: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        log.debug("command failed", exc_info=True)
        print(f"eyeopt: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
