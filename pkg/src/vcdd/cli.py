"""Command-line entry point.

Exit codes: 0 success, 1 invalid flags or domain error, 2 I/O or file
format error.  Every sweep writes ``manifest.txt`` into its run directory
before any computation, then ``results.csv``, ``figure.svg`` and
``version.txt``.  ``--manifest FILE`` replays a run; flags given on the
command line override the manifest's values.
"""

from __future__ import annotations

import argparse
import os
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__, bounds, experiments as ex, manifest
from .data import DataFormatError, save_dataset
from .features import DEFAULT_SIGMA, KINDS
from .mlp import LOGISTIC, SQUARED, TrainConfig
from .plot import render_svg
from .solvers import DEFAULT_C

OUTPUT_ROOT_ENV = "VCDD_OUTPUT_ROOT"
SWEEPS = {"sweep-width": ex.WIDTH, "sweep-epochs": ex.EPOCHS, "sweep-samples": ex.SAMPLES}
NOT_IN_MANIFEST = {"command", "out", "manifest"}
NOT_IN_DIGEST = {"workers"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- flag types


def _number(kind, lo=None, hi=None, lo_open=False):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {kind.__name__}, got {text!r}") from None
        if lo is not None and (v < lo or (lo_open and v == lo)):
            raise argparse.ArgumentTypeError(f"must be {'>' if lo_open else '>='} {lo}, got {text}")
        if hi is not None and v > hi:
            raise argparse.ArgumentTypeError(f"must be <= {hi}, got {text}")
        return v

    return parse


def _int_list(text):
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _grid(text):
    return None if text in ("auto", "none") else _int_list(text)


# ---------------------------------------------------------------- parser


def _add_bound_flags(p):
    g = p.add_argument_group("bound constants")
    g.add_argument("--a1", type=_number(float, 0.0, 4.0), default=None, help="a1 in [0, 4] (default 1)")
    g.add_argument("--a2", type=_number(float, 0.0, 2.0, lo_open=True), default=None, help="a2 in (0, 2] (default 1)")
    g.add_argument("--noisy-preset", action="store_true", help="use a1=3, a2=1, suited to noisy data")


def _add_data_flags(p):
    g = p.add_argument_group("data")
    g.add_argument("--dataset", default="mnist:5v8",
                   help="mnist:AvB, cifar:A-B, synth or cache:PATH (default mnist:5v8)")
    g.add_argument("--mnist-dir", default=None, help="directory holding MNIST IDX files (optionally gzipped)")
    g.add_argument("--cifar-dir", default=None, help="directory holding CIFAR-10 data_batch_*.bin files")
    g.add_argument("--ntrain", type=_number(int, 2), default=800, help="training samples (default 800)")
    g.add_argument("--ntest", type=_number(int, 1), default=2000, help="test samples (default 2000)")
    g.add_argument("--data-seed", type=_number(int, 0), default=0, help="split and noise seed (default 0)")
    g.add_argument("--label-noise", type=_number(float, 0.0, 0.5), default=0.0,
                   help="fraction of training labels flipped (default 0)")
    g.add_argument("--pixel-noise", type=_number(float, 0.0), default=0.0,
                   help="std of Gaussian pixel noise on [0,1] inputs (default 0)")
    g.add_argument("--synth-dim", type=_number(int, 1), default=50, help="synthetic input dimension (default 50)")
    g.add_argument("--synth-sep", type=_number(float, 0.0), default=4.0,
                   help="distance between synthetic class means (default 4)")


def _add_sweep_flags(p, axis):
    _add_data_flags(p)
    g = p.add_argument_group("model")
    learners = [ex.MLP] if axis == ex.EPOCHS else list(ex.LEARNERS)
    g.add_argument("--learner", choices=learners, default=learners[0], help=f"default {learners[0]}")
    g.add_argument("--features", choices=KINDS, default="relu", help="random feature kind (default relu)")
    g.add_argument("--sigma", type=_number(float, 0.0, lo_open=True), default=DEFAULT_SIGMA,
                   help=f"RFF projection std (default {DEFAULT_SIGMA})")
    g.add_argument("--c", type=_number(float, 0.0, lo_open=True), default=DEFAULT_C,
                   help=f"SVM box constraint C (default {DEFAULT_C:g})")
    g.add_argument("--sphere-normalize", action="store_true",
                   help="divide rescaled features by the largest training-row norm")
    if axis == ex.SAMPLES:
        g.add_argument("--width", type=_number(int, 1), default=500, help="fixed number of features N (default 500)")
    if axis == ex.EPOCHS:
        g.add_argument("--widths", type=_int_list, default=[10, 100], help="hidden widths (default 10,100)")
    t = p.add_argument_group("network training (mlp learner)")
    t.add_argument("--epochs", type=_number(int, 1), default=6000, help="default 6000")
    t.add_argument("--lr", type=_number(float, 0.0, lo_open=True), default=0.001, help="initial learning rate (default 0.001)")
    t.add_argument("--momentum", type=_number(float, 0.0, 0.999999), default=0.95, help="default 0.95")
    t.add_argument("--decay", type=_number(float, 0.0, 0.999999), default=0.10,
                   help="fractional learning-rate cut per interval (default 0.10)")
    t.add_argument("--decay-interval", type=_number(int, 1), default=500, help="epochs per cut (default 500)")
    t.add_argument("--batch-size", type=_number(int, 2), default=32, help="default 32")
    t.add_argument("--loss", choices=[SQUARED, LOGISTIC], default=SQUARED, help="default squared")
    s = p.add_argument_group("sweep")
    grid_help = {
        ex.WIDTH: "comma-separated widths, or auto (log grid from 2 to 2.5 n, densified near the threshold)",
        ex.EPOCHS: "comma-separated epochs to record, or auto (every epoch to 200, then every 10th)",
        ex.SAMPLES: "comma-separated training sizes, or auto (100 to 1200 in steps of 100)",
    }[axis]
    s.add_argument("--grid", type=_grid, default=None, help=grid_help)
    s.add_argument("--seeds", type=_int_list, default=[0, 1, 2, 3, 4], help="replication seeds (default 0,1,2,3,4)")
    s.add_argument("--single-run", action="store_true", help="only the first seed, no band in the figure")
    s.add_argument("--variant", choices=ex.VARIANTS, default=ex.EQ1,
                   help="eq1: full bound; eq2: zero-training-error form (default eq1)")
    _add_bound_flags(p)
    s.add_argument("--workers", type=_number(int, 1), default=os.cpu_count() or 1,
                   help="parallel worker processes (default: available cores)")
    s.add_argument("--out", default=None, help=f"run directory (default ${OUTPUT_ROOT_ENV} or ./runs, plus a hash)")
    s.add_argument("--manifest", default=None, help="replay the run described by this manifest file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vcdd", description="VC-bound modeling of double descent curves.")
    parser.add_argument("--version", action="version", version=f"vcdd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bound-eval", help="evaluate the VC bound for given n, h, training error")
    p.add_argument("--n", type=_number(int, 1), required=True, help="number of training samples")
    p.add_argument("--h", type=_number(float, 0.0, lo_open=True), required=True, help="VC dimension")
    p.add_argument("--rtrn", type=_number(float, 0.0, 1.0), default=0.0, help="training error (default 0)")
    _add_bound_flags(p)

    for name, axis in SWEEPS.items():
        _add_sweep_flags(sub.add_parser(name, help=f"{axis} sweep"), axis)

    p = sub.add_parser("dataset-prepare", help="extract a binary task and write the dataset cache")
    _add_data_flags(p)
    p.add_argument("--out", required=True, help="cache file to write")

    p = sub.add_parser("audit-csv", help="recompute h, bound and aggregate columns of a sweep CSV")
    p.add_argument("path")
    return parser


# ---------------------------------------------------------------- resolution


def _constants(args) -> tuple[float, float]:
    if args.noisy_preset:
        a1, a2 = bounds.PRESETS["noisy"]
        if args.a1 not in (None, a1) or args.a2 not in (None, a2):
            raise UsageError("--noisy-preset conflicts with the given --a1/--a2")
        return a1, a2
    return (1.0 if args.a1 is None else args.a1), (1.0 if args.a2 is None else args.a2)


def _data_spec(args) -> ex.DataSpec:
    kind = args.dataset.partition(":")[0]
    if kind not in ("mnist", "cifar", "synth", "cache"):
        raise UsageError(f"--dataset: unknown source {args.dataset!r}")
    if kind == "mnist" and args.mnist_dir is None:
        raise UsageError("--mnist-dir is required for --dataset mnist:...")
    if kind == "cifar" and args.cifar_dir is None:
        raise UsageError("--cifar-dir is required for --dataset cifar:...")
    return ex.DataSpec(
        source=args.dataset, n_train=args.ntrain, n_test=args.ntest, seed=args.data_seed,
        label_noise=args.label_noise, pixel_noise=args.pixel_noise, mnist_dir=args.mnist_dir,
        cifar_dir=args.cifar_dir, synth_dim=args.synth_dim, synth_sep=args.synth_sep,
    )


def sweep_config(args) -> ex.SweepConfig:
    a1, a2 = _constants(args)
    seeds = tuple(args.seeds[:1] if args.single_run else args.seeds)
    if len(set(seeds)) != len(seeds):
        raise UsageError("--seeds: repeated seed")
    grid = args.grid
    if grid is not None and any(b <= a for a, b in zip(grid, grid[1:])):
        raise UsageError("--grid: values must be strictly increasing")
    if grid is not None and grid[0] < 1:
        raise UsageError("--grid: values must be positive")
    mlp = TrainConfig(
        lr0=args.lr, momentum=args.momentum, decay=args.decay, decay_interval=args.decay_interval,
        epochs=args.epochs, batch_size=args.batch_size, loss=args.loss,
    )
    return ex.SweepConfig(
        axis=SWEEPS[args.command], learner=args.learner, grid=None if grid is None else tuple(grid),
        features=args.features, sigma=args.sigma, seeds=seeds, a1=a1, a2=a2, variant=args.variant,
        C=args.c, sphere=args.sphere_normalize, width=getattr(args, "width", 500),
        widths=tuple(getattr(args, "widths", (10, 100))), mlp=mlp,
    )


def manifest_items(args) -> dict:
    items = {}
    for key, value in vars(args).items():
        if key in NOT_IN_MANIFEST:
            continue
        items[key.replace("_", "-")] = "auto" if key == "grid" and value is None else value
    return items


def manifest_argv(command: str, items: dict[str, str], parser) -> list[str]:
    sub = parser._subparsers._group_actions[0].choices[command]
    flags = {a.dest.replace("_", "-"): a for a in sub._actions}
    argv = []
    for key, value in items.items():
        action = flags.get(key)
        if action is None or key in ("out", "manifest", "help"):
            raise UsageError(f"manifest: unknown key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            if value not in ("true", "false"):
                raise UsageError(f"manifest: {key} must be true or false")
            if value == "true":
                argv.append(f"--{key}")
        elif value != "none":
            argv += [f"--{key}", value]
    return argv


def _expand_manifest(argv: list[str], parser) -> list[str]:
    if "--manifest" not in argv and not any(a.startswith("--manifest=") for a in argv):
        return argv
    probe = parser.parse_args(argv)
    try:
        command, items = manifest.read(probe.manifest)
    except ValueError as exc:
        raise UsageError(f"--manifest: {exc}") from None
    if command != probe.command:
        raise UsageError(f"--manifest: manifest is for {command}, not {probe.command}")
    return [argv[0]] + manifest_argv(command, items, parser) + argv[1:]


def version_stamp() -> str:
    import numba

    return (
        f"vcdd {__version__}\npython {platform.python_version()}\n"
        f"numpy {np.__version__}\nnumba {numba.__version__}\n"
    )


# ---------------------------------------------------------------- commands


def cmd_bound_eval(args) -> int:
    a1, a2 = _constants(args)
    res = bounds.vc_bound(bounds.BoundParams(args.n, args.h, args.rtrn, a1, a2))
    print(f"n={args.n}")
    print(f"h={args.h!r}")
    print(f"r_trn={args.rtrn!r}")
    print(f"a1={a1!r}")
    print(f"a2={a2!r}")
    print(f"eta={res.eta!r}")
    print(f"epsilon={res.epsilon!r}")
    print(f"bound={res.bound!r}")
    print(f"out_of_regime={'true' if res.out_of_regime else 'false'}")
    print(f"second_descent_bound={bounds.second_descent_bound(args.n, args.h)!r}")
    return 0


def run_directory(args, text: str) -> Path:
    if args.out:
        return Path(args.out)
    root = Path(os.environ.get(OUTPUT_ROOT_ENV) or "runs")
    keep = [ln for ln in text.splitlines() if ln.partition("=")[0] not in NOT_IN_DIGEST]
    return root / f"{args.command}-{manifest.digest(chr(10).join(keep))}"


def cmd_sweep(args) -> int:
    cfg = sweep_config(args)
    spec = _data_spec(args)
    text = manifest.render(args.command, manifest_items(args))
    out = run_directory(args, text)
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.txt").write_text(text, encoding="utf-8")
    ds = ex.build_dataset(spec)
    result = ex.run_sweep(cfg, ds, workers=args.workers)
    ex.write_csv(result, out / "results.csv")
    render_svg(result, out / "figure.svg", style="single" if args.single_run else "default")
    (out / "version.txt").write_text(version_stamp(), encoding="utf-8")
    failed = sum(1 for r in result.rows if any(f.startswith("failed") for f in r.flags))
    print(f"run directory: {out}")
    print(f"rows: {len(result.rows)}  failed points: {failed}")
    if cfg.axis != ex.EPOCHS:
        star = ex.interpolation_threshold(result)
        print(f"interpolation threshold: {'none' if star is None else star}")
    return 0


def cmd_dataset_prepare(args) -> int:
    ds = ex.build_dataset(_data_spec(args))
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_dataset(ds, args.out)
    print(f"wrote {ds.n_train} train / {ds.n_test} test samples to {args.out}")
    return 0


def cmd_audit(args) -> int:
    problems = ex.audit_csv(args.path)
    for p in problems:
        print(p)
    print(f"{len(problems)} mismatches")
    return 1 if problems else 0


COMMANDS = {"bound-eval": cmd_bound_eval, "dataset-prepare": cmd_dataset_prepare, "audit-csv": cmd_audit}
COMMANDS.update({name: cmd_sweep for name in SWEEPS})


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_expand_manifest(argv, parser))
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, DataFormatError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
