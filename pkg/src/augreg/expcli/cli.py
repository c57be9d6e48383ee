"""Command-line entry point: run, list-presets, plot, validate."""
import argparse
import json
import os
import sys
from pathlib import Path

from ..errors import AugregError, ConfigError
from .config import build_config, load_config, parse_overrides, parse_text
from .plot import PlotSpec, emit_plot
from .presets import PRESETS, preset_params, run_preset
from .sweep import run_sweep, sweep_columns
from .table import emit_csv, read_csv

OUT_ENV = "AUGREG_OUT"


def _parser():
    ap = argparse.ArgumentParser(prog="augreg", description="Augmentation-as-regularization experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset or a config-file sweep and write CSV")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset")
    src.add_argument("--config")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help=f"CSV path or directory (default: ${OUT_ENV} or the working directory)")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")

    sub.add_parser("list-presets", help="list presets with their default parameters")

    plot = sub.add_parser("plot", help="render a CSV as an SVG of medians and IQR bands")
    plot.add_argument("csv")
    plot.add_argument("--x", required=True)
    plot.add_argument("--y", required=True, help="comma-separated y columns")
    plot.add_argument("--group-by")
    plot.add_argument("--logx", action="store_true")
    plot.add_argument("--logy", action="store_true")
    plot.add_argument("--title", default="")
    plot.add_argument("--out")

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config")
    val.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    return ap


def _output_path(out, stem):
    base = Path(out or os.environ.get(OUT_ENV) or ".")
    if base.suffix.lower() == ".csv":
        base.parent.mkdir(parents=True, exist_ok=True)
        return base
    base.mkdir(parents=True, exist_ok=True)
    return base / f"{stem}.csv"


def _config(args):
    overrides = parse_overrides(args.set)
    if args.preset is not None:
        cfg = build_config({"preset": args.preset}, overrides)
    else:
        cfg = load_config(args.config, overrides)
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def cmd_run(args):
    cfg = _config(args)
    if cfg.preset is not None:
        table = run_preset(cfg.preset, cfg.params, cfg.seed)
        stem = cfg.preset
    else:
        table = run_sweep(cfg)
        stem = Path(args.config).stem
    path = _output_path(args.out, stem)
    emit_csv(table, path)
    print(path)


def cmd_list(args):
    for name, (_, defaults, about) in PRESETS.items():
        print(f"{name}: {about}")
        print("    " + " ".join(f"{k}={defaults[k]}" for k in sorted(defaults)))


def cmd_plot(args):
    table = read_csv(args.csv)
    spec = PlotSpec(args.x, [c.strip() for c in args.y.split(",")], args.group_by, args.logx, args.logy, args.title)
    out = args.out or str(Path(args.csv).with_suffix(".svg"))
    emit_plot(table, spec, out)
    print(out)


def cmd_validate(args):
    try:
        with open(args.config) as fh:
            flat = parse_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}", path=args.config) from exc
    cfg = build_config(flat, parse_overrides(args.set))
    if cfg.preset is not None:
        preset_params(cfg.preset, cfg.params)
    else:
        sweep_columns(cfg)
    print("ok")


COMMANDS = {"run": cmd_run, "list-presets": cmd_list, "plot": cmd_plot, "validate": cmd_validate}


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except AugregError as exc:
        line = {"code": exc.code, "message": str(exc)}
        line.update({k: v for k, v in exc.details.items() if isinstance(v, (str, int, float))})
        print(json.dumps(line), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
