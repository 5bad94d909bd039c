"""Command-line interface.

Subcommands: run, compare, grid-search, gen-synth, inspect. Every
hyperparameter key accepts three override layers, lowest to highest
precedence: a TOML config file (--config), TDA_* environment variables
(e.g. TDA_P_L=0.05), and the explicit flags below. Exit code is 0 on
success; engine failures print the error class name and exit 1.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import report as rpt
from .config import ENV_PREFIX, TdaConfig, UpdateOrder, config_keys, config_to_toml, load_config
from .errors import InvalidConfig, NoDumpAvailable, TdaError
from .dataset import read_dataset, write_dataset
from .stream import (
    ALL_METHODS,
    GridSpec,
    Method,
    compare,
    grid_search,
    run_stream,
    summarize_dump,
)
from .synth import SynthShiftSpec, generate_synthetic, pinned_benchmark


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group(
        "hyperparameters",
        f"override the config file and {ENV_PREFIX}* environment variables",
    )
    g.add_argument("--config", metavar="FILE", help="TOML config file")
    g.add_argument("--pos-capacity", type=int, dest="pos_capacity")
    g.add_argument("--neg-capacity", type=int, dest="neg_capacity")
    g.add_argument("--p-l", type=float, dest="p_l")
    g.add_argument("--tau-l", type=float, dest="tau_l")
    g.add_argument("--tau-h", type=float, dest="tau_h")
    g.add_argument("--pos-alpha", type=float, dest="pos_alpha")
    g.add_argument("--pos-beta", type=float, dest="pos_beta")
    g.add_argument("--neg-alpha", type=float, dest="neg_alpha")
    g.add_argument("--neg-beta", type=float, dest="neg_beta")
    g.add_argument("--logit-scale", type=float, dest="logit_scale")
    g.add_argument(
        "--update-order",
        dest="update_order",
        choices=[o.value for o in UpdateOrder],
    )


def _resolve_config(args: argparse.Namespace) -> TdaConfig:
    overrides = {k: getattr(args, k, None) for k in config_keys()}
    return load_config(path=args.config, overrides=overrides)


def _method(value: str) -> Method:
    return Method(value)


def _int_list(raw: str) -> tuple[int, ...]:
    return tuple(int(x) for x in raw.split(","))


def _float_list(raw: str) -> tuple[float, ...]:
    return tuple(float(x) for x in raw.split(","))


def _figure_path(args: argparse.Namespace) -> Path | None:
    if not args.figures:
        return None
    if not args.output:
        raise InvalidConfig("--figures requires --output to derive the figure path")
    return Path(args.output).with_suffix(".png")


def _print_reports(reports, extra_cols=None) -> None:
    headers = list(rpt.REPORT_HEADERS)
    rows = [rpt.report_row(r) for r in reports]
    if extra_cols:
        name, values = extra_cols
        headers = [name] + headers
        rows = [[v] + row for v, row in zip(values, rows)]
    print(rpt.format_table(headers, rows))


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    ds = read_dataset(args.dataset)
    method = _method(args.method)

    base = run_stream(ds, cfg, method, keep_dump=args.dump_caches is not None)
    reports = [base]
    seed_col = ["-"]
    if args.shuffle_seeds:
        for seed in args.shuffle_seeds:
            reports.append(run_stream(ds.permuted(seed), cfg, method))
            seed_col.append(str(seed))
    _print_reports(reports, extra_cols=("shuffle_seed", seed_col))

    if args.shuffle_seeds and len(args.shuffle_seeds) >= 1:
        accs = np.array([r.top1_accuracy for r in reports[1:]])
        print(
            f"\nshuffled top-1 over {len(accs)} seed(s): "
            f"mean {accs.mean():.4f} +/- sd {accs.std(ddof=1) if len(accs) > 1 else 0.0:.4f} "
            f"(stream-order run: {base.top1_accuracy:.4f})"
        )
    if base.labeled_samples < base.samples_processed:
        print(
            f"\nnote: accuracy over {base.labeled_samples} labeled of "
            f"{base.samples_processed} streamed samples"
        )

    if args.output:
        headers = ["shuffle_seed"] + list(rpt.REPORT_HEADERS)
        rows = [[s] + rpt.report_row(r) for s, r in zip(seed_col, reports)]
        rpt.write_csv(args.output, headers, rows)
    if args.dump_caches is not None:
        with open(args.dump_caches, "w") as fh:
            json.dump(base.dump, fh, indent=1)
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    ds = read_dataset(args.dataset)
    figure = _figure_path(args)
    reports = compare(ds, cfg)
    _print_reports(reports)
    if args.output:
        rpt.write_csv(args.output, rpt.REPORT_HEADERS, [rpt.report_row(r) for r in reports])
    if figure:
        rpt.render_compare_figure(reports, figure)
        print(f"\nfigure written to {figure}")
    return 0


_GRID_KEYS = ("pos_capacity", "neg_capacity", "p_l", "tau_l", "tau_h", "alpha", "beta")


def _cmd_grid(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    ds = read_dataset(args.dataset)
    figure = _figure_path(args)
    defaults = {
        "pos_capacity": (cfg.pos_capacity,),
        "neg_capacity": (cfg.neg_capacity,),
        "p_l": (cfg.p_l,),
        "tau_l": (cfg.tau_l,),
        "tau_h": (cfg.tau_h,),
        "alpha": (cfg.pos_params.alpha,),
        "beta": (cfg.pos_params.beta,),
    }
    lists = {k: getattr(args, f"grid_{k}") or defaults[k] for k in _GRID_KEYS}
    spec = GridSpec(
        **lists, method=_method(args.method), max_combos=args.max_combos
    )
    result = grid_search(spec, ds, base=cfg, workers=args.workers)

    headers = ["rank", *_GRID_KEYS, "top1_accuracy", "wall_time_s"]
    rows = [
        [i + 1, *(row.params[k] for k in _GRID_KEYS),
         row.report.top1_accuracy, row.report.wall_time]
        for i, row in enumerate(result.rows)
    ]
    print(rpt.format_table(headers, rows))
    if result.skipped:
        print(f"\nskipped {result.skipped} invalid combination(s)")
    if result.best is not None:
        print("\nbest configuration:\n")
        print(config_to_toml(result.best))
    if args.output:
        rpt.write_csv(args.output, headers, rows)
    if figure and result.rows:
        rpt.render_grid_figure(result, figure)
        print(f"figure written to {figure}")
    return 0


def _cmd_gen_synth(args: argparse.Namespace) -> int:
    if args.pinned:
        spec = pinned_benchmark()
    else:
        spec = SynthShiftSpec(
            dim=args.dim,
            num_classes=args.num_classes,
            samples_per_class=args.samples_per_class,
            prototype_seed=args.prototype_seed,
            stream_seed=args.stream_seed,
            shift_angle=args.shift_angle,
            noise_sigma=args.noise_sigma,
            class_prior=args.class_prior,
            zipf_exponent=args.zipf_exponent,
        )
    ds = generate_synthetic(spec)
    write_dataset(ds, args.output)
    print(
        f"wrote {ds.num_samples} samples, N={ds.num_classes}, D={ds.dim} "
        f"to {args.output}"
    )
    return 0


def _cmd_inspect(args: argparse.Namespace) -> int:
    path = Path(args.dump)
    if not path.exists():
        raise NoDumpAvailable(
            f"no cache dump at {path}; run with --dump-caches to create one"
        )
    with open(path) as fh:
        dump = json.load(fh)
    summary = summarize_dump(dump)
    figure = _figure_path(args)

    headers = ["cache", "class_id", "count", "entropy_min", "entropy_q25",
               "entropy_median", "entropy_q75", "entropy_max", "purity"]
    rows = []
    for name, data in summary["caches"].items():
        for r in data["rows"]:
            rows.append([name, r["class_id"], r["count"], r["entropy_min"],
                         r["entropy_q25"], r["entropy_median"], r["entropy_q75"],
                         r["entropy_max"], r["purity"]])
    print(rpt.format_table(headers, rows))
    for name, data in summary["caches"].items():
        o = data["overall"]
        purity = "-" if o["purity"] is None else f"{o['purity']:.4f}"
        ent = "-" if o["mean_entropy"] is None else f"{o['mean_entropy']:.4f}"
        print(
            f"\n{name}: {o['entries']} entries, fill {o['fill_ratio']:.3f}, "
            f"mean entropy {ent}, purity {purity}"
        )
    if args.output:
        rpt.write_csv(args.output, headers, rows)
    if figure:
        rpt.render_inspect_figure(summary, figure)
        print(f"\nfigure written to {figure}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tda",
        description="Streaming test-time adaptation with entropy-prioritized caches.",
        epilog=f"Hyperparameters may also be set via {ENV_PREFIX}<KEY> environment "
               f"variables, e.g. {ENV_PREFIX}P_L=0.05.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    methods = [m.value for m in ALL_METHODS]

    p = sub.add_parser("run", help="stream one dataset through one method")
    p.add_argument("--dataset", required=True, help="TDAE dataset file")
    p.add_argument("--method", default=Method.TDA_FULL.value, choices=methods)
    p.add_argument("--output", help="write the report as CSV")
    p.add_argument("--dump-caches", metavar="FILE", help="write cache contents as JSON")
    p.add_argument(
        "--shuffle-seed", dest="shuffle_seeds", type=_int_list, metavar="S1,S2,...",
        help="also evaluate permuted streams; summary reports mean +/- sd",
    )
    _add_config_flags(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("compare", help="run all five methods on the same stream")
    p.add_argument("--dataset", required=True)
    p.add_argument("--output", help="write the comparison as CSV")
    p.add_argument("--figures", action="store_true",
                   help="render a PNG next to --output")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("grid-search", help="exhaustive hyperparameter search")
    p.add_argument("--dataset", required=True)
    p.add_argument("--method", default=Method.TDA_FULL.value, choices=methods)
    p.add_argument("--grid-pos-capacity", type=_int_list, metavar="K1,K2,...")
    p.add_argument("--grid-neg-capacity", type=_int_list, metavar="K1,K2,...")
    p.add_argument("--grid-p-l", type=_float_list, metavar="P1,P2,...")
    p.add_argument("--grid-tau-l", type=_float_list, metavar="T1,T2,...")
    p.add_argument("--grid-tau-h", type=_float_list, metavar="T1,T2,...")
    p.add_argument("--grid-alpha", type=_float_list, metavar="A1,A2,...")
    p.add_argument("--grid-beta", type=_float_list, metavar="B1,B2,...")
    p.add_argument("--max-combos", type=int, default=1024)
    p.add_argument("--workers", type=int, default=1,
                   help="evaluate combinations in parallel processes")
    p.add_argument("--output", help="write ranked results as CSV")
    p.add_argument("--figures", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("gen-synth", help="generate a synthetic TDAE dataset")
    p.add_argument("--output", required=True)
    p.add_argument("--pinned", action="store_true",
                   help="emit the pinned regression benchmark, ignoring other knobs")
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--num-classes", type=int, default=20)
    p.add_argument("--samples-per-class", type=int, default=200)
    p.add_argument("--prototype-seed", type=int, default=1)
    p.add_argument("--stream-seed", type=int, default=2)
    p.add_argument("--shift-angle", type=float, default=0.0)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--class-prior", choices=["uniform", "zipf"], default="uniform")
    p.add_argument("--zipf-exponent", type=float, default=1.1)
    p.set_defaults(func=_cmd_gen_synth)

    p = sub.add_parser("inspect", help="summarize a cache dump")
    p.add_argument("--dump", required=True, help="JSON file from --dump-caches")
    p.add_argument("--output", help="write per-class stats as CSV")
    p.add_argument("--figures", action="store_true")
    p.set_defaults(func=_cmd_inspect)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TdaError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
