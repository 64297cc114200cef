"""Command-line front-end.

Subcommands::

    mixlap run --target ex6 --variant both --seed 1 --out out/
    mixlap compare out/original out/modified
    mixlap list [--json]

``run`` writes, per variant, report.json, mixture.json, ordered.csv and
(for 2D targets) contour.csv into ``<out>/<variant>/``.  Outputs are
byte-stable for a fixed seed; wall times appear only inside report.json
and on stdout.

Flag precedence: a ``--config file.json`` wholesale override wins over
individual flags, and individual flags win over defaults.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from pathlib import Path

from . import engine, evaluate, targets

_EXIT_CONFIG = 2
_EXIT_NUMERICAL = 1

_CONFIG_FIELDS = [
    f.name
    for f in dataclasses.fields(engine.IterLapConfig)
    if f.name not in ("variant", "rng_seed", "optim")
]


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    types = {f.name: f.type for f in dataclasses.fields(engine.IterLapConfig)}
    for name in _CONFIG_FIELDS:
        kind = float
        if types[name] in ("int", int) or name in ("n_c_max", "n_starts_initial",
                                                   "n_x", "n_dup", "n_starts_per_iter"):
            kind = int
        parser.add_argument(
            "--" + name.replace("_", "-"), dest=name, type=kind, default=None
        )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixlap",
        description="Adaptive Gaussian-mixture approximation of non-normalised densities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="approximate a catalogue target and write reports")
    p_run.add_argument("--target", required=True)
    p_run.add_argument(
        "--variant", choices=["original", "modified", "both"], default="modified"
    )
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--out", required=True)
    p_run.add_argument(
        "--config",
        default=None,
        help="JSON file with engine settings; overrides every individual flag",
    )
    p_run.add_argument(
        "--grid",
        default=None,
        help="per-axis lo:hi:count specs joined by commas (default: target's declared grid)",
    )
    p_run.add_argument(
        "--threads",
        type=int,
        default=None,
        help="evaluation thread budget (default: MIXLAP_THREADS or all logical CPUs); "
        "the current engine is single-threaded and deterministic regardless",
    )
    _add_config_flags(p_run)
    p_run.add_argument("--dlm-n", type=int, default=100)
    p_run.add_argument("--dlm-seed", type=int, default=0)
    p_run.add_argument("--dlm-a", type=float, default=1.0)
    p_run.add_argument("--dlm-b", type=float, default=0.5)
    p_run.add_argument("--dlm-c", type=float, default=1.0)
    p_run.add_argument("--dlm-d", type=float, default=0.5)
    p_run.add_argument("--dlm-lambda-u", type=float, default=0.25)
    p_run.add_argument("--dlm-lambda-v", type=float, default=1.0)

    p_cmp = sub.add_parser("compare", help="tabulate two run directories")
    p_cmp.add_argument("dir_a")
    p_cmp.add_argument("dir_b")

    p_list = sub.add_parser("list", help="list catalogue targets")
    p_list.add_argument("--json", action="store_true")
    return parser


def _resolve_config(args) -> engine.IterLapConfig:
    overrides: dict = {}
    for name in _CONFIG_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if args.config is not None:
        with open(args.config) as fh:
            overrides = json.load(fh)
        overrides.pop("variant", None)
        overrides.pop("rng_seed", None)
    return engine.IterLapConfig(rng_seed=args.seed, **overrides)


def _parse_grid(text: str, dim: int) -> evaluate.EvaluationGrid:
    axes = []
    for part in text.split(","):
        lo, hi, count = part.split(":")
        axes.append((float(lo), float(hi), int(count)))
    if len(axes) != dim:
        raise ValueError(f"grid has {len(axes)} axes but the target has dimension {dim}")
    return evaluate.EvaluationGrid.regular(axes)


def _cmd_run(args) -> int:
    try:
        catalogue = targets.registry()
        if args.target not in catalogue:
            valid = ", ".join(sorted(catalogue))
            print(f"unknown target {args.target!r}; valid targets: {valid}", file=sys.stderr)
            return _EXIT_CONFIG
        if args.threads is None:
            args.threads = int(os.environ.get("MIXLAP_THREADS", os.cpu_count() or 1))
        dlm_instance = None
        if args.target == "dlm":
            dlm_instance = targets.dlm_generate(
                targets.DlmInstance(
                    n=args.dlm_n,
                    prior_a=args.dlm_a,
                    prior_b=args.dlm_b,
                    prior_c=args.dlm_c,
                    prior_d=args.dlm_d,
                    true_lambda_u=args.dlm_lambda_u,
                    true_lambda_v=args.dlm_lambda_v,
                    rng_seed=args.dlm_seed,
                )
            )
        target = targets.make_target(args.target, dlm_instance)
        grid = (
            _parse_grid(args.grid, target.dim)
            if args.grid
            else evaluate.default_grid(target)
        )
        variants = (
            ["original", "modified"] if args.variant == "both" else [args.variant]
        )
        base_cfg = _resolve_config(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG

    out_root = Path(args.out)
    for variant in variants:
        cfg = dataclasses.replace(base_cfg, variant=variant)
        try:
            report = engine.run(target, cfg)
            comparison = evaluate.compare(target, report.mixture, grid)
        except Exception as exc:  # numerical failure surface
            print(f"numerical failure in variant {variant}: {exc}", file=sys.stderr)
            return _EXIT_NUMERICAL
        out_dir = out_root / variant
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "mixture.json").write_text(report.mixture.to_json(sort_keys=True))
        evaluate.write_ordered_csv(comparison, out_dir / "ordered.csv")
        if target.dim == 2:
            evaluate.write_contour_csv(comparison, out_dir / "contour.csv")
        doc = {
            "target": args.target,
            "variant": variant,
            "seed": args.seed,
            "s_stat": comparison.s_stat,
            "n_components": report.n_components,
            "stop_reason": report.stop_reason,
            "wall_time_seconds": report.wall_time,
            "log_shift": report.log_shift,
            "grid": grid.spec(),
            "grid_sensitivity_caveat": (
                "s values depend on the declared grid; compare runs only on "
                "identical grids"
            ),
        }
        if dlm_instance is not None:
            doc["dlm"] = dlm_instance.to_dict()
        (out_dir / "report.json").write_text(json.dumps(doc, sort_keys=True, indent=1))
        stamp = time.strftime("%Y-%m-%dT%H:%M:%S")
        print(
            f"[{stamp}] {args.target} {variant}: n_components={report.n_components} "
            f"s={comparison.s_stat:.6g} stop={report.stop_reason} "
            f"time={report.wall_time:.3f}s -> {out_dir}"
        )
    return 0


def _cmd_compare(args) -> int:
    rows = []
    for d in (args.dir_a, args.dir_b):
        path = Path(d) / "report.json"
        try:
            rows.append(json.loads(path.read_text()))
        except OSError as exc:
            print(f"cannot read {path}: {exc}", file=sys.stderr)
            return _EXIT_CONFIG
    if rows[0]["grid"] != rows[1]["grid"]:
        print("grid specs differ; runs are not comparable:", file=sys.stderr)
        print(json.dumps(rows[0]["grid"]), file=sys.stderr)
        print(json.dumps(rows[1]["grid"]), file=sys.stderr)
        return _EXIT_CONFIG
    print(f"{'target':<14}{'variant':<10}{'n_comp':>7}{'s_stat':>12}{'time_s':>10}")
    for doc in rows:
        print(
            f"{doc['target']:<14}{doc['variant']:<10}{doc['n_components']:>7}"
            f"{doc['s_stat']:>12.6f}{doc['wall_time_seconds']:>10.3f}"
        )
    return 0


def _cmd_list(args) -> int:
    catalogue = targets.registry()
    if args.json:
        print(json.dumps(catalogue, sort_keys=True))
    else:
        for name in sorted(catalogue):
            print(f"{name:<14} dim={catalogue[name]}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "compare":
        return _cmd_compare(args)
    return _cmd_list(args)


if __name__ == "__main__":
    sys.exit(main())
