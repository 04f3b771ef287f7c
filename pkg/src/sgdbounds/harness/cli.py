"""Command-line interface.

Subcommands::

    sgdbounds run     --config cfg.yaml [--out DIR] [--seeds N] [--override-cap]
    sgdbounds certify --config cfg.yaml [--out DIR]
    sgdbounds bound   --config cfg.yaml [--out DIR]
    sgdbounds sweep   --config cfg.yaml --axis optimizer.sigma2 \
                      --values 0,0.01,0.1 [--out DIR] [--seeds N] [--override-cap]

Exit codes: 0 success / all checks pass, 1 check or certificate failure,
2 configuration error (including step-cap violations without override).
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import ConfigError, ExperimentConfig
from .runner import cmd_bound, cmd_certify, cmd_run, cmd_sweep

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sgdbounds",
        description="Simulate SGD/momentum under audited schedules and check "
        "closed-form uniform-boundedness levels.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("run", "run the configured ensemble and evaluate its checks"),
        ("certify", "verify the problem's certificates on shell samples"),
        ("bound", "print the applicable closed-form level and hypotheses"),
        ("sweep", "repeat run over values of one numeric config leaf"),
    ):
        q = sub.add_parser(name, help=doc)
        q.add_argument("--config", required=True, help="path to the YAML config")
        q.add_argument("--out", default=None, help="override the output directory")
        q.add_argument(
            "--seeds", type=int, default=None,
            help="override the seed list with indices 0..N-1",
        )
        q.add_argument(
            "--override-cap", action="store_true",
            help="run even when the schedule fails the step-size audit",
        )
        if name == "sweep":
            q.add_argument(
                "--axis", required=True,
                help="dotted path of the numeric leaf, e.g. optimizer.sigma2",
            )
            q.add_argument(
                "--values", required=True,
                help="comma-separated numeric values",
            )
    return p


def _apply_overrides(cfg: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    if args.out is not None:
        cfg = cfg.with_updates(outputs=args.out)
    if args.seeds is not None:
        cfg = cfg.with_updates(seeds={"count": args.seeds})
    if args.override_cap:
        opt = cfg.optimizer
        opt["override_cap"] = True
        cfg = cfg.with_updates(optimizer=opt)
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(ExperimentConfig.from_file(args.config), args)
    except ConfigError as e:
        print(json.dumps({"error": "config", "message": str(e)}, sort_keys=True))
        return 2
    if args.command == "run":
        return cmd_run(cfg)
    if args.command == "certify":
        return cmd_certify(cfg)
    if args.command == "bound":
        return cmd_bound(cfg)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    except ValueError:
        print(json.dumps({"error": "config", "message": "non-numeric sweep values"},
                         sort_keys=True))
        return 2
    return cmd_sweep(cfg, args.axis, values)


if __name__ == "__main__":
    sys.exit(main())
