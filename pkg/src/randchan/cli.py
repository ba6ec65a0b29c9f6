"""Command line entry point: ``randchan <command> [--config PATH] [--seed N] ...``."""

from __future__ import annotations

import argparse
import json
import sys

from . import experiments as ex

COMMANDS = {
    "sample": ex.cmd_sample,
    "verify": ex.cmd_verify,
    "decoherence-scan": ex.cmd_decoherence_scan,
    "invariant": ex.cmd_invariant,
    "simplex": ex.cmd_simplex,
    "spectrum": ex.cmd_spectrum,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="randchan", description="Random quantum channel experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=(fn.__doc__ or "").strip().splitlines()[0])
        p.add_argument("--config", help="YAML experiment config")
        p.add_argument("--seed", type=int, help="base seed (overrides the config)")
        p.add_argument("--samples", type=int, help="samples per grid point (overrides the config)")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--threads", type=int, default=1, help="worker threads; results do not depend on it")
        p.add_argument("--format", choices=("csv", "json"), default="csv", help="table format")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = ex.load_config(args.config, {"seed": args.seed, "samples": args.samples, "out": args.out})
        result = COMMANDS[args.command](cfg, cfg.out, threads=args.threads, fmt=args.format)
    except (ex.ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command == "verify":
        for entry in result:
            print(json.dumps(entry))
        failed = [e for e in result if e["verdict"] != "pass"]
        print(f"{len(result) - len(failed)}/{len(result)} checks passed")
        return 1 if failed else 0
    print(f"wrote outputs to {cfg.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
