"""Command-line entry point: ``hysterm run | presets | check``."""

from __future__ import annotations

import argparse
import json
import sys

from .config import DEFAULTS, ENV_OUT, MODES, load_config
from .errors import HystermError
from .presets import describe_presets


def _cmd_presets(args) -> int:
    for name, desc in describe_presets().items():
        print(f"{name:20s} {desc}")
    print()
    print("defaults:")
    for key, value in DEFAULTS.as_dict().items():
        if key in ("preset", "phi_file", "out_dir"):
            continue
        print(f"  {key:12s} {value}")
    print(f"  {'out_dir':12s} runs/<preset> (overridden by ${ENV_OUT}, then by --out)")
    return 0


def _load(args):
    cfg = load_config(args.config)
    if getattr(args, "mode", None):
        cfg.mode = args.mode
        cfg.validate()
    return cfg


def _cmd_check(args) -> int:
    cfg = _load(args)
    print(json.dumps(cfg.as_dict(), indent=2, sort_keys=True))
    print(f"config ok; output would go to {cfg.resolved_out_dir(args.out)}")
    return 0


def _cmd_run(args) -> int:
    from .experiment import run_experiment

    cfg = _load(args)
    art = run_experiment(cfg, out_dir=args.out)
    print(f"wrote {art.out_dir}")
    if art.failures:
        verdict = "ignored (--allow-fail)" if args.allow_fail else "failing"
        print(f"checks {verdict}: {', '.join(art.failures)}", file=sys.stderr)
    return art.exit_code(args.allow_fail)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hysterm", description="Heat equation with relay hysteresis: free-boundary experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write its artifacts")
    check = sub.add_parser("check", help="validate a config without running it")
    for p in (run, check):
        p.add_argument("--config", required=True, metavar="PATH", help="YAML config file")
        p.add_argument("--out", metavar="DIR", help="output directory (beats $%s and out_dir)" % ENV_OUT)
        p.add_argument("--mode", choices=MODES, help="override the config mode")
    run.add_argument("--allow-fail", action="store_true", help="exit 0 even when a check fails")
    run.set_defaults(func=_cmd_run)
    check.set_defaults(func=_cmd_check)

    presets = sub.add_parser("presets", help="list presets and defaults")
    presets.set_defaults(func=_cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HystermError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
