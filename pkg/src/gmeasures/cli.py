"""Command-line entry point.

Every subcommand builds one experiment config and hands it to
:func:`gmeasures.runner.run`.  Exit status is 0 on success and the error's
``exit_status`` otherwise (2 validation, 3 resource cap, 4 ordering
violated, 5 construction mismatch, 6 capability or not applicable).  Errors
are printed to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import load_config, parse_config
from .errors import GMeasureError, ValidationError
from .runner import list_experiments, preset_config, run

SUBCOMMANDS = {
    "criteria": "criteria",
    "sample": "sample",
    "marginal-series": "marginal-series",
    "couple": "couple",
    "beta": "beta",
    "overflow": "overflow",
    "appendix-tree": "appendix-tree",
    "cesaro": "cesaro",
    "summability": "summability",
    "spinflip": "spinflip-conditional",
}


def _json_arg(text: str):
    """JSON literal, or ``@path`` to read JSON from a file."""
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"not valid JSON: {text!r} ({exc.msg})") from None


def _param(text: str):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise ValidationError(f"--param expects key=value, got {text!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed (overrides the config)")
    p.add_argument("--out", default=None, help="directory for result.json, CSV payloads and diagnostics.json")
    p.add_argument("--max-exact-states", type=int, default=None, help="cap on live states in the exact engine")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gmeasures", description="g-measures and variable-length memory chains")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a JSON config or a named preset")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to an experiment config (JSON)")
    src.add_argument("--preset", help="name of a preset experiment")
    _common(p)

    sub.add_parser("list-experiments", help="list the preset experiments")

    for name, op in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run the {op} operation")
        p.add_argument("--config", help="config file to start from; flags below override it")
        p.add_argument("--model", type=_json_arg, default=None, help="model descriptor as JSON or @file")
        p.add_argument("--past", default=None, help='anchored past, e.g. "(0)1"')
        p.add_argument("--param", action="append", type=_param, default=[], metavar="KEY=VALUE",
                       help="operation parameter; VALUE is parsed as JSON when possible")
        _common(p)
    return parser


def _config_from_args(args) -> dict:
    if args.command == "run":
        if args.preset:
            data = preset_config(args.preset)
        else:
            data = load_config(args.config).model_dump(mode="json")
    else:
        op = SUBCOMMANDS[args.command]
        data = load_config(args.config).model_dump(mode="json") if args.config else {"operation": op}
        if data["operation"] != op:
            raise ValidationError(f"config operation {data['operation']!r} does not match subcommand {args.command!r}")
        if args.model is not None:
            data["model"] = args.model
        if args.past is not None:
            data["past"] = args.past
        params = dict(data.get("params", {}))
        params.update(dict(args.param))
        data["params"] = params
    if args.seed is not None:
        data["seed"] = args.seed
    if args.max_exact_states is not None:
        data.setdefault("caps", {})["max_exact_states"] = args.max_exact_states
    if args.out is not None:
        data["out"] = args.out
    return data


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "list-experiments":
            print(json.dumps(list_experiments(), indent=2))
            return 0
        cfg = parse_config(_config_from_args(args))
        bundle = run(cfg)
        if cfg.out:
            files = bundle.write(cfg.out)
            print(json.dumps({"schema": bundle.schema, "written": files}, indent=2))
        else:
            sys.stdout.write(bundle.result_json())
        return 0
    except GMeasureError as exc:
        print(json.dumps(exc.to_dict()), file=sys.stderr)
        return exc.exit_status


if __name__ == "__main__":
    sys.exit(main())
