"""Command-line entry point: one subcommand per experiment kind.

Flags mirror config keys (``n_max`` becomes ``--n-max``).  With
``--config FILE`` the file's values take precedence over flags.  Exit
codes: 0 when the experiment ran (whatever its verdict), 2 for an invalid
configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from ..errors import InvalidConfig, NonemptyRequired
from .config import COMMON_KEYS, KIND_PARAMS, from_dict, load
from .runner import emit_report, run_experiment

_PARSERS = {"int": int, "float": float, "str": str}


def _list_of(conv):
    def parse(text: str):
        return [conv(x) for x in text.replace(";", ",").split(",") if x.strip()]
    return parse


def _sweep_values(text: str):
    return [x.strip() for x in text.split(";" if ";" in text else ",") if x.strip()]


def _flag(key: str) -> str:
    return "--" + key.replace("_", "-")


def _add_key(parser: argparse.ArgumentParser, key: str, tag: str) -> None:
    if tag in ("floats", "ints"):
        conv = _list_of(float if tag == "floats" else int)
        help_ = "comma-separated list"
    elif tag == "any":
        conv = _sweep_values
        help_ = "axis values, comma-separated (use ';' between complex literals like -0.75+0.1j)"
    else:
        conv = _PARSERS[tag]
        help_ = None
    parser.add_argument(_flag(key), dest=key, type=conv, default=argparse.SUPPRESS, help=help_)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holodyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="kind", required=True, metavar="KIND")
    for kind, params in KIND_PARAMS.items():
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", metavar="FILE", help="flat TOML config; its values override flags")
        p.add_argument("--report", metavar="DIR", help="also write plot-ready files into DIR")
        for key, (tag, _) in COMMON_KEYS.items():
            _add_key(p, key, tag)
        merged = dict(params)
        if kind == "sweep":
            for other, extra in KIND_PARAMS.items():
                for key, spec in extra.items():
                    merged.setdefault(key, spec)
        for key, (tag, _) in merged.items():
            _add_key(p, key, tag)
        if kind == "pliss":
            p.add_argument("--sequence-file", metavar="PATH",
                           help="read the sequence from a CSV file ('-' for stdin)")
    return parser


def _read_sequence(path: str):
    fh = sys.stdin if path == "-" else open(path)
    try:
        out = []
        for line in fh:
            line = line.split("#", 1)[0]
            out.extend(float(x) for x in line.replace(";", ",").split(",") if x.strip())
        return out
    finally:
        if fh is not sys.stdin:
            fh.close()


def _collect(args: argparse.Namespace) -> dict:
    data = {"kind": args.kind}
    keys = set(COMMON_KEYS) | set(KIND_PARAMS[args.kind])
    if args.kind == "sweep":
        keys |= set(KIND_PARAMS.get(getattr(args, "sweep_kind", "lyapunov"), {}))
    for key in keys:
        if hasattr(args, key):
            data[key] = getattr(args, key)
    if getattr(args, "sequence_file", None):
        try:
            data["sequence"] = _read_sequence(args.sequence_file)
        except (OSError, ValueError) as exc:
            raise InvalidConfig({"sequence_file": str(exc)}) from None
    if args.config:
        file_cfg = load(args.config).to_dict()
        if file_cfg["kind"] != args.kind:
            raise InvalidConfig({"kind": f"config file is for {file_cfg['kind']!r}, not {args.kind!r}"})
        data.update(file_cfg)
    return data


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = from_dict(_collect(args))
        record = run_experiment(config)
    except InvalidConfig as exc:
        print(f"holodyn: {exc}", file=sys.stderr)
        return 2
    print(json.dumps({"kind": record.kind, "digest": record.digest, "summary": record.summary},
                     indent=2, sort_keys=True))
    print(f"verdict: {record.verdict}")
    if args.report:
        try:
            for path in emit_report([record], args.report):
                print(f"wrote {path}")
        except (OSError, NonemptyRequired) as exc:
            print(f"holodyn: {exc}", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
