"""Command-line interface.

    arpcheck analyze app.air --mappings DIR [--json] [--verbose] [--estimate over|under] [--dot OUT]
    arpcheck bench corpus/manifest.json --mappings DIR [--lenient] [--json]
    arpcheck diff-mappings DIR FROM TO [--json]
    arpcheck extract-stubs stubs.txt --level N --out FILE

Exit codes for ``analyze``: 0 clean, 1 findings, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .air.parser import AirError, load_app
from .bench import ManifestError, load_manifest, run_bench
from .config import ConfigError, load_config
from .contexts import contexts_to_json
from .dataflow import DataflowError
from .detector import analyze
from .graphs.callgraph import build_call_graph, build_icc, to_dot
from .permspec import MappingError, diff_levels, dump_level, load_store, parse_stubs
from . import report

EXIT_CLEAN, EXIT_FINDINGS, EXIT_INPUT = 0, 1, 2


def _err(msg: str) -> int:
    print(f"arpcheck: error: {msg}", file=sys.stderr)
    return EXIT_INPUT


def cmd_analyze(args) -> int:
    try:
        config = load_config(args.config).with_(estimate=args.estimate)
        if args.verbose:
            config = config.with_(verbose=True)
        store = load_store(args.mappings, config.lav)
        app = load_app(args.app, config.lav)
        result = analyze(app, store, config)
    except (OSError, AirError, MappingError, ConfigError, DataflowError, ValueError) as e:
        return _err(str(e))

    if args.dot:
        cg = build_call_graph(app)
        with open(args.dot, "w", encoding="utf-8") as f:
            f.write(to_dot(cg, build_icc(app, cg)))
    if args.dump_dataflow:
        with open(args.dump_dataflow, "w", encoding="utf-8") as f:
            f.write(result.resolution.to_json())
    if args.dump_contexts:
        with open(args.dump_contexts, "w", encoding="utf-8") as f:
            f.write(contexts_to_json(result.contexts))

    verbose = config.verbose
    if args.json:
        sys.stdout.write(report.to_json(result, verbose))
    else:
        sys.stdout.write(report.to_text(result, verbose))
    if not args.json and not verbose:
        for d in result.diagnostics:
            if d.startswith("warning"):
                print(d, file=sys.stderr)
    return EXIT_FINDINGS if result.visible(False) else EXIT_CLEAN


def cmd_bench(args) -> int:
    try:
        config = load_config(args.config)
        store = load_store(args.mappings, config.lav)
        entries = load_manifest(args.manifest)
    except (OSError, MappingError, ManifestError, ConfigError, ValueError) as e:
        return _err(str(e))
    result = run_bench(entries, store, config, lenient=args.lenient, jobs=args.jobs)
    if args.json:
        sys.stdout.write(json.dumps(result.to_json(), indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(result.table())
        for o in result.failures:
            print(f"failed: {o.entry.name}: {o.error}", file=sys.stderr)
    return EXIT_CLEAN


def cmd_diff(args) -> int:
    try:
        lav = max(load_config(args.config).lav, args.to_level)
        store = load_store(args.mappings, lav)
        rep = diff_levels(store, args.from_level, args.to_level)
    except (OSError, MappingError, ConfigError, ValueError) as e:
        return _err(str(e))
    if args.json:
        sys.stdout.write(json.dumps(rep.to_json(), indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(rep.to_text() + "\n")
    return EXIT_CLEAN


def cmd_extract(args) -> int:
    try:
        with open(args.stubs, encoding="utf-8") as f:
            lm = parse_stubs(f.read(), args.level, load_config(args.config).lav)
    except (OSError, MappingError, ConfigError, ValueError) as e:
        return _err(str(e))
    text = dump_level(lm)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_CLEAN


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arpcheck", description="Runtime-permission misuse detector for AIR apps.")
    parser.add_argument("--config", help="config file (default: $ARPCHECK_CONFIG, else built-in defaults)")
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="analyze one AIR app")
    p.add_argument("app")
    p.add_argument("--mappings", required=True, help="directory of per-level mapping JSON files")
    p.add_argument("--json", action="store_true")
    p.add_argument("--verbose", action="store_true", help="also show suppressed findings and diagnostics")
    p.add_argument("--estimate", choices=("over", "under"))
    p.add_argument("--dot", metavar="OUT", help="write call graph and ICC edges as Graphviz dot")
    p.add_argument("--dump-dataflow", metavar="OUT", help="write resolved permission strings per site as JSON")
    p.add_argument("--dump-contexts", metavar="OUT", help="write extracted calling contexts as JSON")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser(
        "bench", help="run a buggy/patched corpus and print precision/recall",
        description="A patched version with a warning of any kind counts as FP. "
                    "A buggy version counts as TP only with a warning of its expected kind, "
                    "unless --lenient is given.")
    p.add_argument("manifest")
    p.add_argument("--mappings", required=True)
    p.add_argument("--lenient", action="store_true", help="count any warning on a buggy version as TP")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("diff-mappings", help="compare the mappings of two API levels")
    p.add_argument("mappings")
    p.add_argument("from_level", type=int)
    p.add_argument("to_level", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("extract-stubs", help="extract a mapping file from framework stubs")
    p.add_argument("stubs")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_extract)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
