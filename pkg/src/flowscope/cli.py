"""Batch command-line front end.

Subcommands: gen (write a labeled scenario CSV), render (density raster to
PGM), detect (threshold report), corr (correlation matrix to PPM), serve
(run the HTTP service). Exit codes: 0 success, 1 usage, 2 data error.
Reports go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
from dataclasses import replace
from pathlib import Path

from .correlate import correlation_matrix, order_by_correlation
from .flowio import parse_flows, serialize_flows
from .model import KeySchema
from .ops import dataset_pyramid, matrix_ppm, raster_pgm, resolve_viewport
from .query import threshold_report
from .scenario import generate_scenario, preset, spec_from_dict

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

SCHEMA_CHOICES = [s.value for s in KeySchema]


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with exit code 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _write_output(path: str, data: bytes) -> None:
    if path == "-":
        sys.stdout.buffer.write(data)
    else:
        Path(path).write_bytes(data)


def _load_records(args: argparse.Namespace):
    return parse_flows(_read_input(args.input))


def cmd_gen(args: argparse.Namespace) -> int:
    if args.scenario is not None:
        spec = preset(args.scenario, args.seed)
    else:
        spec = spec_from_dict(json.loads(_read_input(args.spec_file)))
        if args.seed is not None:
            spec = replace(spec, seed=args.seed)
    records, labels = generate_scenario(spec)
    _write_output(args.out, serialize_flows(records, labels).encode())
    print(f"wrote {len(records)} records", file=sys.stderr)
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    records = _load_records(args)
    pyramid = dataset_pyramid(records, KeySchema.parse(args.schema), args.bucket)
    vp = resolve_viewport(
        pyramid, args.width, args.height,
        args.t0, args.t1, args.v_lo, args.v_hi, args.norm,
    )
    rr = raster_pgm(pyramid, vp, args.mode, args.level)
    _write_output(args.out, rr.data)
    print(f"norm_used={rr.norm_used!r} level={rr.level}", file=sys.stderr)
    return EXIT_OK


def cmd_detect(args: argparse.Namespace) -> int:
    records = _load_records(args)
    pyramid = dataset_pyramid(records, KeySchema.parse(args.schema), args.bucket)
    rows = threshold_report(pyramid.levels[0], args.threshold)
    for row in rows:
        print(f"{row.key}\t{row.max_failure}\t{row.t_of_max}")
    print(f"{len(rows)} streams above threshold {args.threshold:g}", file=sys.stderr)
    return EXIT_OK


def cmd_corr(args: argparse.Namespace) -> int:
    records = _load_records(args)
    pyramid = dataset_pyramid(records, KeySchema.parse(args.schema), args.bucket)
    base = pyramid.levels[0]
    t_lo = base.t0 if args.t0 is None else args.t0
    t_hi = base.t1 if args.t1 is None else args.t1
    matrix = correlation_matrix(base, t_lo, t_hi)
    ordering = order_by_correlation(matrix, args.order)
    _write_output(args.out, matrix_ppm(matrix, ordering, args.size))
    print(f"n={matrix.n} order={ordering.mode}", file=sys.stderr)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((args.host, args.port))
    except OSError as exc:
        print(f"cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_DATA
    finally:
        probe.close()
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="flowscope", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", parents=[], help="generate a labeled scenario CSV")
    src = gen.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="preset name from the catalog")
    src.add_argument("--spec-file", help="JSON scenario spec file")
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--out", default="-", help="output path, - for stdout")
    gen.set_defaults(func=cmd_gen)

    def add_dataset_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--input", required=True, help="flow CSV path, - for stdin")
        p.add_argument("--schema", choices=SCHEMA_CHOICES, default="sip-dport")
        p.add_argument("--bucket", type=int, default=60, help="bucket width seconds")

    render = sub.add_parser("render", help="render the density raster to PGM")
    add_dataset_args(render)
    render.add_argument("--width", type=int, default=1024)
    render.add_argument("--height", type=int, default=512)
    render.add_argument("--t0", type=float, default=None)
    render.add_argument("--t1", type=float, default=None)
    render.add_argument("--v-lo", type=float, default=None)
    render.add_argument("--v-hi", type=float, default=None)
    render.add_argument("--mode", choices=["linear", "contrast"], default="linear")
    render.add_argument("--norm", type=float, default=None)
    render.add_argument("--level", type=int, default=None)
    render.add_argument("--out", required=True)
    render.set_defaults(func=cmd_render)

    detect = sub.add_parser("detect", help="report streams above a failure threshold")
    add_dataset_args(detect)
    detect.add_argument("--threshold", type=float, required=True)
    detect.set_defaults(func=cmd_detect)

    corr = sub.add_parser("corr", help="render the correlation matrix to PPM")
    add_dataset_args(corr)
    corr.add_argument("--t0", type=float, default=None)
    corr.add_argument("--t1", type=float, default=None)
    corr.add_argument("--order", choices=["weighted", "unweighted"], default="weighted")
    corr.add_argument("--size", type=int, default=256)
    corr.add_argument("--out", required=True)
    corr.set_defaults(func=cmd_corr)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8321)
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
