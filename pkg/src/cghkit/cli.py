"""Command-line front end.

Subcommands: ``generate`` (one hologram from a PNG target), ``batch``
(manifest-driven runs), ``export`` (render an ``.hgi`` field to PNG),
``info`` (metadata and checksum of an ``.hgi``), ``params`` (schema dump
and parameter-file validation). Machine-readable results go to stdout as
``key=value`` tokens, diagnostics to stderr. Exit codes: 0 success, 1
validation error, 2 runtime/I-O error.
"""

from __future__ import annotations

import argparse
import os
import signal
import sys
import threading

import numpy as np

from .algorithms import OSPR
from .controller import configure_run, execute, load_manifest, load_target, run_batch, save_outputs
from .errors import (
    CghError,
    DuplicateIdError,
    HiddenPathError,
    MalformedJsonError,
    MalformedManifestError,
    OutOfRangeError,
    TypeMismatchError,
    UnknownKeyError,
    UnknownPathError,
    ValidationFailedError,
    VersionMismatchError,
)
from .hierarchy import (
    BooleanOption,
    DoubleOption,
    IntegerOption,
    PathListOption,
    PathOption,
    SelectOption,
    TextOption,
)
from .image import SCALES, TRANSFORMS, VIEWS, ViewKey, render
from .propagation import propagate
from .schema import PATH_RESOLUTION_X, PATH_RESOLUTION_Y, build_schema
from .serialio import (
    apply_values,
    deserialize_params,
    export_png,
    inspect_field,
    load_field,
    serialize_params,
)

_VALIDATION_ERRORS = (
    UnknownPathError,
    HiddenPathError,
    OutOfRangeError,
    TypeMismatchError,
    UnknownKeyError,
    VersionMismatchError,
    MalformedJsonError,
    MalformedManifestError,
    DuplicateIdError,
    ValidationFailedError,
    ValueError,
)


class _Parser(argparse.ArgumentParser):
    """Argument errors are validation errors: exit 1, message on stderr."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self.prog + ": error: " + message) from None


def _build_parser():
    parser = _Parser(prog="cghkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate one hologram from a PNG target")
    gen.add_argument("--target", required=True, help="target image (PNG; RGB uses luminance)")
    gen.add_argument("--params", help="parameter JSON applied over the schema defaults")
    gen.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="PATH=VALUE",
        help="override one option (repeatable)",
    )
    gen.add_argument("--out", required=True, help="output .hgi file")
    gen.add_argument("--export-replay", help="also write the replay intensity as PNG")

    bat = sub.add_parser("batch", help="run a job manifest")
    bat.add_argument("--manifest", required=True, help="JSON array of jobs")
    bat.add_argument("--workers", type=int, default=1, help="concurrent jobs (default 1)")
    bat.add_argument("--out-dir", required=True, help="output directory for .hgi and results.csv")

    exp = sub.add_parser("export", help="render an .hgi field to PNG")
    exp.add_argument("--in", dest="infile", required=True, help="input .hgi file")
    exp.add_argument("--view", default="amplitude", help="one of " + ", ".join(VIEWS))
    exp.add_argument("--transform", default="none", help="one of " + ", ".join(TRANSFORMS))
    exp.add_argument("--colormap", default="gray", help="gray or viridis")
    exp.add_argument("--scale", default="linear", help="one of " + ", ".join(SCALES))
    exp.add_argument("--out", required=True, help="output PNG file")

    inf = sub.add_parser("info", help="print dimensions, checksum state and metadata")
    inf.add_argument("--in", dest="infile", required=True, help="input .hgi file")

    par = sub.add_parser("params", help="dump the schema or validate a parameter file")
    group = par.add_mutually_exclusive_group(required=True)
    group.add_argument("--schema", action="store_true", help="print the default tree as JSON")
    group.add_argument("--validate", metavar="FILE", help="check a parameter file ('-' = stdin)")

    return parser


def _coerce_cli_value(tree, path, raw):
    """Convert a --set string to the option's value type."""
    option = tree.resolve_option(path, visible_only=False)
    if isinstance(option, IntegerOption):
        return int(raw)
    if isinstance(option, DoubleOption):
        return float(raw)
    if isinstance(option, BooleanOption):  # covers the with-children variant
        lowered = raw.lower()
        if lowered not in ("true", "false"):
            raise TypeMismatchError(path, "expected true or false")
        return lowered == "true"
    if isinstance(option, PathListOption):
        return [part for part in raw.split(",") if part]
    if isinstance(option, (SelectOption, TextOption, PathOption)):
        return raw
    raise UnknownPathError(path)


def _sigint_cancel():
    """Install a SIGINT handler that raises the cancel flag; returns (event, restore)."""
    cancel = threading.Event()
    try:
        previous = signal.signal(signal.SIGINT, lambda *_: cancel.set())
    except ValueError:  # not the main thread
        return cancel, lambda: None
    return cancel, lambda: signal.signal(signal.SIGINT, previous)


def _cmd_generate(args):
    tree = build_schema()
    if args.params:
        with open(args.params, "r", encoding="utf-8") as fh:
            tree = deserialize_params(fh.read(), tree)
    pairs = []
    for item in args.set:
        path, sep, raw = item.partition("=")
        if not sep:
            raise ValueError(f"--set expects PATH=VALUE, got {item!r}")
        try:
            pairs.append((path, _coerce_cli_value(tree, path, raw)))
        except ValueError:
            raise TypeMismatchError(path, f"cannot parse {raw!r}") from None
    apply_values(tree, pairs)

    resolution = (tree.get(PATH_RESOLUTION_X), tree.get(PATH_RESOLUTION_Y))
    target = load_target(args.target, resolution)
    cfg = configure_run(tree)
    cancel, restore = _sigint_cancel()
    try:
        outputs, report = execute(cfg, target, cancel=cancel)
    finally:
        restore()
    out_dir = os.path.dirname(args.out) or "."
    save_outputs(outputs, out_dir, os.path.basename(args.out))
    print(f"seed={report.seed_used}")
    print(
        f"error={report.final_error:.12g} "
        f"efficiency={report.efficiency:.12g} "
        f"runtime_ms={report.runtime_ms:.3f}"
    )
    if args.export_replay:
        if cfg.algorithm == OSPR:
            intensity = np.zeros(target.shape)
            for frame in outputs.fields:
                replay = propagate(frame, cfg.propagation)
                intensity += replay.real**2 + replay.imag**2
            replay = np.sqrt(intensity / max(1, len(outputs.fields)))
        else:
            replay = propagate(outputs.fields[0], cfg.propagation)
        export_png(render(replay, ViewKey(view="intensity")), args.export_replay)
    return 0


def _cmd_batch(args):
    jobs = load_manifest(args.manifest)
    cancel, restore = _sigint_cancel()
    try:
        summary = run_batch(jobs, workers=args.workers, out_dir=args.out_dir, cancel=cancel)
    finally:
        restore()
    print(f"total={summary.total} succeeded={summary.succeeded} failed={summary.failed}")
    return 0 if summary.failed == 0 else 2


def _cmd_export(args):
    key = ViewKey(args.transform, args.view, args.colormap, args.scale)
    field, _meta = load_field(args.infile)
    export_png(render(field, key), args.out)
    return 0


def _cmd_info(args):
    header, meta, checksum_ok = inspect_field(args.infile)
    print(f"width={header['width']}")
    print(f"height={header['height']}")
    print(f"checksum={'OK' if checksum_ok else 'FAIL'}")
    print(f"algorithm={meta.algorithm}")
    print(f"seed={meta.seed}")
    print(f"final_error={meta.error_final:.12g}")
    print(f"iterations={meta.iterations}")
    print(f"timestamp={meta.timestamp}")
    print(f"app_version={meta.app_version}")
    return 0 if checksum_ok else 2


def _cmd_params(args):
    if args.schema:
        sys.stdout.write(serialize_params(build_schema()))
        return 0
    if args.validate == "-":
        text = sys.stdin.read()
    else:
        with open(args.validate, "r", encoding="utf-8") as fh:
            text = fh.read()
    deserialize_params(text, build_schema())
    print("OK")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "batch": _cmd_batch,
    "export": _cmd_export,
    "info": _cmd_info,
    "params": _cmd_params,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_info:
        if isinstance(exit_info.code, str):
            print(exit_info.code, file=sys.stderr)
            return 1
        return int(exit_info.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except _VALIDATION_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (CghError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
