"""Command-line interface.

Five subcommands: `curve` exports a scan order, `metrics` writes a
locality report, `kernel` prints a convolution kernel, `block` runs the
directional scan block on a grid, and `verify` executes the runtime
property suites.

Option values resolve in precedence order: explicit flags, then the
TOML file named by --config, then FRACTALSCAN_* environment variables,
then built-in defaults. Exit codes are 0 (success), 1 (runtime or
verification failure), and 2 (usage error).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Any, Callable, Mapping

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import block as blk
from . import curves, metrics, ssm, verify
from .errors import FractalScanError

COMMANDS = ("curve", "metrics", "kernel", "block", "verify")
ENV_PREFIX = "FRACTALSCAN_"
DEFAULT_METRIC_SPECS = ("hilbert", "raster", "boustrophedon", "morton")
METRIC_FORMATS = ("csv", "json")

_EPILOG = (
    "Option precedence: flags override values from --config (a flat TOML "
    "table), which override FRACTALSCAN_<NAME> environment variables, "
    "which override built-in defaults. Config keys and environment names "
    "use underscores, e.g. state_size / FRACTALSCAN_STATE_SIZE."
)


@dataclass(frozen=True)
class CliConfig:
    """One resolved invocation: the command plus its effective options."""

    command: str
    options: Mapping[str, Any]
    in_path: str | None = None
    out_path: str | None = None


def _as_int(raw: Any) -> int:
    if isinstance(raw, bool):
        raise ValueError("expected an integer")
    if isinstance(raw, int):
        return raw
    return int(str(raw).strip())


def _as_choice(choices: tuple[str, ...]) -> Callable[[Any], str]:
    def cast(raw: Any) -> str:
        text = str(raw).strip().lower()
        if text not in choices:
            raise ValueError(f"expected one of: {', '.join(choices)}")
        return text

    return cast


def _as_spec_list(raw: Any) -> list[str]:
    if isinstance(raw, str):
        return [part.strip() for part in raw.split(",")]
    if isinstance(raw, (list, tuple)):
        return [str(item) for item in raw]
    raise ValueError("expected a list of curve specs")


class _Resolver:
    """Looks up option values through the documented precedence chain."""

    def __init__(
        self,
        parser: argparse.ArgumentParser,
        args: argparse.Namespace,
        environ: Mapping[str, str],
    ) -> None:
        self._parser = parser
        self._args = args
        self._environ = environ
        self._file_values = self._load_file(getattr(args, "config", None))

    def _load_file(self, path: str | None) -> dict:
        if path is None:
            return {}
        try:
            with open(path, "rb") as handle:
                return tomllib.load(handle)
        except OSError as exc:
            self._parser.error(f"cannot read config file: {exc}")
        except tomllib.TOMLDecodeError as exc:
            self._parser.error(f"invalid config file: {exc}")
        raise AssertionError("parser.error does not return")

    def value(self, name: str, cast: Callable[[Any], Any], default: Any) -> Any:
        flag = getattr(self._args, name, None)
        if flag is not None:
            return flag
        if name in self._file_values:
            return self._cast(name, self._file_values[name], cast, "config file")
        env_key = ENV_PREFIX + name.upper()
        if env_key in self._environ:
            return self._cast(name, self._environ[env_key], cast, env_key)
        return default

    def _cast(
        self, name: str, raw: Any, cast: Callable[[Any], Any], source: str
    ) -> Any:
        try:
            return cast(raw)
        except (TypeError, ValueError) as exc:
            self._parser.error(f"bad value for {name} from {source}: {exc}")
        raise AssertionError("parser.error does not return")


def _write_bytes(payload: bytes, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "wb") as handle:
            handle.write(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()


# -------------------------------------------------------- option parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fractalscan",
        description=(
            "Locality-preserving scan orders for 2D grids, locality "
            "metrics, and a minimal selective state-space scan engine."
        ),
        epilog=_EPILOG,
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML file with option defaults")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")

    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    curve = sub.add_parser(
        "curve", parents=[common], help="generate a scan order and export it"
    )
    curve.add_argument("--kind", choices=curves.CURVE_KINDS, help="curve kind (default hilbert)")
    curve.add_argument("--rows", type=int, help="grid rows (default 8)")
    curve.add_argument("--cols", type=int, help="grid cols (default 8)")
    curve.add_argument(
        "--depth",
        type=int,
        help="hilbert recursion depth; sets a square 2^depth grid",
    )
    curve.add_argument(
        "--direction", type=int, choices=curves.DIRECTIONS, help="traversal direction (default 1)"
    )
    curve.add_argument("--shift", type=int, help="cyclic row shift (default 0)")
    curve.add_argument(
        "--format", choices=curves.EXPORT_FORMATS, help="export format (default json)"
    )

    metr = sub.add_parser(
        "metrics", parents=[common], help="compare locality metrics across curve specs"
    )
    metr.add_argument(
        "--spec",
        action="append",
        metavar="KIND[:DIR[:SHIFT]]",
        help="curve spec; repeatable (default: hilbert, raster, boustrophedon, morton)",
    )
    metr.add_argument("--rows", type=int, help="grid rows (default 8)")
    metr.add_argument("--cols", type=int, help="grid cols (default 8)")
    metr.add_argument("--format", choices=METRIC_FORMATS, help="report format (default csv)")

    kern = sub.add_parser(
        "kernel", parents=[common], help="print the convolution kernel of a seeded stable system"
    )
    kern.add_argument("--state-size", dest="state_size", type=int, help="state dimension (default 8)")
    kern.add_argument("--length", type=int, help="kernel length (default 32)")
    kern.add_argument("--seed", type=int, help="parameter seed (default 0)")

    block = sub.add_parser(
        "block", parents=[common], help="run the four-direction scan block on a grid"
    )
    block.add_argument("--in", dest="in_path", metavar="PATH", help="grid JSON input file")
    block.add_argument("--kind", choices=curves.CURVE_KINDS, help="curve kind (default hilbert)")
    block.add_argument("--rows", type=int, help="generated grid rows (default 8; ignored with --in)")
    block.add_argument("--cols", type=int, help="generated grid cols (default 8; ignored with --in)")
    block.add_argument(
        "--channels", type=int, help="generated grid channels (default 1; ignored with --in)"
    )
    block.add_argument("--state-size", dest="state_size", type=int, help="state dimension (default 8)")
    block.add_argument("--merge", choices=blk.MERGE_RULES, help="merge rule (default sum)")
    block.add_argument("--shift", type=int, help="cyclic row shift for every direction (default 0)")
    block.add_argument(
        "--param-mode",
        dest="param_mode",
        choices=blk.PARAM_MODES,
        help="selective parameterization (default seeded)",
    )
    block.add_argument("--seed", type=int, help="seed for parameters and generated input (default 0)")

    ver = sub.add_parser(
        "verify", parents=[common], help="run runtime property suites and report pass/fail"
    )
    ver.add_argument("--suite", choices=verify.SUITE_NAMES, help="suite to run (default all)")
    ver.add_argument("--seed", type=int, help="suite seed (default 0)")
    return parser


def _resolve_shape(
    parser: argparse.ArgumentParser, res: _Resolver
) -> curves.GridShape:
    rows = res.value("rows", _as_int, 8)
    cols = res.value("cols", _as_int, 8)
    if rows < 1 or cols < 1:
        parser.error("rows and cols must be >= 1")
    return curves.GridShape(rows, cols)


def _parse_spec_token(
    parser: argparse.ArgumentParser, token: str, shape: curves.GridShape
) -> curves.CurveSpec:
    text = str(token).strip()
    if not text:
        parser.error("curve spec must not be empty")
    parts = [part.strip() for part in text.split(":")]
    if len(parts) > 3:
        parser.error(f"curve spec {token!r}: expected KIND[:DIR[:SHIFT]]")
    try:
        direction = int(parts[1]) if len(parts) > 1 and parts[1] else 1
        shift = int(parts[2]) if len(parts) > 2 and parts[2] else 0
    except ValueError:
        parser.error(f"curve spec {token!r}: direction and shift must be integers")
        raise AssertionError
    try:
        return curves.CurveSpec(parts[0].lower(), shape, direction, shift)
    except ValueError as exc:
        parser.error(f"curve spec {token!r}: {exc}")
        raise AssertionError


def _resolve_curve(
    parser: argparse.ArgumentParser, args: argparse.Namespace, res: _Resolver
) -> CliConfig:
    kind = res.value("kind", _as_choice(curves.CURVE_KINDS), curves.HILBERT)
    depth = res.value("depth", _as_int, None)
    direction = res.value("direction", _as_int, 1)
    shift = res.value("shift", _as_int, 0)
    fmt = res.value("format", _as_choice(curves.EXPORT_FORMATS), "json")
    if depth is not None:
        if kind != curves.HILBERT:
            parser.error("--depth applies only to hilbert curves")
        if not 1 <= depth <= curves.MAX_DEPTH:
            parser.error(f"depth must be between 1 and {curves.MAX_DEPTH}")
        shape = curves.GridShape(1 << depth, 1 << depth)
    else:
        shape = _resolve_shape(parser, res)
    try:
        spec = curves.CurveSpec(kind, shape, direction, shift)
    except ValueError as exc:
        parser.error(str(exc))
        raise AssertionError
    return CliConfig("curve", {"spec": spec, "format": fmt}, out_path=args.out)


def _resolve_metrics(
    parser: argparse.ArgumentParser, args: argparse.Namespace, res: _Resolver
) -> CliConfig:
    shape = _resolve_shape(parser, res)
    fmt = res.value("format", _as_choice(METRIC_FORMATS), "csv")
    tokens = args.spec
    if tokens is None:
        tokens = res.value("spec", _as_spec_list, list(DEFAULT_METRIC_SPECS))
    if not tokens:
        parser.error("at least one curve spec is required")
    specs = [_parse_spec_token(parser, token, shape) for token in tokens]
    return CliConfig("metrics", {"specs": specs, "format": fmt}, out_path=args.out)


def _resolve_kernel(
    parser: argparse.ArgumentParser, args: argparse.Namespace, res: _Resolver
) -> CliConfig:
    state_size = res.value("state_size", _as_int, 8)
    length = res.value("length", _as_int, 32)
    seed = res.value("seed", _as_int, 0)
    if state_size < 1:
        parser.error("state-size must be >= 1")
    if length < 1:
        parser.error("length must be >= 1")
    options = {"state_size": state_size, "length": length, "seed": seed}
    return CliConfig("kernel", options, out_path=args.out)


def _resolve_block(
    parser: argparse.ArgumentParser, args: argparse.Namespace, res: _Resolver
) -> CliConfig:
    shape = _resolve_shape(parser, res)
    channels = res.value("channels", _as_int, 1)
    if channels < 1:
        parser.error("channels must be >= 1")
    kind = res.value("kind", _as_choice(curves.CURVE_KINDS), curves.HILBERT)
    state_size = res.value("state_size", _as_int, 8)
    merge = res.value("merge", _as_choice(blk.MERGE_RULES), "sum")
    shift = res.value("shift", _as_int, 0)
    param_mode = res.value("param_mode", _as_choice(blk.PARAM_MODES), "seeded")
    seed = res.value("seed", _as_int, 0)
    if state_size < 1:
        parser.error("state-size must be >= 1")
    options = {
        "shape": shape,
        "channels": channels,
        "kind": kind,
        "state_size": state_size,
        "merge": merge,
        "shift": shift,
        "param_mode": param_mode,
        "seed": seed,
    }
    return CliConfig("block", options, in_path=args.in_path, out_path=args.out)


def _resolve_verify(
    parser: argparse.ArgumentParser, args: argparse.Namespace, res: _Resolver
) -> CliConfig:
    suite = res.value("suite", _as_choice(verify.SUITE_NAMES), "all")
    seed = res.value("seed", _as_int, 0)
    return CliConfig("verify", {"suite": suite, "seed": seed}, out_path=args.out)


_RESOLVERS = {
    "curve": _resolve_curve,
    "metrics": _resolve_metrics,
    "kernel": _resolve_kernel,
    "block": _resolve_block,
    "verify": _resolve_verify,
}


# ------------------------------------------------------------- commands


def cmd_curve(config: CliConfig) -> int:
    order = curves.build_order(config.options["spec"])
    _write_bytes(curves.export_order(order, config.options["format"]), config.out_path)
    return 0


def cmd_metrics(config: CliConfig) -> int:
    reports = metrics.compare_orders(config.options["specs"])
    if config.options["format"] == "csv":
        payload = metrics.reports_to_csv(reports)
    else:
        payload = metrics.reports_to_json(reports)
    _write_bytes(payload, config.out_path)
    return 0


def cmd_kernel(config: CliConfig) -> int:
    rng = np.random.default_rng(config.options["seed"])
    params = ssm.random_stable_params(rng, config.options["state_size"])
    kernel = ssm.build_kernel(ssm.discretize_zoh(params), config.options["length"])
    header = ",".join(f"k{i}" for i in range(kernel.size))
    row = ",".join(repr(float(value)) for value in kernel)
    _write_bytes(f"{header}\n{row}\n".encode("utf-8"), config.out_path)
    return 0


def cmd_block(config: CliConfig) -> int:
    opts = config.options
    if config.in_path:
        with open(config.in_path, "r", encoding="utf-8") as handle:
            grid = blk.grid_from_json(handle.read())
    else:
        shape = opts["shape"]
        rng = np.random.default_rng(opts["seed"])
        data = rng.standard_normal((shape.rows, shape.cols, opts["channels"]))
        grid = blk.PatchGrid(shape, data)
    block_config = blk.BlockConfig(
        curve_kind=opts["kind"],
        state_size=opts["state_size"],
        merge_rule=opts["merge"],
        shift=opts["shift"],
        param_seed=opts["seed"],
        param_mode=opts["param_mode"],
    )
    out = blk.block_forward(grid, block_config)
    _write_bytes(blk.grid_to_json(out), config.out_path)
    return 0


def cmd_verify(config: CliConfig) -> int:
    suite = config.options["suite"]
    seed = config.options["seed"]
    results = verify.run_suite(suite, seed)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        suffix = f": {result.detail}" if result.detail else ""
        sys.stdout.write(f"{status} {result.name}{suffix}\n")
    sys.stdout.flush()
    summary = verify.summarize(suite, seed, results)
    payload = (json.dumps(summary, indent=2) + "\n").encode("utf-8")
    if config.out_path:
        _write_bytes(payload, config.out_path)
    else:
        _write_bytes(payload, None)
    return 0 if summary["passed"] else 1


_HANDLERS = {
    "curve": cmd_curve,
    "metrics": cmd_metrics,
    "kernel": cmd_kernel,
    "block": cmd_block,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    resolver = _Resolver(parser, args, os.environ)
    config = _RESOLVERS[args.command](parser, args, resolver)
    try:
        return _HANDLERS[args.command](config)
    except (FractalScanError, OSError) as exc:
        print(f"fractalscan: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"fractalscan: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
