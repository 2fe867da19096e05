"""Command-line front end: ``edmatch transfer | metrics | bench``.

Settings come from command-line flags, then an optional flat ``key=value``
config file (``--config``), then built-in defaults, in that order of
precedence.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import io
from .core import FeatureMap
from .edm import EdmConfig, edm, strength
from .ehs import collision_report, match_channelwise
from .filters import MAX_FILTERS, default_bank
from .gaussian import adain, wct
from .metrics import RNG_STREAM, SwdConfig, metric_report

METHODS = ("edm", "ehs", "adain", "wct", "hs")
COLOR_SPACES = ("rgb", "lab")
METRIC_NAMES = ("content", "gram", "mean_std", "histogram_l2", "cmd", "swd")


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    method: str = "edm"
    filter_count: int = MAX_FILTERS
    alpha: float = 1.0
    seed: int = 0
    swd_directions_multiplier: int = 4
    bins: int = 256
    cmd_order: int = 5
    color_space: str = "rgb"
    correlate: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise UsageError(f"method: must be one of {', '.join(METHODS)}, got {self.method!r}")
        if not 1 <= self.filter_count <= MAX_FILTERS:
            raise UsageError(f"filters: must be in 1..{MAX_FILTERS}, got {self.filter_count}")
        if not 0.0 <= self.alpha <= 1.0:
            raise UsageError(f"alpha: must be in [0, 1], got {self.alpha}")
        if self.seed < 0:
            raise UsageError(f"seed: must be >= 0, got {self.seed}")
        if self.swd_directions_multiplier < 1:
            raise UsageError(f"swd-mult: must be >= 1, got {self.swd_directions_multiplier}")
        if self.bins < 1:
            raise UsageError(f"bins: must be >= 1, got {self.bins}")
        if self.cmd_order < 1:
            raise UsageError(f"cmd-order: must be >= 1, got {self.cmd_order}")
        if self.color_space not in COLOR_SPACES:
            raise UsageError(
                f"color-space: must be one of {', '.join(COLOR_SPACES)}, got {self.color_space!r}"
            )


# config-file key / flag name -> RunConfig field
_ALIASES = {
    "method": "method",
    "filters": "filter_count",
    "filter_count": "filter_count",
    "alpha": "alpha",
    "seed": "seed",
    "swd_mult": "swd_directions_multiplier",
    "swd_directions_multiplier": "swd_directions_multiplier",
    "bins": "bins",
    "cmd_order": "cmd_order",
    "color_space": "color_space",
    "correlate": "correlate",
}


def _coerce(name: str, raw: str):
    types = {f.name: f.type for f in fields(RunConfig)}
    kind = types[name]
    try:
        if kind == "bool":
            low = raw.strip().lower()
            if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                raise ValueError(raw)
            return low in ("1", "true", "yes", "on")
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise UsageError(f"{name}: cannot parse {raw!r} as {kind}") from None
    return raw.strip()


def load_config_file(path) -> dict:
    """Parse a flat ``key=value`` file into RunConfig field values."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"config: cannot read {path}: {exc.strerror}") from None
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config: line {lineno} is not key=value: {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        name = _ALIASES.get(key.replace("-", "_"))
        if name is None:
            raise UsageError(f"config: unknown key {key!r} on line {lineno}")
        out[name] = _coerce(name, value)
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for name in {f.name for f in fields(RunConfig)}:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    return RunConfig(**values)


def _load(path, cfg: RunConfig) -> tuple[FeatureMap, str]:
    kind = io.input_kind(path)
    if not Path(path).exists():
        raise io.FormatError("path", f"no such file: {path}")
    if kind == "image":
        f = io.read_image(path)
        if cfg.color_space == "lab":
            f = io.rgb_to_lab(f)
        return f, kind
    if cfg.color_space == "lab":
        raise UsageError("color-space: lab applies to image inputs only")
    return io.read_features(path), kind


def _load_pair(a_path, b_path, cfg: RunConfig):
    a, a_kind = _load(a_path, cfg)
    b, b_kind = _load(b_path, cfg)
    if a_kind != b_kind:
        raise UsageError(f"input kind mismatch: {a_path} is {a_kind}, {b_path} is {b_kind}")
    if a.channels != b.channels:
        raise io.FormatError(
            "channels", f"{a_path} has {a.channels} channels, {b_path} has {b.channels}"
        )
    return a, b, a_kind


def run_transform(content: FeatureMap, style: FeatureMap, cfg: RunConfig) -> FeatureMap:
    if cfg.method == "edm":
        return edm(
            content,
            style,
            EdmConfig(filter_count=cfg.filter_count, alpha=cfg.alpha, correlate=cfg.correlate),
        )
    if cfg.method == "ehs":
        out = match_channelwise(content, style, default_bank(cfg.filter_count))
    elif cfg.method == "hs":
        out = match_channelwise(content, style, default_bank(1))
    elif cfg.method == "adain":
        out = adain(content, style)
    else:
        out = wct(content, style)
    return strength(content, out, cfg.alpha)


def cmd_transfer(content_path, style_path, out_path, cfg: RunConfig) -> int:
    content, style, kind = _load_pair(content_path, style_path, cfg)
    out_kind = io.input_kind(out_path)
    if out_kind != kind:
        raise UsageError(f"out: {out_path} is a {out_kind} path but inputs are {kind}")
    result = run_transform(content, style, cfg)
    if kind == "image":
        if cfg.color_space == "lab":
            result = io.lab_to_rgb(result)
        io.write_image(out_path, result)
    else:
        io.write_features(out_path, result)
    return 0


def cmd_metrics(a_path, b_path, cfg: RunConfig, stream=None) -> dict:
    stream = stream or sys.stdout
    a, b, _ = _load_pair(a_path, b_path, cfg)
    report = metric_report(
        a,
        b,
        bins=cfg.bins,
        cmd_order=cfg.cmd_order,
        swd_cfg=SwdConfig(seed=cfg.seed, multiplier=cfg.swd_directions_multiplier),
    ).as_dict()
    for name in METRIC_NAMES:
        print(f"{name}={report[name]!r}", file=stream)
    doc = {
        "metrics": {k: (None if v != v else v) for k, v in report.items()},
        "seed": cfg.seed,
        "swd_directions": cfg.swd_directions_multiplier * a.channels,
        "rng": RNG_STREAM,
        "bins": cfg.bins,
        "cmd_order": cfg.cmd_order,
        "color_space": cfg.color_space,
    }
    print(json.dumps(doc, sort_keys=True), file=stream)
    return report


def format_bench(report) -> str:
    lines = [f"{'k':<4}{'ratio':<12}{'time_ms'}"]
    for k, ratio, elapsed in report.rows():
        lines.append(f"{k:<4d}{ratio:<12.6f}{elapsed * 1e3:.3f}")
    return "\n".join(lines)


def cmd_bench(input_path, max_filters: int, cfg: RunConfig, repeats: int = 5, stream=None):
    stream = stream or sys.stdout
    if not 1 <= max_filters <= MAX_FILTERS:
        raise UsageError(f"max-filters: must be in 1..{MAX_FILTERS}, got {max_filters}")
    if repeats < 5:
        raise UsageError(f"repeats: must be >= 5, got {repeats}")
    f, _ = _load(input_path, cfg)
    report = collision_report(f, max_filters, repeats=repeats)
    print(format_bench(report), file=stream)
    return report


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="FILE", help="flat key=value config file")
    p.add_argument("--color-space", dest="color_space", choices=COLOR_SPACES)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edmatch", description="Exact distribution matching between feature maps."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("transfer", help="match content to style and write the result")
    t.add_argument("content")
    t.add_argument("style")
    t.add_argument("--out", required=True, metavar="PATH")
    t.add_argument("--method", choices=METHODS)
    t.add_argument("--filters", dest="filter_count", type=int, metavar="K")
    t.add_argument("--alpha", type=float)
    t.add_argument(
        "--no-correlate",
        dest="correlate",
        action="store_const",
        const=False,
        help="edm: skip the covariance matching step",
    )
    _add_common(t)

    m = sub.add_parser("metrics", help="print distances between two inputs")
    m.add_argument("a")
    m.add_argument("b")
    m.add_argument("--seed", type=int)
    m.add_argument("--bins", type=int)
    m.add_argument("--cmd-order", dest="cmd_order", type=int)
    m.add_argument("--swd-mult", dest="swd_directions_multiplier", type=int)
    _add_common(m)

    b = sub.add_parser("bench", help="collision ratio and sort time per filter count")
    b.add_argument("input")
    b.add_argument("--max-filters", dest="max_filters", type=int, default=MAX_FILTERS)
    b.add_argument("--repeats", type=int, default=5)
    _add_common(b)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "transfer":
            return cmd_transfer(args.content, args.style, args.out, cfg)
        if args.command == "metrics":
            cmd_metrics(args.a, args.b, cfg)
            return 0
        cmd_bench(args.input, args.max_filters, cfg, repeats=args.repeats)
        return 0
    except (io.FormatError, UsageError, ValueError, OSError) as exc:
        print(f"edmatch: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
