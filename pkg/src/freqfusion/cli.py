"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 file format or validation error,
4 shape or configuration error.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import analysis, bench, formats
from .errors import FormatError, ShapeError, ValidationError
from .fixtures import KINDS, make_fixture
from .fusion import FLAG_NAMES, FusionConfig, freqfusion_forward, standard_fusion

EXIT_OK, EXIT_USAGE, EXIT_FORMAT, EXIT_SHAPE = 0, 2, 3, 4

CONFIG_KEYS = {
    "kbar": ("kbar", int),
    "khat": ("khat", int),
    "groups": ("groups", int),
    "reduction": ("reduction", int),
    "enhanced_alpf": ("use_enhanced_initial_alpf", "flag"),
    "enhanced_ahpf": ("use_enhanced_initial_ahpf", "flag"),
    "final_alpf": ("use_final_alpf", "flag"),
    "offset": ("use_offset", "flag"),
    "final_ahpf": ("use_final_ahpf", "flag"),
}
CONFIG_KEYS.update({name: (name, "flag") for name in FLAG_NAMES})
_TRUE = {"1", "true", "on", "yes"}
_FALSE = {"0", "false", "off", "no"}


def _dims(text: str):
    try:
        dims = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected C,H,W integers, got {text!r}") from None
    if len(dims) != 3 or min(dims) < 1:
        raise argparse.ArgumentTypeError(f"expected three positive integers C,H,W, got {text!r}")
    return dims


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {n}")
    return n


def _config_overrides(text: str) -> dict:
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, value = item.partition("=")
        if not sep or key not in CONFIG_KEYS:
            raise argparse.ArgumentTypeError(f"bad config entry {item!r}; keys: {', '.join(sorted(CONFIG_KEYS))}")
        field, kind = CONFIG_KEYS[key]
        if kind == "flag":
            if value.lower() not in _TRUE | _FALSE:
                raise argparse.ArgumentTypeError(f"{key} expects on/off, got {value!r}")
            out[field] = value.lower() in _TRUE
        else:
            try:
                out[field] = int(value)
            except ValueError:
                raise argparse.ArgumentTypeError(f"{key} expects an integer, got {value!r}") from None
    return out


def _read_chw(path) -> np.ndarray:
    t = formats.read_tensor(path)
    return t[None] if t.ndim == 2 else t


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _write_csv(path, header, rows):
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def cmd_fuse(args) -> int:
    x_low, y_high = _read_chw(args.low), _read_chw(args.high)
    if args.baseline:
        fused = standard_fusion(x_low, y_high, args.baseline)
        formats.write_tensor(args.out, fused)
        return EXIT_OK
    config = FusionConfig(x_low.shape[0], **args.config)
    params = formats.read_weights(args.weights, config)
    out = freqfusion_forward(x_low, y_high, config, params)
    formats.write_tensor(args.out, out.fused)
    if args.dump_intermediates:
        os.makedirs(args.dump_intermediates, exist_ok=True)
        dumps = {
            "lpf.fftn": out.lowpass.weights if out.lowpass else None,
            "hpf.fftn": out.highpass.weights if out.highpass else None,
            "offsets.fftn": out.offsets.offsets if out.offsets else None,
            "sim.fftn": out.similarity,
        }
        for name, arr in dumps.items():
            if arr is not None:
                formats.write_tensor(os.path.join(args.dump_intermediates, name), arr)
    return EXIT_OK


def analyze_rows(features, labels, boundary_width=2):
    rep = analysis.sim_report(features, labels, boundary_width)
    return [
        ("intra_sim", rep.mean_intra, rep.boundary_mean_intra),
        ("sim_margin", rep.mean_margin, rep.boundary_mean_margin),
        ("sim_acc", rep.sim_acc, rep.boundary_sim_acc),
    ]


def cmd_analyze(args) -> int:
    features = _read_chw(args.features)
    labels = formats.read_labels(args.labels)
    if features.shape[1:] != labels.shape:
        raise ShapeError(f"features {features.shape[1:]} and labels {labels.shape} differ spatially")
    rows = analyze_rows(features, labels, args.boundary_width)
    _write_csv(args.out_csv, ["metric", "overall", "boundary"], [(n, _fmt(a), _fmt(b)) for n, a, b in rows])
    return EXIT_OK


def cmd_spectrum(args) -> int:
    x = _read_chw(args.input)
    if args.mode == "power":
        spec = analysis.radial_power_spectrum(x, args.bins)
    else:
        spec = analysis.radial_amplitude_spectrum(x, args.bins)
    rows = [(_fmt(b), _fmt(v), _fmt(lv)) for b, v, lv in zip(spec.bins, spec.values, spec.log_values)]
    _write_csv(args.out_csv, ["bin_center", "value", "log_value"], rows)
    return EXIT_OK


def cmd_fixture(args) -> int:
    kw = {}
    if args.kind == "pyramid":
        kw["levels"] = args.levels
        if args.value is not None:
            kw["value"] = args.value
    try:
        fx = make_fixture(args.kind, args.seed, args.dims, args.sigma, **kw)
    except ValueError as exc:
        raise ShapeError(str(exc)) from exc
    prefix = args.out_prefix
    if args.kind == "pyramid":
        paths = [f"{prefix}_l{k}.fftn" for k in range(len(fx.tensors))]
    else:
        paths = [f"{prefix}.fftn"]
    for path, t in zip(paths, fx.tensors):
        formats.write_tensor(path, t)
    if fx.labels is not None:
        paths.append(f"{prefix}.fflb")
        formats.write_labels(paths[-1], fx.labels)
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_bench(args) -> int:
    res = bench.run_bench(args.op, args.size, args.iters, kernel_size=args.kernel_size, workers=args.workers)
    header = ["op", "size", "iters", "ns_per_iter", "gflops_effective", "naive_ns_per_iter", "speedup", "workers"]
    row = (
        res.op,
        "x".join(map(str, res.dims)),
        str(res.iters),
        _fmt(res.ns_per_iter),
        _fmt(res.gflops_effective),
        _fmt(res.naive_ns_per_iter),
        _fmt(res.speedup),
        str(res.workers),
    )
    _write_csv(args.out_csv, header, [row])
    print(",".join(row))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="freqfusion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fuse", help="fuse a low-level and a high-level feature")
    p.add_argument("--low", required=True, help="low-level feature (C, 2H, 2W)")
    p.add_argument("--high", required=True, help="high-level feature (C, H, W)")
    p.add_argument("--weights", help="weight file (required unless --baseline)")
    p.add_argument("--out", required=True)
    p.add_argument("--config", type=_config_overrides, default={}, help="k=v overrides, e.g. kbar=3,offset=off")
    p.add_argument("--dump-intermediates", metavar="DIR")
    p.add_argument("--baseline", choices=("nearest", "bilinear"), help="run plain upsample-and-add instead")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("analyze", help="similarity metrics of a feature map")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--boundary-width", type=_positive, default=2)
    p.add_argument("--out-csv", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("spectrum", help="radially binned frequency spectrum")
    p.add_argument("--input", required=True)
    p.add_argument("--bins", type=_positive, default=32)
    p.add_argument("--mode", choices=("power", "amplitude"), default="power")
    p.add_argument("--out-csv", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("fixture", help="write a deterministic synthetic fixture")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--dims", type=_dims, required=True, help="C,H,W")
    p.add_argument("--sigma", type=float)
    p.add_argument("--levels", type=_positive, default=3, help="pyramid levels")
    p.add_argument("--value", type=float, help="constant pyramid value")
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_fixture)

    p = sub.add_parser("bench", help="time a kernel against its naive reference")
    p.add_argument("--op", required=True, choices=bench.OPS)
    p.add_argument("--size", type=_dims, required=True, help="C,H,W")
    p.add_argument("--iters", type=_positive, required=True)
    p.add_argument("--kernel-size", type=_positive, default=5)
    p.add_argument("--workers", type=_positive)
    p.add_argument("--out-csv", required=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "fuse" and not args.baseline and not args.weights:
        parser.print_usage(sys.stderr)
        print("freqfusion fuse: error: --weights is required unless --baseline is given", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (FormatError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except ShapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SHAPE


if __name__ == "__main__":
    sys.exit(main())
