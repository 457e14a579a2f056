"""Command-line front end.

Subcommands: ``prune`` (run the pipeline on a tensor file), ``density``
(patch edge densities of an image), ``flops`` (decoder cost model),
``tir`` (top-K overlap between norms and attention).  Exit codes: 0 on
success, 1 for numerical failures, 2 for malformed input files, 3 for
conflicting or incomplete options.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

import numpy as np

from . import __version__
from .costmodel import DecoderCostConfig, calibrate_m, prune_at_layer_flops, total_flops
from .density import DynamicRatioConfig, PatchGrid, patch_density, sobel_magnitude, to_gray
from .diagnostics import tir
from .errors import ConfigConflict, FileFormatError, RTPruneError
from .netpbm import read_netpbm
from .pipeline import DynamicRatio, FixedRatio, PruneRequest, report_as_dict, rtprune
from .tensorio import read_tensor, write_tensor
from .transport import SinkhornConfig

_GRID_RE = re.compile(r"^(\d+)x(\d+)$")


def thread_cap() -> int | None:
    """Validated value of RTPRUNE_THREADS, or None when unset.

    The compute kernels are sequential, so the cap never changes
    results; it is accepted as an upper bound for any future pools.
    """
    raw = os.environ.get("RTPRUNE_THREADS")
    if raw is None:
        return None
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigConflict(f"RTPRUNE_THREADS must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ConfigConflict(f"RTPRUNE_THREADS must be >= 1, got {cap}")
    return cap


def _parse_grid(spec: str) -> tuple[int, int]:
    match = _GRID_RE.match(spec)
    if not match:
        raise ConfigConflict(f"--grid must look like GHxGW (e.g. 16x16), got {spec!r}")
    grid_h, grid_w = int(match.group(1)), int(match.group(2))
    if grid_h < 1 or grid_w < 1:
        raise ConfigConflict(f"--grid sides must be >= 1, got {spec!r}")
    return grid_h, grid_w


def _load_gray(path) -> np.ndarray:
    image = read_netpbm(path)
    if image.ndim == 3:
        return to_gray(image)
    return image.astype(np.float64) / 255.0


def _require_ndim(arr: np.ndarray, ndim: int, path, what: str) -> np.ndarray:
    if arr.ndim != ndim:
        raise FileFormatError(f"{path}: {what} must be {ndim}-D, got {arr.ndim}-D")
    return arr


def cmd_prune(args: argparse.Namespace) -> int:
    if args.dynamic and args.ratio is not None:
        raise ConfigConflict("--ratio and --dynamic are mutually exclusive")
    if not args.dynamic and args.ratio is None:
        raise ConfigConflict("one of --ratio or --dynamic is required")
    if args.dynamic and (args.image is None or args.grid is None):
        raise ConfigConflict("--dynamic requires both --image and --grid")
    if not args.dynamic and (args.image is not None or args.grid is not None):
        raise ConfigConflict("--image and --grid are only valid with --dynamic")
    if args.ratio is not None and not (0.0 <= args.ratio < 1.0):
        raise ConfigConflict(f"--ratio must lie in [0, 1), got {args.ratio}")
    if args.iters < 1:
        raise ConfigConflict(f"--iters must be >= 1, got {args.iters}")
    if not args.temperature > 0.0:
        raise ConfigConflict(f"--temperature must be positive, got {args.temperature}")
    if args.alpha < 0.0:
        raise ConfigConflict(f"--alpha must be >= 0, got {args.alpha}")
    if args.tau < 0.0:
        raise ConfigConflict(f"--tau must be >= 0, got {args.tau}")
    if not (0.0 <= args.r_max < 1.0):
        raise ConfigConflict(f"--r-max must lie in [0, 1), got {args.r_max}")

    tokens = _require_ndim(read_tensor(args.tokens), 2, args.tokens, "token tensor")
    sinkhorn_config = SinkhornConfig(
        iterations=args.iters, z=args.z, temperature=args.temperature, merge_alpha=args.alpha
    )

    image = None
    grid = None
    grid_sides = None
    if args.dynamic:
        image = read_netpbm(args.image)
        grid_sides = _parse_grid(args.grid)
        height, width = image.shape[0], image.shape[1]
        grid = PatchGrid.for_image(height, width, *grid_sides)
        ratio: FixedRatio | DynamicRatio = DynamicRatio(
            DynamicRatioConfig(tau=args.tau, r_max=args.r_max)
        )
    else:
        ratio = FixedRatio(args.ratio)

    output, report = rtprune(
        PruneRequest(tokens=tokens, ratio=ratio, sinkhorn=sinkhorn_config, image=image, grid=grid)
    )
    write_tensor(args.out, output)

    if args.report is not None:
        doc = {
            "tool": "rtprune",
            "version": __version__,
            "command": "prune",
            "config": {
                "tokens": str(args.tokens),
                "out": str(args.out),
                "ratio_mode": "dynamic" if args.dynamic else "fixed",
                "ratio": args.ratio,
                "image": None if args.image is None else str(args.image),
                "grid": None if grid_sides is None else list(grid_sides),
                "z": args.z,
                "alpha": args.alpha,
                "temperature": args.temperature,
                "iterations": args.iters,
                "tau": args.tau,
                "r_max": args.r_max,
            },
            **report_as_dict(report),
        }
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")

    print(f"kept {report.m} of {tokens.shape[0]} tokens (r={report.applied_r!r})")
    return 0


def cmd_density(args: argparse.Namespace) -> int:
    if args.tau < 0.0:
        raise ConfigConflict(f"--tau must be >= 0, got {args.tau}")
    gray = _load_gray(args.image)
    grid_h, grid_w = _parse_grid(args.grid)
    grid = PatchGrid.for_image(gray.shape[0], gray.shape[1], grid_h, grid_w)
    density = patch_density(sobel_magnitude(gray), grid, args.tau)
    if args.json:
        json.dump(
            {
                "tau": args.tau,
                "grid": [grid_h, grid_w],
                "rho": density.rho,
                "rho_k": [float(v) for v in density.rho_k],
            },
            sys.stdout,
        )
        sys.stdout.write("\n")
    else:
        print(f"rho {density.rho!r}")
        table = density.rho_k.reshape(grid_h, grid_w)
        for i in range(grid_h):
            print(f"rho_k {i} " + " ".join(repr(float(v)) for v in table[i]))
    return 0


def cmd_flops(args: argparse.Namespace) -> int:
    for name in ("d", "m", "m1", "m2", "k", "t1", "t2"):
        if getattr(args, name) < 1:
            raise ConfigConflict(f"--{name} must be >= 1, got {getattr(args, name)}")
    if (args.n is None) == (args.visual is None):
        raise ConfigConflict("exactly one of --n or --visual is required")
    if args.visual is not None:
        if args.visual < 0 or args.prompt_overhead < 0:
            raise ConfigConflict("--visual and --prompt-overhead must be >= 0")
        args.n = args.visual + args.prompt_overhead
    if args.n < 0:
        raise ConfigConflict(f"--n must be >= 0, got {args.n}")
    config = DecoderCostConfig(
        d=args.d, m=args.m, m1=args.m1, m2=args.m2, k=args.k, t1=args.t1, t2=args.t2
    )

    if args.calibrate is not None:
        if args.layer is not None or args.n_pruned is not None:
            raise ConfigConflict("--calibrate cannot be combined with --layer/--n-pruned")
        if args.n < 1:
            raise ConfigConflict("--calibrate needs --n >= 1")
        print(f"m {calibrate_m(args.n, args.calibrate, config)}")
        return 0

    if (args.layer is None) != (args.n_pruned is None):
        raise ConfigConflict("--layer and --n-pruned must be given together")
    if args.layer is not None:
        if not (0 <= args.layer < config.layers):
            raise ConfigConflict(
                f"--layer must lie in [0, {config.layers - 1}], got {args.layer}"
            )
        if args.n_pruned < 0:
            raise ConfigConflict(f"--n-pruned must be >= 0, got {args.n_pruned}")
        flops = prune_at_layer_flops(args.n, args.n_pruned, args.layer, config)
    else:
        flops = total_flops(args.n, config)
    print(f"FLOPs {flops}")
    print(f"GFLOPs {flops / 1e9:.1f}")
    return 0


def cmd_tir(args: argparse.Namespace) -> int:
    norms = _require_ndim(read_tensor(args.norms), 1, args.norms, "norms tensor")
    attention = _require_ndim(read_tensor(args.attn), 2, args.attn, "attention tensor")
    if args.k < 1:
        raise ConfigConflict(f"--k must be >= 1, got {args.k}")
    if args.k > norms.shape[0]:
        raise ConfigConflict(f"--k must be <= {norms.shape[0]} tokens, got {args.k}")
    layerwise, cumulative = tir(norms, attention, args.k)
    if args.json:
        json.dump(
            {
                "k": args.k,
                "layerwise": [float(v) for v in layerwise],
                "cumulative": [float(v) for v in cumulative],
            },
            sys.stdout,
        )
        sys.stdout.write("\n")
    else:
        print("layer layerwise cumulative")
        for i in range(layerwise.shape[0]):
            print(f"{i} {float(layerwise[i])!r} {float(cumulative[i])!r}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rtprune", description=__doc__)
    parser.add_argument("--version", action="version", version=f"rtprune {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    prune = sub.add_parser("prune", help="prune and merge a token tensor")
    prune.add_argument("--tokens", required=True, help="input 2-D .rtt tensor")
    prune.add_argument("--out", required=True, help="output .rtt tensor")
    prune.add_argument("--ratio", type=float, default=None, help="fixed prune ratio in [0, 1)")
    prune.add_argument("--dynamic", action="store_true", help="derive the ratio from the image")
    prune.add_argument("--image", default=None, help="PGM/PPM image (dynamic mode)")
    prune.add_argument("--grid", default=None, help="patch grid GHxGW (dynamic mode)")
    prune.add_argument("--report", default=None, help="write a JSON run report here")
    prune.add_argument("--z", type=float, default=0.2, help="dustbin score")
    prune.add_argument("--alpha", type=float, default=0.1, help="merge weight")
    prune.add_argument("--tau", type=float, default=0.2, help="edge threshold (dynamic mode)")
    prune.add_argument("--iters", type=int, default=100, help="normalization iterations")
    prune.add_argument("--temperature", type=float, default=1.0, help="entropy temperature")
    prune.add_argument("--r-max", type=float, default=0.5, help="dynamic ratio upper bound")
    prune.set_defaults(func=cmd_prune)

    density = sub.add_parser("density", help="patch edge densities of an image")
    density.add_argument("--image", required=True, help="PGM/PPM image")
    density.add_argument("--grid", required=True, help="patch grid GHxGW")
    density.add_argument("--tau", type=float, default=0.2, help="edge threshold")
    density.add_argument("--json", action="store_true", help="emit JSON instead of text")
    density.set_defaults(func=cmd_density)

    flops = sub.add_parser("flops", help="decoder FLOPs model")
    flops.add_argument("--n", type=int, default=None, help="total token count")
    flops.add_argument(
        "--visual", type=int, default=None, help="visual token count; n = visual + prompt overhead"
    )
    flops.add_argument(
        "--prompt-overhead", type=int, default=27, help="prompt tokens added to --visual"
    )
    flops.add_argument("--d", type=int, default=1280, help="hidden size")
    flops.add_argument("--m", type=int, default=6854, help="dense FFN width")
    flops.add_argument("--m1", type=int, default=896, help="routed expert width")
    flops.add_argument("--m2", type=int, default=1792, help="shared expert width")
    flops.add_argument("--k", type=int, default=6, help="routed experts per token")
    flops.add_argument("--t1", type=int, default=1, help="dense layers")
    flops.add_argument("--t2", type=int, default=11, help="MoE layers")
    flops.add_argument("--calibrate", type=float, default=None, help="solve m for this target FLOPs")
    flops.add_argument("--n-pruned", type=int, default=None, help="token count after pruning")
    flops.add_argument("--layer", type=int, default=None, help="last layer running at full count")
    flops.set_defaults(func=cmd_flops)

    tir_cmd = sub.add_parser("tir", help="top-K overlap of norms vs attention")
    tir_cmd.add_argument("--norms", required=True, help="1-D .rtt tensor of token norms")
    tir_cmd.add_argument("--attn", required=True, help="2-D L x N .rtt tensor of attention scores")
    tir_cmd.add_argument("--k", type=int, required=True, help="top-K size")
    tir_cmd.add_argument("--json", action="store_true", help="emit JSON instead of text")
    tir_cmd.set_defaults(func=cmd_tir)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        thread_cap()
        return args.func(args)
    except RTPruneError as exc:
        print(f"rtprune: error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"rtprune: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
