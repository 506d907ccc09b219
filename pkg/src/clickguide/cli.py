"""Command-line entry point: ``clickguide <command> [options]``.

Exit status: 0 on success, 1 on bad usage, 2 on bad data or I/O, 3 when a
benchmark exceeds ``--budget-seconds``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io as vio
from .distance import FIXPOINT, GeodesicParams, dilate_seeds, edt, gdt
from .encoders import GuidanceConfig, GuidanceKind, encode
from .experiments import (DEFAULT_P_PERCENT, DEFAULT_SIGMAS, DEFAULT_THETAS, SweepSpec,
                          bench_table, over_budget, run_bench, run_sweep, sweep_csv)
from .metrics import aggregate
from .simulation import ClickPlacement, SessionTrace, SimulationConfig, run_session
from .volume import ClickSet, Polarity, PhantomKind, make_phantom

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BUDGET = 0, 1, 2, 3

log = logging.getLogger("clickguide")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _show_defaults(parser: argparse.ArgumentParser) -> None:
    """Append each non-trivial default to its help text, tuples as the comma lists the flags take."""
    for action in parser._actions:
        d = action.default
        if d in (None, False, argparse.SUPPRESS) or isinstance(action, argparse._HelpAction):
            continue
        if isinstance(d, (tuple, list)):
            d = ",".join(f"{v:g}" if isinstance(v, float) else str(v) for v in d)
        action.help = f"{action.help or ''} (default: {d})".strip()


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _dims(text: str) -> tuple[int, int, int]:
    v = _ints(text)
    if len(v) != 3:
        raise argparse.ArgumentTypeError(f"expected nx,ny,nz, got {text!r}")
    return v


def _passes(text: str):
    if text == FIXPOINT:
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"passes must be an integer or {FIXPOINT!r}")


def _write_text(path, text: str) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def load_clicks(path) -> ClickSet:
    with open(path) as f:
        return ClickSet.from_json(json.load(f))


def _image_or_phantom(args):
    if args.image:
        img = vio.load_volume(args.image)
        gt = vio.load_mask(args.gt) if getattr(args, "gt", None) else None
        return img, gt
    dims = args.dims or (64, 64, 64)
    return make_phantom(args.phantom, dims, rng_seed=args.seed)


# --- commands ---------------------------------------------------------------


def cmd_phantom(args) -> int:
    img, gt = make_phantom(args.kind, args.dims, spacing=args.spacing, rng_seed=args.seed,
                           radius=args.radius)
    out = Path(args.output)
    vio.save_volume(img, out.with_suffix(".vol"))
    vio.save_mask(gt, out.with_suffix(".msk"))
    log.info("wrote %s and %s", out.with_suffix(".vol"), out.with_suffix(".msk"))
    return EXIT_OK


def cmd_distance(args) -> int:
    clicks = load_clicks(args.clicks)
    image = vio.load_volume(args.image) if args.image else None
    if args.kind == "geodesic" and image is None:
        raise UsageError("--kind geodesic needs --image")
    dims = image.dims if image is not None else args.dims
    if dims is None:
        raise UsageError("give --dims or --image")
    spacing = image.spacing if image is not None else args.spacing
    seeds = dilate_seeds(clicks, args.polarity, args.sigma, dims)
    if args.kind == "euclidean":
        dmap = edt(seeds, spacing)
    else:
        params = GeodesicParams(gamma=args.gamma, passes=args.passes, neighborhood=args.neighborhood)
        dmap = gdt(seeds, image, params)
    vio.save_volume(dmap, args.output)
    return EXIT_OK


def cmd_encode(args) -> int:
    kind = GuidanceKind.parse(args.kind)
    clicks = load_clicks(args.clicks).of(args.polarity)
    image = vio.load_volume(args.image) if args.image else None
    if kind.needs_image and image is None:
        raise UsageError(f"--kind {kind.value} needs --image")
    if image is None and args.dims is None:
        raise UsageError("give --dims or --image")
    cfg = GuidanceConfig(kind=kind, sigma=args.sigma, theta_percent=args.theta,
                         geodesic=GeodesicParams(gamma=args.gamma, passes=args.passes),
                         neighborhood_size=args.neighborhood_size,
                         invert_exp_gdt=args.invert_exp_gdt)
    g = encode(clicks, cfg, image, dims=args.dims, spacing=args.spacing)
    vio.save_volume(g, args.output)
    if g.per_click_sigmas is not None:
        log.info("per-click sigmas: %s", list(g.per_click_sigmas))
    return EXIT_OK


def _frozen_clock() -> float:
    return 0.0


def cmd_simulate(args) -> int:
    if bool(args.image) != bool(args.gt):
        raise UsageError("--image and --gt go together")
    img, gt = _image_or_phantom(args)
    cfg = SimulationConfig(
        n_clicks=args.n_clicks, p_interaction=args.p / 100.0, rng_seed=args.seed,
        click_placement=ClickPlacement(args.placement),
        guidance=GuidanceConfig(kind=GuidanceKind.parse(args.kind), sigma=args.sigma,
                                theta_percent=args.theta),
    )
    clock = _frozen_clock if args.no_timings else None
    trace = run_session(img, gt, config=cfg, **({"clock": clock} if clock else {}))
    _write_text(args.output, trace.dumps())
    log.info("Dice %.4f -> %.4f over %d clicks", trace.initial_dice, trace.final_dice, len(trace.clicks))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    traces = []
    for path in args.traces:
        with open(path) as f:
            traces.append(SessionTrace.from_json(json.load(f)))
    report = aggregate(traces, label=json.loads(args.label) if args.label else None)
    _write_text(args.output, report.dumps())
    if args.csv:
        _write_text(args.csv, report.to_csv())
    return EXIT_OK


def cmd_sweep(args) -> int:
    volumes = None
    if args.images:
        if not args.gts or len(args.images) != len(args.gts):
            raise UsageError("--images and --gts need the same number of paths")
        volumes = [(vio.load_volume(i), vio.load_mask(g)) for i, g in zip(args.images, args.gts)]
    spec = SweepSpec(kinds=args.kinds, sigmas=args.sigmas, thetas=args.thetas, p_values=args.p,
                     n_clicks=args.n_clicks, rng_seed=args.seed, phantoms=args.phantoms,
                     n_volumes=args.n_volumes, dims=args.dims, volumes=volumes,
                     placement=ClickPlacement(args.placement), record_timings=not args.no_timings)
    _write_text(args.output, sweep_csv(run_sweep(spec)))
    return EXIT_OK


def cmd_bench(args) -> int:
    results = run_bench(args.sizes, args.kinds, args.repetitions, args.n_clicks, args.seed)
    doc = {"n_clicks": args.n_clicks, "budget_seconds": args.budget_seconds,
           "results": [r.to_json() for r in results]}
    if args.output:
        Path(args.output).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if not args.quiet:
        print(bench_table(results))
    if args.budget_seconds is not None:
        slow = over_budget(results, args.budget_seconds)
        for r in slow:
            print(f"over budget: {r.kind} {r.size}^3 median {r.median:.4f}s > {args.budget_seconds}s",
                  file=sys.stderr)
        if slow:
            return EXIT_BUDGET
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def _global_flags(parser, suppress) -> None:
    parser.add_argument("--seed", type=int, default=suppress or 0, help="random seed")
    parser.add_argument("--threads", type=int, default=suppress, help="numba worker threads")
    parser.add_argument("--quiet", action="store_true", default=suppress or False,
                        help="only print errors")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.HelpFormatter
    p = _Parser(prog="clickguide", description="Click guidance signals for 3D volumes.",
                formatter_class=fmt)
    _global_flags(p, None)
    # global flags are accepted after the subcommand too; SUPPRESS keeps
    # the subparser from clobbering values given before it
    common = _Parser(add_help=False)
    _global_flags(common, argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    kinds = [k.value for k in GuidanceKind]

    s = sub.add_parser("phantom", help="write a synthetic volume and its mask",
                       formatter_class=fmt, parents=[common])
    s.add_argument("--kind", choices=[k.value for k in PhantomKind], default="sphere")
    s.add_argument("--dims", type=_dims, default=(64, 64, 64))
    s.add_argument("--spacing", type=_floats, default=(1.0, 1.0, 1.0))
    s.add_argument("--radius", type=float, default=None, help="sphere radius in voxels")
    s.add_argument("-o", "--output", required=True, help="output stem; writes STEM.vol and STEM.msk")
    s.set_defaults(func=cmd_phantom)

    s = sub.add_parser("distance", help="Euclidean or geodesic distance from clicks",
                       formatter_class=fmt, parents=[common])
    s.add_argument("--kind", choices=["euclidean", "geodesic"], default="euclidean")
    s.add_argument("--clicks", required=True, help="JSON list of {pos, polarity}")
    s.add_argument("--polarity", choices=["fg", "bg"], default="fg")
    s.add_argument("--image", help="image .vol (required for geodesic)")
    s.add_argument("--dims", type=_dims, default=None)
    s.add_argument("--spacing", type=_floats, default=(1.0, 1.0, 1.0))
    s.add_argument("--sigma", type=float, default=0.0, help="seed dilation radius in voxels")
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--passes", type=_passes, default=4, help=f"raster sweeps or {FIXPOINT!r}")
    s.add_argument("--neighborhood", type=int, choices=[6, 26], default=26)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_distance)

    s = sub.add_parser("encode", help="encode clicks as a guidance volume",
                       formatter_class=fmt, parents=[common])
    s.add_argument("--kind", choices=kinds + ["adaptive"], default="disk")
    s.add_argument("--clicks", required=True, help="JSON list of {pos, polarity}")
    s.add_argument("--polarity", choices=["fg", "bg"], default="fg")
    s.add_argument("--image", help="image .vol (required for gdt, exp-gdt, adaptive)")
    s.add_argument("--dims", type=_dims, default=None)
    s.add_argument("--spacing", type=_floats, default=(1.0, 1.0, 1.0))
    s.add_argument("--sigma", type=float, default=0.0, help="radius in voxels, one of 0,1,5,9,13 in the grid")
    s.add_argument("--theta", type=float, default=0.0, help="percent of largest distances discarded")
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--passes", type=_passes, default=4)
    s.add_argument("--neighborhood-size", type=int, choices=[9, 27], default=27,
                   help="voxels averaged for the adaptive radius")
    s.add_argument("--invert-exp-gdt", action="store_true")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_encode)

    s = sub.add_parser("simulate", help="run one simulated click session",
                       formatter_class=fmt, parents=[common])
    s.add_argument("--phantom", choices=[k.value for k in PhantomKind], default="sphere")
    s.add_argument("--dims", type=_dims, default=None, help="phantom dims (default 64,64,64)")
    s.add_argument("--image", help="image .vol instead of a phantom")
    s.add_argument("--gt", help="ground-truth .msk for --image")
    s.add_argument("--kind", choices=kinds + ["adaptive"], default="adaptive-heatmap")
    s.add_argument("--sigma", type=float, default=0.0)
    s.add_argument("--theta", type=float, default=0.0)
    s.add_argument("--n-clicks", type=int, default=10)
    s.add_argument("--p", type=float, default=100.0, help="probability of interaction in percent")
    s.add_argument("--placement", choices=[c.value for c in ClickPlacement], default="error-center")
    s.add_argument("--no-timings", action="store_true", help="record zero timings (byte-stable output)")
    s.add_argument("-o", "--output", default="-")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("evaluate", help="M1-M5 over session traces",
                       formatter_class=fmt, parents=[common])
    s.add_argument("--traces", nargs="+", required=True)
    s.add_argument("--label", default=None, help='JSON object, e.g. {"kind": "disk", "sigma": 1}')
    s.add_argument("--csv", default=None, help="also write a one-row CSV")
    s.add_argument("-o", "--output", default="-")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("sweep", help="hyperparameter grid, one CSV row per cell",
                       formatter_class=fmt, parents=[common])
    s.add_argument("--kinds", nargs="+", choices=kinds + ["adaptive"], default=kinds)
    s.add_argument("--sigmas", type=_floats, default=DEFAULT_SIGMAS)
    s.add_argument("--thetas", type=_floats, default=DEFAULT_THETAS)
    s.add_argument("--p", type=_floats, default=DEFAULT_P_PERCENT, help="percent")
    s.add_argument("--n-clicks", type=int, default=10)
    s.add_argument("--phantoms", nargs="+", choices=[k.value for k in PhantomKind],
                   default=["sphere", "noisy-sphere"])
    s.add_argument("--n-volumes", type=int, default=2, help="volumes per phantom kind")
    s.add_argument("--dims", type=_dims, default=(32, 32, 32))
    s.add_argument("--images", nargs="+", help="image .vol files instead of phantoms")
    s.add_argument("--gts", nargs="+", help="mask .msk files matching --images")
    s.add_argument("--placement", choices=[c.value for c in ClickPlacement], default="error-center")
    s.add_argument("--no-timings", action="store_true")
    s.add_argument("-o", "--output", default="-")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("bench", help="time guidance encoding",
                       formatter_class=fmt, parents=[common])
    s.add_argument("--sizes", type=_ints, default=(64, 128, 256), help="cube edge lengths")
    s.add_argument("--kinds", nargs="+", choices=kinds + ["adaptive"], default=kinds)
    s.add_argument("--repetitions", type=int, default=5)
    s.add_argument("--n-clicks", type=int, default=10)
    s.add_argument("--budget-seconds", type=float, default=None,
                   help="fail with status 3 if any median exceeds this")
    s.add_argument("-o", "--output", default=None, help="JSON results")
    s.set_defaults(func=cmd_bench)

    _show_defaults(p)
    for name, sp in sub.choices.items():
        _show_defaults(sp)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is not None:
        import numba
        if args.threads < 1:
            parser.error("--threads must be >= 1")
        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        return args.func(args)
    except UsageError as e:
        print(f"clickguide: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as e:
        print(f"clickguide: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_DATA
    except MemoryError:
        print("clickguide: out of memory", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
