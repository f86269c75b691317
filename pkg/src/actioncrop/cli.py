"""Command-line entry point.

    actioncrop crop INPUT OUTPUT [--track T] [--dump-tracks]
    actioncrop localize INPUT --out track_raw.json
    actioncrop smooth track_raw.json --out track_smoothed.json [--frame-size WxH]
    actioncrop eval --pred P --gt G [--raw R]       |  actioncrop eval --suite
    actioncrop synth OUTPUT [--trajectory linear]

Exit codes: 0 success, 1 usage, 2 data error, 3 internal error.
"""

import argparse
import csv
import json
import logging
import os
import sys

from . import evalharness, videoio
from .exceptions import ActionCropError
from .pipeline import PipelineConfig, load_config, localize_video, run_pipeline, smooth_raw_track

log = logging.getLogger("actioncrop")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _frame_size(text):
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}")


# flag name -> PipelineConfig field
PIPELINE_FLAGS = {
    "seed": int,
    "workers": int,
    "n_clusters": int,
    "open_radius": int,
    "close_radius": int,
    "min_component_fraction": float,
    "a_min_fraction": float,
    "pivot_budget": int,
    "pivot_fraction": float,
    "out_size": int,
    "resample": str,
    "pyramid_levels": int,
    "pyr_scale": float,
    "window_size": int,
    "flow_iterations": int,
    "poly_n": int,
    "poly_sigma": float,
    "debug_dir": str,
}


def _add_pipeline_flags(p):
    p.add_argument("--config", help="TOML file of pipeline settings; flags override it")
    for name, kind in PIPELINE_FLAGS.items():
        flag = "--" + name.replace("_", "-")
        if name == "resample":
            p.add_argument(flag, choices=("bilinear", "nearest"))
        else:
            p.add_argument(flag, type=kind)


def _resolve_config(args):
    overrides = {name: getattr(args, name, None) for name in PIPELINE_FLAGS}
    try:
        config = load_config(args.config) if args.config else PipelineConfig()
        config = config.replace(**overrides)
    except (OSError, TypeError, ValueError) as exc:
        raise UsageError(f"bad configuration: {exc}")
    log.info("config: %s", json.dumps(config.to_dict(), sort_keys=True))
    return config


def cmd_crop(args):
    config = _resolve_config(args)
    track = videoio.read_track_sidecar(args.track) if args.track else None
    report = run_pipeline(
        config, args.input, args.output, track=track,
        dump_tracks=args.dump_tracks, out_format=args.format,
    )
    log.info("timings: %s", {k: round(v, 3) for k, v in report["timings"].items()})
    if report["n_low_confidence"]:
        flagged = [t for t, f in enumerate(report["low_confidence"]) if f]
        log.warning("%d low-confidence frame(s): %s", len(flagged), flagged)
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(report, fh, indent=1)


def cmd_localize(args):
    config = _resolve_config(args)
    video = videoio.read_sequence(args.input)
    track, flags, _ = localize_video(video, config)
    videoio.write_track_sidecar(track, args.out)
    if any(flags):
        log.warning("low-confidence frames: %s", [t for t, f in enumerate(flags) if f])


def cmd_smooth(args):
    config = PipelineConfig().replace(pivot_budget=args.pivot_budget, pivot_fraction=args.pivot_fraction)
    frame_size = args.frame_size
    if frame_size is None and args.video:
        video = videoio.read_sequence(args.video)
        frame_size = (video.shape[2], video.shape[1])
    raw = videoio.read_track_sidecar(args.track)
    smoothed, pivots = smooth_raw_track(raw, config, frame_size)
    videoio.write_track_sidecar(smoothed, args.out)
    log.info("pivots: %s", list(pivots.pt))


def cmd_eval(args):
    if args.suite:
        config = _resolve_config(args)
        rows, summary = evalharness.run_suite(
            seeds=range(args.seed_start, args.seed_start + args.seeds),
            trajectories=args.trajectories or evalharness.TRAJECTORIES,
            config=config,
            n_frames=args.frames,
            jitter_frames=args.jitter_frames,
        )
        if args.csv:
            with open(args.csv, "w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
                writer.writeheader()
                writer.writerows(rows)
        result = summary
    else:
        if not (args.pred and args.gt):
            raise UsageError("eval needs --pred and --gt (or --suite)")
        pred = videoio.read_track_sidecar(args.pred)
        gt = videoio.read_track_sidecar(args.gt)
        raw = videoio.read_track_sidecar(args.raw) if args.raw else None
        result = evalharness.evaluate(pred, gt, raw).to_dict()
    text = json.dumps(result, indent=1, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)


def cmd_synth(args):
    try:
        spec = evalharness.SyntheticSpec(
            frame_w=args.width,
            frame_h=args.height,
            n_frames=args.frames,
            subject_size=args.subject_size,
            velocity=tuple(args.velocity),
            trajectory=args.trajectory,
            background=args.background,
            noise_sigma=args.noise_sigma,
            jitter_frames=args.jitter_frames,
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    video, gt = evalharness.generate_synthetic(spec)
    videoio.write_sequence(video, args.output, args.format)
    videoio.write_track_sidecar(gt, args.gt or os.path.join(args.output, "track_gt.json"))


def build_parser():
    parser = _Parser(prog="actioncrop", description="Square, subject-following video crops.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("crop", help="localize, smooth and crop a frame sequence")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--track", help="crop along this track sidecar instead of computing one")
    p.add_argument("--dump-tracks", action="store_true", help="write track_raw.json and track_smoothed.json")
    p.add_argument("--format", choices=("png", "ppm", "raw"), default="png")
    p.add_argument("--report", help="write the run report (timings, pivots, flags) as JSON")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_crop)

    p = sub.add_parser("localize", help="emit the raw per-frame track")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("smooth", help="smooth a raw track sidecar")
    p.add_argument("track")
    p.add_argument("--out", required=True)
    p.add_argument("--pivot-budget", type=int)
    p.add_argument("--pivot-fraction", type=float)
    p.add_argument("--frame-size", type=_frame_size, help="WxH; clamps patches into the frame")
    p.add_argument("--video", help="read the frame size from this sequence")
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("eval", help="score tracks against ground truth")
    p.add_argument("--pred")
    p.add_argument("--gt")
    p.add_argument("--raw")
    p.add_argument("--out")
    p.add_argument("--suite", action="store_true", help="run the synthetic seed sweep")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--seed-start", type=int, default=0)
    p.add_argument("--trajectories", nargs="+", choices=evalharness.TRAJECTORIES)
    p.add_argument("--frames", type=int, default=64)
    p.add_argument("--jitter-frames", type=float, default=0.1)
    p.add_argument("--csv", help="per-case rows for --suite")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="render a synthetic video with ground truth")
    p.add_argument("output")
    p.add_argument("--gt", help="ground-truth track path (default OUTPUT/track_gt.json)")
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--height", type=int, default=96)
    p.add_argument("--frames", type=int, default=64)
    p.add_argument("--subject-size", type=int, default=40)
    p.add_argument("--velocity", type=float, nargs=2, default=(1.0, 0.5))
    p.add_argument("--trajectory", choices=evalharness.TRAJECTORIES, default="linear")
    p.add_argument("--background", choices=("static", "drifting"), default="static")
    p.add_argument("--noise-sigma", type=float, default=2.0)
    p.add_argument("--jitter-frames", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("png", "ppm", "raw"), default="png")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, or a usage error already reported
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"actioncrop: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ActionCropError as exc:
        print(f"actioncrop: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
