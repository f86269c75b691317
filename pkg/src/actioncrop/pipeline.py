"""End-to-end orchestration: ingest, per-frame localization, smoothing, cropping."""

import dataclasses
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np
from PIL import Image

from . import videoio
from .exceptions import ActionCropError, StageError
from .localize import LocalizeParams, localize_frame, patches_to_track
from .motionseg import default_min_component_px, label_map_to_rgb, segment_motion
from .opticalflow import FlowParams, dense_flow, flow_to_hsv, frame_pairs, hsv_to_rgb
from .retarget import RetargetParams, retarget_video
from .temporal import default_pivot_budget, smooth
from .validation import check_video


@dataclass(frozen=True)
class PipelineConfig:
    # flow
    pyramid_levels: int = 3
    pyr_scale: float = 0.5
    window_size: int = 15
    flow_iterations: int = 3
    poly_n: int = 5
    poly_sigma: float = 1.1
    # segmentation
    n_clusters: int = 4
    open_radius: int = 2
    close_radius: int = 3
    min_component_fraction: float = 0.0005
    # localization
    a_min_fraction: float = 0.25
    # smoothing
    pivot_fraction: float = 0.15
    pivot_budget: int = None
    # cropping
    out_size: int = 56
    resample: str = "bilinear"
    # run
    seed: int = 0
    workers: int = 1
    debug_dir: str = None

    def __post_init__(self):
        if self.n_clusters < 2:
            raise ValueError("n_clusters must be >= 2")
        if not 0.0 < self.pivot_fraction <= 1.0:
            raise ValueError("pivot_fraction must lie in (0, 1]")
        if self.pivot_budget is not None and self.pivot_budget < 1:
            raise ValueError("pivot_budget must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        # surface bad values now rather than inside a worker
        self.flow_params
        self.retarget_params

    @property
    def flow_params(self):
        return FlowParams(
            self.pyramid_levels, self.pyr_scale, self.window_size,
            self.flow_iterations, self.poly_n, self.poly_sigma,
        )

    @property
    def localize_params(self):
        return LocalizeParams(self.a_min_fraction)

    @property
    def retarget_params(self):
        return RetargetParams(self.out_size, self.resample)

    def budget(self, n_frames):
        if self.pivot_budget is not None:
            return self.pivot_budget
        return default_pivot_budget(n_frames, self.pivot_fraction)

    @classmethod
    def from_mapping(cls, mapping):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(mapping) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**mapping)

    def replace(self, **changes):
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_dict(self):
        return dataclasses.asdict(self)


def load_config(path):
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    # a [pipeline] table is accepted as well as top-level keys
    return PipelineConfig.from_mapping(data.get("pipeline", data))


def _localize_task(task):
    t, prev, nxt, config, want_debug = task
    h, w = prev.shape[:2]
    try:
        hsv = flow_to_hsv(dense_flow(prev, nxt, config.flow_params))
    except ActionCropError as exc:
        raise StageError("flow", t, exc) from exc
    try:
        _, stacked, c3s = segment_motion(
            hsv,
            k=config.n_clusters,
            seed=[config.seed, t],
            open_radius=config.open_radius,
            close_radius=config.close_radius,
            min_component_px=default_min_component_px(w, h, config.min_component_fraction),
        )
    except ActionCropError as exc:
        raise StageError("segment", t, exc) from exc
    patch = localize_frame(c3s, config.localize_params, (w, h), t)
    debug = (hsv_to_rgb(hsv), label_map_to_rgb(stacked.labels)) if want_debug else None
    return patch, debug


def _map_frames(fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers, mp_context=get_context("spawn")) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def localize_video(video, config=None):
    """Raw per-frame track. Returns ``(track, low_confidence, debug_images)``."""
    config = config or PipelineConfig()
    video = check_video(video)
    want_debug = config.debug_dir is not None
    tasks = [
        (t, video[i], video[j], config, want_debug)
        for t, (i, j) in enumerate(frame_pairs(len(video)))
    ]
    results = _map_frames(_localize_task, tasks, config.workers)
    patches = [p for p, _ in results]
    flags = [bool(p.low_confidence) for p in patches]
    debug = [d for _, d in results] if want_debug else None
    return patches_to_track(patches), flags, debug


def smooth_raw_track(track, config=None, frame_size=None):
    config = config or PipelineConfig()
    return smooth(track, budget=config.budget(len(track)), frame_size=frame_size)


def write_debug(debug, debug_dir):
    os.makedirs(debug_dir, exist_ok=True)
    for t, (motion_rgb, labels_rgb) in enumerate(debug):
        Image.fromarray(motion_rgb).save(os.path.join(debug_dir, f"motion_{t:06d}.png"))
        Image.fromarray(labels_rgb).save(os.path.join(debug_dir, f"labels_{t:06d}.png"))


def run_pipeline(config, input_path, output_path, track=None, dump_tracks=False, out_format="png"):
    """Crop the video at ``input_path`` into ``output_path``.

    ``track`` (an ``(F, 3)`` array) skips localization and smoothing and crops
    along the given patches instead. Returns a report dict with per-stage
    timings, the pivots and per-frame low-confidence flags.
    """
    timings = {}

    def stage(name, fn, *args, **kwargs):
        start = time.perf_counter()
        try:
            result = fn(*args, **kwargs)
        except StageError:
            raise
        except ActionCropError as exc:
            raise StageError(name, None, exc) from exc
        timings[name] = time.perf_counter() - start
        return result

    video = stage("ingest", videoio.read_sequence, input_path)
    n, h, w, _ = video.shape
    report = {"frames": n, "width": w, "height": h}
    if track is None:
        raw, flags, debug = stage("localize", localize_video, video, config)
        smoothed, pivots = stage("smooth", smooth_raw_track, raw, config, (w, h))
        report["pivots"] = list(pivots.pt)
        report["low_confidence"] = flags
        if debug is not None:
            stage("debug", write_debug, debug, config.debug_dir)
    else:
        raw, smoothed = None, np.asarray(track, dtype=np.float64)
        report["low_confidence"] = [False] * n
    cropped = stage("crop", retarget_video, video, smoothed, config.retarget_params)
    stage("write", videoio.write_sequence, cropped, output_path, out_format)
    if dump_tracks:
        if raw is not None:
            videoio.write_track_sidecar(raw, os.path.join(output_path, "track_raw.json"))
        videoio.write_track_sidecar(smoothed, os.path.join(output_path, "track_smoothed.json"))
    report["timings"] = timings
    report["n_low_confidence"] = int(sum(report["low_confidence"]))
    return report
