"""Frame-sequence ingestion and output.

Videos are held in memory as ``(F, H, W, 3)`` uint8 arrays; timestamps are the
row indices. On disk a video is either a directory of ``frame_%06d.png|ppm``
images or a planar ``video.raw`` file. Either layout may carry a
``manifest.json`` with ``width``, ``height``, ``frames`` and an optional
``format`` (``raw`` when absent).
"""

import json
import os

import numpy as np
from PIL import Image

from .exceptions import DecodeError, IoError, MixedDimensions, TooFewFrames
from .validation import check_track, check_video

IMAGE_SUFFIXES = (".png", ".ppm")
RAW_NAME = "video.raw"
MANIFEST_NAME = "manifest.json"


def _read_image(path):
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (OSError, ValueError) as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from exc


def _read_manifest(manifest_path):
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
        return {
            "width": int(manifest["width"]),
            "height": int(manifest["height"]),
            "frames": int(manifest["frames"]),
            "format": str(manifest.get("format", "raw")),
        }
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise DecodeError(f"bad manifest {manifest_path}: {exc}") from exc


def _read_raw(raw_path, manifest):
    w, h, n = manifest["width"], manifest["height"], manifest["frames"]
    expected = n * 3 * h * w
    try:
        data = np.fromfile(raw_path, dtype=np.uint8)
    except OSError as exc:
        raise DecodeError(f"cannot read {raw_path}: {exc}") from exc
    if data.size != expected:
        raise DecodeError(f"{raw_path} holds {data.size} bytes, manifest implies {expected}")
    # planar on disk: frame, channel, row, column
    return data.reshape(n, 3, h, w).transpose(0, 2, 3, 1).copy()


def read_sequence(dir_path, manifest=None):
    """Load a video from a frame directory or a raw-planar file.

    If ``manifest`` is given (or ``dir_path`` holds ``manifest.json``), the raw
    file next to it is read; otherwise every PNG/PPM in the directory is loaded
    in lexicographic filename order.
    """
    dir_path = os.fspath(dir_path)
    if manifest is None and os.path.isfile(os.path.join(dir_path, MANIFEST_NAME)):
        manifest = os.path.join(dir_path, MANIFEST_NAME)
    info = _read_manifest(manifest) if manifest is not None else None
    if info is not None and info["format"] == "raw":
        raw_path = os.path.join(os.path.dirname(os.fspath(manifest)) or dir_path, RAW_NAME)
        if not os.path.isfile(raw_path):
            raw_path = os.path.join(dir_path, RAW_NAME)
        video = _read_raw(raw_path, info)
    else:
        if not os.path.isdir(dir_path):
            raise DecodeError(f"{dir_path} is not a directory")
        names = sorted(n for n in os.listdir(dir_path) if n.lower().endswith(IMAGE_SUFFIXES))
        frames = [_read_image(os.path.join(dir_path, n)) for n in names]
        if len(frames) < 2:
            raise TooFewFrames(f"{dir_path} holds {len(frames)} frame(s), need at least 2")
        shapes = {f.shape for f in frames}
        if len(shapes) > 1:
            raise MixedDimensions(f"frames in {dir_path} disagree in size: {sorted(shapes)}")
        video = np.stack(frames)
        if info is not None and video.shape[:3] != (info["frames"], info["height"], info["width"]):
            raise DecodeError(f"frames in {dir_path} do not match manifest {info}")
    if video.shape[0] < 2:
        raise TooFewFrames(f"sequence has {video.shape[0]} frame(s), need at least 2")
    return check_video(video)


def write_sequence(video, dir_path, format="png"):
    """Write ``video`` so that :func:`read_sequence` reproduces it bit-exactly."""
    video = check_video(video)
    if format not in ("png", "ppm", "raw"):
        raise ValueError(f"unknown format {format!r}")
    n, h, w, _ = video.shape
    try:
        os.makedirs(dir_path, exist_ok=True)
        if format == "raw":
            video.transpose(0, 3, 1, 2).tofile(os.path.join(dir_path, RAW_NAME))
        else:
            for t, frame in enumerate(video):
                Image.fromarray(frame).save(os.path.join(dir_path, f"frame_{t:06d}.{format}"))
        with open(os.path.join(dir_path, MANIFEST_NAME), "w") as fh:
            json.dump({"width": w, "height": h, "frames": n, "format": format}, fh)
    except OSError as exc:
        raise IoError(f"cannot write {dir_path}: {exc}") from exc


def track_to_records(track):
    track = check_track(track)
    return [
        {"t": t, "x": float(x), "y": float(y), "d": float(d)}
        for t, (x, y, d) in enumerate(track)
    ]


def write_track_sidecar(track, path):
    """Dump a track as ``[{"t", "x", "y", "d"}, ...]``.

    JSON floats are written with ``repr`` precision, so parsing the file back
    gives the identical doubles.
    """
    records = track_to_records(track)
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
    try:
        with open(path, "w") as fh:
            json.dump(records, fh, indent=1)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_track_sidecar(path):
    with open(path) as fh:
        records = json.load(fh)
    try:
        records = sorted(records, key=lambda r: int(r["t"]))
        ts = [int(r["t"]) for r in records]
        track = np.array([[r["x"], r["y"], r["d"]] for r in records], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise DecodeError(f"malformed track sidecar {path}: {exc}") from exc
    if ts != list(range(len(ts))):
        raise DecodeError(f"track sidecar {path} timestamps are not 0..F-1")
    return check_track(track)
