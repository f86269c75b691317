"""Resample each frame's square patch into a fixed-size square output frame."""

from dataclasses import dataclass

import numpy as np

from .exceptions import PatchOutOfBounds
from .validation import check_frame, check_track, check_video

BOUNDS_TOL = 1e-6


@dataclass(frozen=True)
class RetargetParams:
    out_size: int = 112
    resample: str = "bilinear"

    def __post_init__(self):
        if int(self.out_size) < 8:
            raise ValueError("out_size must be >= 8")
        if self.resample not in ("bilinear", "nearest"):
            raise ValueError(f"unknown resample mode {self.resample!r}")


def sample_coords(center, side, out_size):
    """Source coordinates (pixel-centre convention) of the output pixel centres."""
    return center - side / 2.0 + (np.arange(out_size) + 0.5) * (side / out_size) - 0.5


def _bilinear(frame, ys, xs):
    h, w = frame.shape[:2]
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    fy = (ys - y0)[:, None, None]
    fx = (xs - x0)[None, :, None]
    y0c, y1c = np.clip(y0, 0, h - 1), np.clip(y0 + 1, 0, h - 1)
    x0c, x1c = np.clip(x0, 0, w - 1), np.clip(x0 + 1, 0, w - 1)
    img = frame.astype(np.float64)
    top = img[y0c][:, x0c] * (1 - fx) + img[y0c][:, x1c] * fx
    bottom = img[y1c][:, x0c] * (1 - fx) + img[y1c][:, x1c] * fx
    out = top * (1 - fy) + bottom * fy
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def _nearest(frame, ys, xs):
    h, w = frame.shape[:2]
    yi = np.clip(np.floor(ys + 0.5).astype(np.int64), 0, h - 1)
    xi = np.clip(np.floor(xs + 0.5).astype(np.int64), 0, w - 1)
    return frame[yi][:, xi]


def crop_patch(frame, patch, params=None):
    """Crop the square ``patch`` = (x, y, d, ...) out of ``frame`` at ``out_size``."""
    params = params or RetargetParams()
    frame = check_frame(frame)
    h, w = frame.shape[:2]
    x, y, d = float(patch[0]), float(patch[1]), float(patch[2])
    if not d > 0:
        raise PatchOutOfBounds(f"patch side must be positive, got {d}")
    if (
        x - d / 2 < -BOUNDS_TOL
        or y - d / 2 < -BOUNDS_TOL
        or x + d / 2 > w + BOUNDS_TOL
        or y + d / 2 > h + BOUNDS_TOL
    ):
        raise PatchOutOfBounds(f"patch (x={x}, y={y}, d={d}) leaves the {w}x{h} frame")
    xs = sample_coords(x, d, int(params.out_size))
    ys = sample_coords(y, d, int(params.out_size))
    if params.resample == "nearest":
        return _nearest(frame, ys, xs)
    return _bilinear(frame, ys, xs)


def retarget_video(video, track, params=None):
    """Crop every frame along ``track``; the frame count is preserved."""
    params = params or RetargetParams()
    video = check_video(video)
    track = check_track(track, len(video))
    return np.stack([crop_patch(frame, patch, params) for frame, patch in zip(video, track)])
