"""Dense optical flow and its HSV motion encoding.

Flow fields are ``(H, W, 2)`` float arrays holding ``(u, v)`` per pixel, with
``v`` pointing down the image. Motion images are ``(H, W, 3)`` float arrays of
``(hue_degrees, saturation, value)``.
"""

from dataclasses import dataclass

import cv2
import numpy as np

from .exceptions import DimensionMismatch
from .validation import check_frame

HSV_EPS = 1e-9
LUMA = np.array([0.299, 0.587, 0.114], dtype=np.float32)


@dataclass(frozen=True)
class FlowParams:
    """Polynomial-expansion flow settings.

    ``pyramid_levels`` counts the full-resolution image, so 1 disables the
    coarse-to-fine pass.
    """

    pyramid_levels: int = 3
    pyr_scale: float = 0.5
    window_size: int = 15
    iterations: int = 3
    poly_n: int = 5
    poly_sigma: float = 1.1

    def __post_init__(self):
        if self.pyramid_levels < 1:
            raise ValueError("pyramid_levels must be >= 1")
        if self.window_size < 5 or self.window_size % 2 == 0:
            raise ValueError("window_size must be odd and >= 5")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 < self.pyr_scale < 1.0:
            raise ValueError("pyr_scale must lie in (0, 1)")
        if self.poly_n not in (5, 7):
            raise ValueError("poly_n must be 5 or 7")


def to_gray(frame):
    return np.asarray(frame, dtype=np.float32) @ LUMA


def dense_flow(prev, next, params=None):
    """Farneback two-frame flow from ``prev`` to ``next``.

    The field satisfies ``prev[y, x] ~ next[y + v, x + u]``, so content moving
    right yields positive ``u``. Both frames are reduced to luma first.
    """
    params = params or FlowParams()
    prev = check_frame(prev, "prev")
    next = check_frame(next, "next")
    if prev.shape != next.shape:
        raise DimensionMismatch(f"frame shapes differ: {prev.shape} vs {next.shape}")
    flow = cv2.calcOpticalFlowFarneback(
        to_gray(prev),
        to_gray(next),
        None,
        params.pyr_scale,
        params.pyramid_levels,
        params.window_size,
        params.iterations,
        params.poly_n,
        params.poly_sigma,
        0,
    )
    flow = flow.astype(np.float64)
    # degenerate (textureless) neighbourhoods must never leak NaN downstream
    np.nan_to_num(flow, copy=False, nan=0.0, posinf=0.0, neginf=0.0)
    return flow


def flow_to_hsv(flow):
    """Encode orientation as hue and normalized magnitude as saturation."""
    flow = np.asarray(flow, dtype=np.float64)
    if flow.ndim != 3 or flow.shape[2] != 2:
        raise DimensionMismatch(f"flow must have shape (H, W, 2), got {flow.shape}")
    u, v = flow[..., 0], flow[..., 1]
    mag = np.hypot(u, v)
    hue = np.degrees(np.arctan2(v, u)) % 360.0
    hue[hue >= 360.0] -= 360.0
    hue[mag == 0] = 0.0
    sat = mag / max(float(mag.max()), HSV_EPS)
    return np.stack([hue, sat, np.ones_like(sat)], axis=-1)


def frame_pairs(n_frames):
    """Index pairs feeding each frame's flow; the last frame reuses the final pair."""
    if n_frames < 2:
        raise ValueError("need at least two frames")
    pairs = [(i, i + 1) for i in range(n_frames - 1)]
    pairs.append(pairs[-1])
    return pairs


def hsv_to_rgb(hsv):
    """Render a motion image as 8-bit RGB, for debug dumps."""
    rgb = cv2.cvtColor(np.asarray(hsv, dtype=np.float32), cv2.COLOR_HSV2RGB)
    return np.clip(np.rint(rgb * 255.0), 0, 255).astype(np.uint8)
