"""Input validation helpers shared by the functional API and the estimators."""

import numpy as np

from .exceptions import DimensionMismatch, LengthMismatch, MixedDimensions, TooFewFrames

MIN_SIDE = 16


def check_frame(frame, name="frame"):
    """Return ``frame`` as a contiguous ``(H, W, 3)`` uint8 array."""
    arr = np.asarray(frame)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise DimensionMismatch(f"{name} must have shape (H, W, 3), got {arr.shape}")
    if arr.dtype != np.uint8:
        raise TypeError(f"{name} must be uint8 RGB, got {arr.dtype}")
    if arr.shape[0] < MIN_SIDE or arr.shape[1] < MIN_SIDE:
        raise DimensionMismatch(
            f"{name} is {arr.shape[1]}x{arr.shape[0]}, minimum is {MIN_SIDE}x{MIN_SIDE}"
        )
    return np.ascontiguousarray(arr)


def check_video(video, min_frames=2):
    """Validate a video and return it as an ``(F, H, W, 3)`` uint8 array.

    A list of frames is accepted as long as every frame has the same size.
    """
    if isinstance(video, (list, tuple)):
        if len(video) == 0:
            raise TooFewFrames("video has no frames")
        shapes = {np.shape(f) for f in video}
        if len(shapes) > 1:
            raise MixedDimensions(f"frames disagree in size: {sorted(shapes)}")
        video = np.stack([np.asarray(f) for f in video])
    arr = np.asarray(video)
    if arr.ndim != 4 or arr.shape[3] != 3:
        raise DimensionMismatch(f"video must have shape (F, H, W, 3), got {arr.shape}")
    if arr.shape[0] < min_frames:
        raise TooFewFrames(f"need at least {min_frames} frames, got {arr.shape[0]}")
    check_frame(arr[0])
    return np.ascontiguousarray(arr)


def check_track(track, n_frames=None):
    """Validate a patch track and return it as an ``(F, 3)`` float array of (x, y, d)."""
    arr = np.asarray(track, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"track must have shape (F, 3), got {arr.shape}")
    if arr.shape[0] == 0:
        raise LengthMismatch("track is empty")
    if n_frames is not None and arr.shape[0] != n_frames:
        raise LengthMismatch(f"track has {arr.shape[0]} entries, expected {n_frames}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("track contains non-finite values")
    if np.any(arr[:, 2] <= 0):
        raise ValueError("patch side lengths must be positive")
    return arr


def check_frame_size(frame_size):
    """Normalize ``(width, height)`` to a tuple of ints."""
    w, h = (int(v) for v in frame_size)
    if w < 1 or h < 1:
        raise ValueError(f"invalid frame size {frame_size}")
    return w, h
