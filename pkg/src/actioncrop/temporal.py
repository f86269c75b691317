"""Temporal consistency of a patch track through pivot-anchored polyBezier curves.

A track is an ``(F, 3)`` array whose row ``t`` holds the square patch
``(x, y, d)`` of frame ``t``. Frames whose patches agree with their temporal
neighbours become pivots; the curve passes through every pivot and uses the
frames in between as Bezier control points.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import EmptyTrack
from .validation import check_frame_size, check_track

PIVOT_GAP = 2  # frames excluded on each side of a chosen pivot
MIN_SIDE = 8.0
DEFAULT_PIVOT_FRACTION = 0.15


@dataclass(frozen=True)
class PivotSet:
    pt: tuple  # iteratively chosen pivots, ascending
    pt_fin: tuple  # pt plus the first and last frame, ascending
    n_frames: int

    @property
    def first(self):
        return self.pt[0]

    @property
    def last(self):
        return self.pt[-1]


def iou(a, b):
    """Intersection over union of two axis-aligned squares given as (x, y, d, ...)."""
    ax, ay, ad = float(a[0]), float(a[1]), float(a[2])
    bx, by, bd = float(b[0]), float(b[1]), float(b[2])
    iw = min(ax + ad / 2, bx + bd / 2) - max(ax - ad / 2, bx - bd / 2)
    ih = min(ay + ad / 2, by + bd / 2) - max(ay - ad / 2, by - bd / 2)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    # rounding in the edge arithmetic can nudge identical squares past 1
    return min(inter / (ad * ad + bd * bd - inter), 1.0)


def pairwise_iou(track):
    """``(F, F)`` matrix of square IoUs."""
    track = check_track(track)
    x, y, d = track[:, 0], track[:, 1], track[:, 2]
    half = d / 2
    iw = np.minimum.outer(x + half, x + half) - np.maximum.outer(x - half, x - half)
    ih = np.minimum.outer(y + half, y + half) - np.maximum.outer(y - half, y - half)
    inter = np.clip(iw, 0, None) * np.clip(ih, 0, None)
    area = d * d
    return np.minimum(inter / (area[:, None] + area[None, :] - inter), 1.0)


def cohesion_scores(track):
    """``S_i = sum_{f != i} IoU(i, f) / |i - f|`` for every frame, evaluated exactly."""
    track = check_track(track)
    n = len(track)
    if n < 2:
        raise EmptyTrack("cohesion needs at least two frames")
    gap = np.abs(np.subtract.outer(np.arange(n), np.arange(n))).astype(np.float64)
    np.fill_diagonal(gap, np.inf)
    return (pairwise_iou(track) / gap).sum(axis=1)


def default_pivot_budget(n_frames, fraction=DEFAULT_PIVOT_FRACTION):
    return max(1, int(math.floor(fraction * n_frames + 0.5)))


def select_pivots(scores, budget):
    """Greedy pivot choice: best remaining score, then block two frames each side.

    Ties go to the earlier frame. Stops at ``budget`` pivots or when nothing is
    left to choose.
    """
    scores = np.asarray(scores, dtype=np.float64)
    n = len(scores)
    if n == 0:
        raise EmptyTrack("no scores to choose pivots from")
    if budget < 1:
        raise ValueError("pivot budget must be >= 1")
    available = np.ones(n, dtype=bool)
    chosen = []
    while len(chosen) < budget and available.any():
        i = int(np.argmax(np.where(available, scores, -np.inf)))
        chosen.append(i)
        available[max(0, i - PIVOT_GAP) : i + PIVOT_GAP + 1] = False
    pt = tuple(sorted(chosen))
    return PivotSet(pt, tuple(sorted(set(pt) | {0, n - 1})), n)


def correct_endpoints(track, pivots):
    """Copy the first/last pivot's patch onto frame 0 / frame F-1."""
    track = check_track(track, pivots.n_frames).copy()
    if not pivots.pt:
        raise EmptyTrack("pivot set is empty")
    track[0] = track[pivots.first]
    track[-1] = track[pivots.last]
    return track


def bezier_eval(points, t):
    """Evaluate the Bezier curve with control ``points`` at ``t`` by de Casteljau.

    ``t`` may be a scalar (returns one point) or an array (returns one point
    per entry). ``t = 0`` and ``t = 1`` reproduce the end points exactly.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if len(pts) < 2:
        raise ValueError("a Bezier curve needs at least two control points")
    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=np.float64))[:, None, None]
    b = np.broadcast_to(pts, (len(ts),) + pts.shape).copy()
    n = len(pts)
    for r in range(1, n):
        b[:, : n - r] = (1.0 - ts) * b[:, : n - r] + ts * b[:, 1 : n - r + 1]
    out = b[:, 0]
    return out[0] if scalar else out


def interpolate_segments(track, pt_fin):
    """Piecewise Bezier through consecutive pivots; no clamping."""
    track = check_track(track)
    out = track.copy()
    for i, j in zip(pt_fin[:-1], pt_fin[1:]):
        span = j - i
        out[i : j + 1] = bezier_eval(track[i : j + 1], np.arange(span + 1) / span)
    return out


def clamp_track(track, frame_size, min_side=MIN_SIDE):
    """Keep each patch realizable: side in ``[min_side, min(W, H)]``, square inside frame."""
    fw, fh = check_frame_size(frame_size)
    track = np.array(track, dtype=np.float64)
    cap = float(min(fw, fh))
    d = np.minimum(np.maximum(track[:, 2], min(min_side, cap)), cap)
    track[:, 2] = d
    track[:, 0] = np.clip(track[:, 0], d / 2, fw - d / 2)
    track[:, 1] = np.clip(track[:, 1], d / 2, fh - d / 2)
    return track


def smooth_track(track, pivots, frame_size=None):
    """Fit the polyBezier to an endpoint-corrected track.

    With ``frame_size`` the result is clamped into the frame; without it the
    raw curve is returned.
    """
    track = check_track(track, pivots.n_frames)
    out = interpolate_segments(track, pivots.pt_fin)
    if frame_size is not None:
        out = clamp_track(out, frame_size)
    return out


def smooth(track, budget=None, frame_size=None, pivot_fraction=DEFAULT_PIVOT_FRACTION):
    """Score, pick pivots, fix the endpoints and fit; returns ``(smoothed, pivots)``."""
    track = check_track(track)
    if budget is None:
        budget = default_pivot_budget(len(track), pivot_fraction)
    pivots = select_pivots(cohesion_scores(track), budget)
    corrected = correct_endpoints(track, pivots)
    return smooth_track(corrected, pivots, frame_size), pivots
