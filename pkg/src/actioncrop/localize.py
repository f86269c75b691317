"""Per-frame choice of one square action patch from the frame's C3s.

Boxes are integer pixel rectangles ``(left, top, right, bottom)`` with
inclusive bounds; they span the continuous region ``[left, right + 1)``.
Square patches live in that continuous frame: a patch centred at ``(x, y)``
with side ``d`` covers ``[x - d/2, x + d/2]``.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import NoInteriorC3
from .validation import check_frame_size

A_MIN_RANGE = (0.05, 0.9)


class SquarePatch(NamedTuple):
    x: float
    y: float
    d: float
    t: int
    low_confidence: bool = False


@dataclass(frozen=True)
class LocalizeParams:
    a_min_fraction: float = 0.25

    def __post_init__(self):
        lo, hi = A_MIN_RANGE
        object.__setattr__(self, "a_min_fraction", float(np.clip(self.a_min_fraction, lo, hi)))

    def a_min(self, frame_size):
        w, h = frame_size
        return self.a_min_fraction * w * h


def box_size(box):
    left, top, right, bottom = box
    return right - left + 1, bottom - top + 1


def box_area(box):
    w, h = box_size(box)
    return w * h


def box_center(box):
    left, top, right, bottom = box
    return (left + right + 1) / 2.0, (top + bottom + 1) / 2.0


def boxes_overlap(a, b):
    """True when the intersection has positive area; shared edges do not count."""
    return min(a[2], b[2]) >= max(a[0], b[0]) and min(a[3], b[3]) >= max(a[1], b[1])


def union_box(a, b):
    return (min(a[0], b[0]), min(a[1], b[1]), max(a[2], b[2]), max(a[3], b[3]))


def select_candidates(c3s):
    """Top two interior C3s by average saturation.

    Ties go to the larger component, then the smaller cluster id, then the
    top-left-most box.
    """
    interior = [c for c in c3s if not c.touches_border]
    if not interior:
        raise NoInteriorC3("every C3 touches the frame border")
    interior.sort(key=lambda c: (-c.avg_saturation, -c.size, c.cluster_id, c.bbox))
    return interior[0], (interior[1] if len(interior) > 1 else None)


def _place(start, length, extent):
    return min(max(start, 0), extent - length)


def grow_to_min_area(bbox, a_min, frame_size):
    """Pad ``bbox`` by one margin on every side until its area reaches ``a_min``.

    The margin is the smallest integer solving ``(w + 2m)(h + 2m) >= a_min``.
    A box pushed past a frame edge slides back inside; a dimension that hits
    the full frame is capped and the other one grows to cover the shortfall.
    """
    fw, fh = check_frame_size(frame_size)
    w, h = box_size(bbox)
    if w * h >= a_min:
        return tuple(bbox)
    s = w + h
    m = max(0, math.ceil((-s + math.sqrt(s * s - 4.0 * (w * h - a_min))) / 4.0 - 1e-9))
    while (w + 2 * m) * (h + 2 * m) < a_min:
        m += 1
    new_w, new_h = w + 2 * m, h + 2 * m
    if new_w > fw:
        new_w = fw
        new_h = max(new_h, math.ceil(a_min / fw))
    if new_h > fh:
        new_h = fh
        new_w = min(fw, max(new_w, math.ceil(a_min / fh)))
    new_h = min(new_h, fh)
    left = _place(bbox[0] - (new_w - w) // 2, new_w, fw)
    top = _place(bbox[1] - (new_h - h) // 2, new_h, fh)
    return (left, top, left + new_w - 1, top + new_h - 1)


def square_patch(box, frame_size, t=0, anchor=None):
    """Square up ``box`` by growing its shorter side, keeping it inside the frame.

    When the longer side exceeds the frame's shorter side the square is capped
    there; ``anchor`` (a point that must stay covered) then limits how far the
    capped square may drift from the box centre.
    """
    fw, fh = check_frame_size(frame_size)
    w, h = box_size(box)
    cx, cy = box_center(box)
    d = float(max(w, h))
    cap = float(min(fw, fh))
    if d > cap:
        d = cap
        if anchor is not None:
            cx = float(np.clip(cx, anchor[0] - d / 2, anchor[0] + d / 2))
            cy = float(np.clip(cy, anchor[1] - d / 2, anchor[1] + d / 2))
    x = float(np.clip(cx, d / 2, fw - d / 2))
    y = float(np.clip(cy, d / 2, fh - d / 2))
    return SquarePatch(x, y, d, int(t))


def fallback_patch(params, frame_size, t=0):
    fw, fh = check_frame_size(frame_size)
    d = min(math.sqrt(params.a_min(frame_size)), float(min(fw, fh)))
    return SquarePatch(fw / 2.0, fh / 2.0, d, int(t), True)


def choose_box(top, second, a_min, frame_size):
    """Box around the chosen C3(s), before squaring."""
    if box_area(top.bbox) >= a_min:
        return tuple(top.bbox)
    grown = grow_to_min_area(top.bbox, a_min, frame_size)
    if second is not None and boxes_overlap(grown, second.bbox):
        merged = grow_to_min_area(union_box(top.bbox, second.bbox), a_min, frame_size)
        # keep the grown top box too, so a larger a_min never yields a smaller patch
        return union_box(merged, grown)
    return grown


def localize_frame(c3s, params=None, frame_size=None, t=0):
    """Square patch for one frame; falls back to a centred square if no C3 qualifies."""
    params = params or LocalizeParams()
    frame_size = check_frame_size(frame_size)
    try:
        top, second = select_candidates(c3s)
    except NoInteriorC3:
        return fallback_patch(params, frame_size, t)
    box = choose_box(top, second, params.a_min(frame_size), frame_size)
    return square_patch(box, frame_size, t, anchor=box_center(top.bbox))


def patches_to_track(patches):
    """Stack patches (sorted by ``t``) into an ``(F, 3)`` array of (x, y, d)."""
    patches = sorted(patches, key=lambda p: p.t)
    return np.array([[p.x, p.y, p.d] for p in patches], dtype=np.float64)
