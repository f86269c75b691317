"""Synthetic videos with known subject boxes, and track quality metrics.

The subject is a red/yellow checkerboard square; nothing else in a generated
frame uses those two exact colours, so its box can be read back from pixels.
Backgrounds and distractors are grey (R == G == B).
"""

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .exceptions import LengthMismatch, SubjectEscapesFrame
from .pipeline import PipelineConfig, localize_video, smooth_raw_track
from .temporal import iou
from .validation import check_track

SUBJECT_COLORS = np.array([[220, 30, 30], [240, 220, 20]], dtype=np.uint8)
TRAJECTORIES = ("linear", "sinusoidal", "random-walk")


@dataclass(frozen=True)
class SyntheticSpec:
    frame_w: int = 128
    frame_h: int = 96
    n_frames: int = 64
    subject_size: int = 40
    velocity: tuple = (1.0, 0.5)
    trajectory: str = "linear"
    amplitude: float = 12.0  # sinusoidal: vertical swing in pixels
    period: float = 32.0  # sinusoidal: frames per cycle
    start: tuple = None  # subject top-left at t=0; None centres the path
    background: str = "static"
    background_velocity: tuple = (-1.0, 0.0)
    noise_sigma: float = 2.0
    jitter_frames: float = 0.0  # fraction of frames with a flashed distractor
    checker_cell: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.trajectory not in TRAJECTORIES:
            raise ValueError(f"trajectory must be one of {TRAJECTORIES}")
        if self.background not in ("static", "drifting"):
            raise ValueError("background must be 'static' or 'drifting'")
        if self.n_frames < 2:
            raise ValueError("n_frames must be >= 2")
        if not 0 < self.subject_size <= min(self.frame_w, self.frame_h):
            raise ValueError("subject must fit in the frame")
        if not 0.0 <= self.jitter_frames <= 1.0:
            raise ValueError("jitter_frames must lie in [0, 1]")


@dataclass
class TrackMetrics:
    mean_iou_gt: float
    center_rmse: float
    jitter_raw: float
    jitter_smoothed: float
    containment: float
    mean_iou_raw: float

    def to_dict(self):
        return asdict(self)


def _subject_path(spec, rng):
    n, s = spec.n_frames, spec.subject_size
    hi = np.array([spec.frame_w - s, spec.frame_h - s], dtype=np.float64)
    t = np.arange(n, dtype=np.float64)[:, None]
    v = np.asarray(spec.velocity, dtype=np.float64)
    if spec.trajectory == "random-walk":
        return _random_walk(spec, hi, v, rng)
    path = t * v
    if spec.trajectory == "sinusoidal":
        path[:, 1] += spec.amplitude * np.sin(2 * math.pi * t[:, 0] / spec.period)
    if spec.start is None:
        offset = hi / 2 - (path.min(axis=0) + path.max(axis=0)) / 2
    else:
        offset = np.asarray(spec.start, dtype=np.float64)
    pos = np.floor(path + offset + 0.5).astype(np.int64)
    if (pos < 0).any() or (pos > hi).any():
        raise SubjectEscapesFrame(
            f"{spec.trajectory} path spans x {pos[:, 0].min()}..{pos[:, 0].max()}, "
            f"y {pos[:, 1].min()}..{pos[:, 1].max()}; allowed 0..{int(hi[0])}, 0..{int(hi[1])}"
        )
    return pos


def _random_walk(spec, hi, v, rng, margin=10.0):
    """Persistent walk: at least 1 px/frame along its dominant axis, off the border.

    A stalled subject has no motion for the flow stage to find, and one hugging
    the border only produces border-touching components, so both are avoided.
    """
    n = spec.n_frames
    lo_b = np.minimum(margin, hi / 4)
    hi_b = hi - lo_b
    pos = np.empty((n, 2))
    pos[0] = (lo_b + hi_b) / 2 if spec.start is None else spec.start
    vel = v.copy() if np.abs(v).max() > 0 else np.array([1.0, 0.0])
    vmax = 2.0 * max(float(np.hypot(*v)), 1.0)
    for i in range(1, n):
        step = vel + rng.normal(0.0, 0.5, 2)
        if np.abs(step).max() < 1.0:
            step = vel if np.abs(step).max() == 0 else step
            step = step / np.abs(step).max()
        speed = np.hypot(*step)
        if speed > vmax:
            step *= vmax / speed
        vel = step
        p = pos[i - 1] + vel
        for a in range(2):
            if p[a] < lo_b[a]:
                p[a], vel[a] = 2 * lo_b[a] - p[a], -vel[a]
            elif p[a] > hi_b[a]:
                p[a], vel[a] = 2 * hi_b[a] - p[a], -vel[a]
        pos[i] = np.clip(p, 0, hi)
    return np.floor(pos + 0.5).astype(np.int64)


def _background(spec, rng):
    pad_x = pad_y = 0
    if spec.background == "drifting":
        bvx, bvy = spec.background_velocity
        pad_x = int(math.ceil(abs(bvx) * spec.n_frames)) + 1
        pad_y = int(math.ceil(abs(bvy) * spec.n_frames)) + 1
    canvas = gaussian_filter(rng.random((spec.frame_h + pad_y, spec.frame_w + pad_x)), 2.0)
    canvas = (canvas - canvas.min()) / max(np.ptp(canvas), 1e-12)
    return 40.0 + 160.0 * canvas, pad_x, pad_y


def _drift_offset(velocity, pad, t):
    if pad == 0:
        return 0
    base = 0 if velocity >= 0 else pad - 1
    return int(np.clip(math.floor(base + velocity * t + 0.5), 0, pad))


def _checker(spec):
    s, c = spec.subject_size, spec.checker_cell
    yy, xx = np.mgrid[0:s, 0:s]
    return SUBJECT_COLORS[((yy // c) + (xx // c)) % 2]


def generate_synthetic(spec=None):
    """Render a video and its ground-truth track (tight square around the subject)."""
    spec = spec or SyntheticSpec()
    rng = np.random.default_rng(spec.seed)
    pos = _subject_path(spec, rng)
    canvas, pad_x, pad_y = _background(spec, rng)
    subject = _checker(spec)
    n, w, h, s = spec.n_frames, spec.frame_w, spec.frame_h, spec.subject_size
    n_corrupt = int(math.floor(spec.jitter_frames * n + 0.5))
    corrupt = set(rng.choice(n, size=n_corrupt, replace=False).tolist()) if n_corrupt else set()
    bvx, bvy = spec.background_velocity
    video = np.empty((n, h, w, 3), dtype=np.uint8)
    for t in range(n):
        ox = _drift_offset(bvx, pad_x, t)
        oy = _drift_offset(bvy, pad_y, t)
        bg = canvas[oy : oy + h, ox : ox + w].copy()
        if spec.noise_sigma > 0:
            bg += rng.normal(0.0, spec.noise_sigma, bg.shape)
        if t in corrupt:
            _paint_distractor(bg, pos[t], s, rng)
        gray = np.clip(np.rint(bg), 0, 255).astype(np.uint8)
        frame = np.repeat(gray[:, :, None], 3, axis=2)
        x0, y0 = pos[t]
        frame[y0 : y0 + s, x0 : x0 + s] = subject
        video[t] = frame
    gt = np.column_stack([pos[:, 0] + s / 2.0, pos[:, 1] + s / 2.0, np.full(n, float(s))])
    return video, gt


def _paint_distractor(bg, subject_pos, s, rng):
    h, w = bg.shape
    size = max(4, s // 2)
    sx, sy = subject_pos
    for _ in range(100):
        x = int(rng.integers(2, max(3, w - size - 2)))
        y = int(rng.integers(2, max(3, h - size - 2)))
        if x + size <= sx or sx + s <= x or y + size <= sy or sy + s <= y:
            bg[y : y + size, x : x + size] = rng.uniform(0, 255, (size, size))
            return


def subject_box_from_pixels(frame):
    """Tight ``(left, top, right, bottom)`` box of subject-coloured pixels, or None."""
    frame = np.asarray(frame)
    hit = np.zeros(frame.shape[:2], dtype=bool)
    for color in SUBJECT_COLORS:
        hit |= np.all(frame == color, axis=2)
    if not hit.any():
        return None
    ys, xs = np.nonzero(hit)
    return int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())


def jitter(track):
    """Mean norm of the discrete second difference of (x, y, d)."""
    track = np.asarray(track, dtype=np.float64)
    if len(track) < 3:
        return 0.0
    accel = track[2:] - 2.0 * track[1:-1] + track[:-2]
    return float(np.linalg.norm(accel, axis=1).mean())


def mean_iou(a, b):
    return float(np.mean([iou(p, q) for p, q in zip(a, b)]))


def containment(pred, gt):
    """Fraction of frames whose ground-truth centre lies inside the predicted square."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    half = pred[:, 2] / 2
    inside = (np.abs(gt[:, 0] - pred[:, 0]) <= half) & (np.abs(gt[:, 1] - pred[:, 1]) <= half)
    return float(inside.mean())


def evaluate(pred, gt, raw=None):
    """Compare a predicted track with ground truth; ``raw`` defaults to ``pred``."""
    pred = check_track(pred)
    gt = check_track(gt)
    raw = pred if raw is None else check_track(raw)
    if not len(pred) == len(gt) == len(raw):
        raise LengthMismatch(f"track lengths differ: {len(pred)}, {len(gt)}, {len(raw)}")
    err = pred[:, :2] - gt[:, :2]
    return TrackMetrics(
        mean_iou_gt=mean_iou(pred, gt),
        center_rmse=float(np.sqrt((err ** 2).sum(axis=1).mean())),
        jitter_raw=jitter(raw),
        jitter_smoothed=jitter(pred),
        containment=containment(pred, gt),
        mean_iou_raw=mean_iou(raw, gt),
    )


def run_case(spec, config=None):
    """Generate, localize, smooth and score one synthetic video."""
    config = config or PipelineConfig()
    video, gt = generate_synthetic(spec)
    raw, flags, _ = localize_video(video, config)
    smoothed, pivots = smooth_raw_track(raw, config, (spec.frame_w, spec.frame_h))
    metrics = evaluate(smoothed, gt, raw)
    row = {"seed": spec.seed, "trajectory": spec.trajectory, "low_confidence": int(sum(flags))}
    row.update(metrics.to_dict())
    row["containment_raw"] = containment(raw, gt)
    return row


def run_suite(seeds=range(10), trajectories=TRAJECTORIES, config=None, **spec_fields):
    """Score every (seed, trajectory) case; returns ``(rows, summary)``."""
    rows = [
        run_case(SyntheticSpec(seed=seed, trajectory=traj, **spec_fields), config)
        for traj in trajectories
        for seed in seeds
    ]
    keys = [k for k in rows[0] if k not in ("seed", "trajectory")]
    summary = {k: float(np.mean([r[k] for r in rows])) for k in keys}
    return rows, summary
