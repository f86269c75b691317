"""Motion clustering, mask cleanup, saturation-ordered stacking and C3 extraction.

A C3 (cluster connected component) is an 8-connected blob of pixels that all
carry the same label in the stacked label map.
"""

from dataclasses import dataclass, field

import cv2
import numpy as np

from .exceptions import AllMasksEmpty, DimensionMismatch, SingleClusterError

BACKGROUND = -1
KMEANS_TOL = 1e-4
KMEANS_MAX_ITER = 100


@dataclass
class ClusterLabelMap:
    labels: np.ndarray  # (H, W) int, BACKGROUND where nothing was painted
    k: int
    centroids: np.ndarray = None  # (K, 2) in the (s cos h, s sin h) plane

    @property
    def shape(self):
        return self.labels.shape


@dataclass
class C3:
    cluster_id: int
    pixels: np.ndarray = field(repr=False)  # (N, 2) of (x, y)
    bbox: tuple  # (left, top, right, bottom), inclusive
    avg_saturation: float
    touches_border: bool

    @property
    def size(self):
        return len(self.pixels)


def motion_features(hsv):
    """Embed hue on the circle so 359 and 1 degrees are neighbours."""
    hsv = np.asarray(hsv, dtype=np.float64)
    theta = np.radians(hsv[..., 0])
    s = hsv[..., 1]
    return np.stack([s * np.cos(theta), s * np.sin(theta)], axis=-1).reshape(-1, 2)


def _assign(points, centroids):
    d2 = np.zeros((len(points), len(centroids)))
    for a in range(points.shape[1]):
        d2 += (points[:, a, None] - centroids[None, :, a]) ** 2
    return np.argmin(d2, axis=1)


def kmeanspp_init(points, k, rng):
    """Pick up to ``k`` seeds by D^2 sampling.

    Points equal to an existing seed have zero weight, so the seeds are always
    distinct; fewer than ``k`` come back when the data has fewer distinct points.
    """
    seeds = [points[rng.integers(len(points))]]
    closest = ((points - seeds[0]) ** 2).sum(axis=1)
    while len(seeds) < k:
        total = closest.sum()
        if total <= 0.0:
            break
        idx = rng.choice(len(points), p=closest / total)
        seeds.append(points[idx])
        closest = np.minimum(closest, ((points - points[idx]) ** 2).sum(axis=1))
    return np.array(seeds)


def kmeans(points, k, seed):
    """Lloyd iterations from a k-means++ start. Returns ``(labels, centroids)``.

    ``k`` shrinks to the number of distinct points when there are fewer.
    """
    points = np.asarray(points, dtype=np.float64)
    rng = np.random.default_rng(seed)
    centroids = kmeanspp_init(points, k, rng)
    k = len(centroids)
    if k < 2:
        raise SingleClusterError("fewer than two distinct feature points")
    for _ in range(KMEANS_MAX_ITER):
        labels = _assign(points, centroids)
        counts = np.bincount(labels, minlength=k)
        updated = centroids.copy()
        nonempty = counts > 0
        for a in range(points.shape[1]):
            sums = np.bincount(labels, weights=points[:, a], minlength=k)
            updated[nonempty, a] = sums[nonempty] / counts[nonempty]
        shift = np.sqrt(((updated - centroids) ** 2).sum(axis=1)).max()
        centroids = updated
        if shift < KMEANS_TOL:
            break
    return _assign(points, centroids), centroids


def kmeanspp_cluster(hsv, k=4, seed=0):
    """Cluster motion pixels by speed and direction."""
    if k < 2:
        raise ValueError("k must be >= 2")
    hsv = np.asarray(hsv)
    h, w = hsv.shape[:2]
    points = motion_features(hsv)
    if len(points) < k:
        raise ValueError(f"{len(points)} pixels cannot form {k} clusters")
    labels, centroids = kmeans(points, k, seed)
    return ClusterLabelMap(labels.reshape(h, w), len(centroids), centroids)


def inertia(points, labels, centroids):
    points = np.asarray(points, dtype=np.float64)
    return float(((points - centroids[labels]) ** 2).sum())


def disc(radius):
    """Digital disc ``x**2 + y**2 <= r**2`` as a uint8 structuring element."""
    r = int(radius)
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
    return (xx * xx + yy * yy <= r * r).astype(np.uint8)


def remove_small_components(mask, min_component_px):
    mask = np.asarray(mask, dtype=bool)
    if min_component_px <= 1 or not mask.any():
        return mask
    n, labels, stats, _ = cv2.connectedComponentsWithStats(mask.astype(np.uint8), connectivity=8)
    keep = stats[:, cv2.CC_STAT_AREA] >= min_component_px
    keep[0] = False
    return keep[labels]


def clean_cluster_mask(mask, open_radius=2, close_radius=3, min_component_px=1):
    """Close, then open, then drop 8-connected specks below ``min_component_px``.

    Erosion treats pixels beyond the frame edge as set, so blobs cut off by the
    border are not eaten from that side.
    """
    m = np.asarray(mask, dtype=bool).astype(np.uint8)
    if m.ndim != 2:
        raise DimensionMismatch(f"mask must be 2-D, got shape {m.shape}")
    if close_radius > 0:
        se = disc(close_radius)
        m = cv2.erode(cv2.dilate(m, se), se)
    if open_radius > 0:
        se = disc(open_radius)
        m = cv2.dilate(cv2.erode(m, se), se)
    return remove_small_components(m.astype(bool), min_component_px)


def stack_by_saturation(cleaned_masks, hsv):
    """Paint cluster masks from least to most saturated onto one label map.

    Equal saturations paint the smaller cluster id first, so the larger id wins
    the overlap.
    """
    sat = np.asarray(hsv, dtype=np.float64)[..., 1]
    layers = []
    for cluster_id, mask in cleaned_masks:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != sat.shape:
            raise DimensionMismatch(f"mask shape {mask.shape} != image shape {sat.shape}")
        if mask.any():
            layers.append((float(sat[mask].mean()), int(cluster_id), mask))
    if not layers:
        raise AllMasksEmpty("no cluster survived cleaning")
    layers.sort(key=lambda item: (item[0], item[1]))
    labels = np.full(sat.shape, BACKGROUND, dtype=np.int64)
    for _, cluster_id, mask in layers:
        labels[mask] = cluster_id
    k = max(len(cleaned_masks), max(c for _, c, _ in layers) + 1)
    return ClusterLabelMap(labels, k)


def extract_c3s(stacked, hsv):
    """8-connected components of every non-background label."""
    labels = stacked.labels if isinstance(stacked, ClusterLabelMap) else np.asarray(stacked)
    sat = np.asarray(hsv, dtype=np.float64)[..., 1]
    h, w = labels.shape
    out = []
    for cluster_id in np.unique(labels):
        if cluster_id == BACKGROUND:
            continue
        n, comp = cv2.connectedComponents((labels == cluster_id).astype(np.uint8), connectivity=8)
        for c in range(1, n):
            ys, xs = np.nonzero(comp == c)
            left, right, top, bottom = xs.min(), xs.max(), ys.min(), ys.max()
            out.append(
                C3(
                    cluster_id=int(cluster_id),
                    pixels=np.stack([xs, ys], axis=1),
                    bbox=(int(left), int(top), int(right), int(bottom)),
                    avg_saturation=float(sat[ys, xs].mean()),
                    touches_border=bool(left == 0 or top == 0 or right == w - 1 or bottom == h - 1),
                )
            )
    return out


def default_min_component_px(width, height, fraction=0.0005):
    return max(1, int(round(fraction * width * height)))


def segment_motion(hsv, k=4, seed=0, open_radius=2, close_radius=3, min_component_px=None):
    """Full per-frame segmentation. Returns ``(clusters, stacked, c3s)``.

    A frame without two distinct motion features (e.g. no motion at all) or
    whose clusters all vanish under cleaning yields an empty C3 list.
    """
    h, w = np.asarray(hsv).shape[:2]
    if min_component_px is None:
        min_component_px = default_min_component_px(w, h)
    blank = ClusterLabelMap(np.full((h, w), BACKGROUND, dtype=np.int64), 0)
    try:
        clusters = kmeanspp_cluster(hsv, k, seed)
    except SingleClusterError:
        return None, blank, []
    masks = [
        (c, clean_cluster_mask(clusters.labels == c, open_radius, close_radius, min_component_px))
        for c in range(clusters.k)
    ]
    try:
        stacked = stack_by_saturation(masks, hsv)
    except AllMasksEmpty:
        return clusters, blank, []
    stacked.centroids = clusters.centroids
    return clusters, stacked, extract_c3s(stacked, hsv)


def label_map_to_rgb(labels):
    """Indexed-colour rendering of a label map; background is black."""
    palette = np.array(
        [[230, 25, 75], [60, 180, 75], [255, 225, 25], [0, 130, 200],
         [245, 130, 48], [145, 30, 180], [70, 240, 240], [240, 50, 230]],
        dtype=np.uint8,
    )
    labels = np.asarray(labels)
    rgb = np.zeros(labels.shape + (3,), dtype=np.uint8)
    fg = labels != BACKGROUND
    rgb[fg] = palette[labels[fg] % len(palette)]
    return rgb
