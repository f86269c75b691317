"""scikit-learn style wrappers around the functional pipeline.

``ActionLocalizer`` maps a video to its raw patch track, ``PolyBezierSmoother``
maps a raw track to a smoothed one, and ``ActionCropRetargeter`` chains both
and crops. Videos are ``(F, H, W, 3)`` uint8 arrays; tracks are ``(F, 3)``
arrays of (x, y, d).
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .pipeline import PipelineConfig, localize_video
from .retarget import RetargetParams, retarget_video
from .temporal import (
    DEFAULT_PIVOT_FRACTION,
    cohesion_scores,
    correct_endpoints,
    default_pivot_budget,
    select_pivots,
    smooth_track,
)
from .validation import check_track, check_video


class ActionLocalizer(TransformerMixin, BaseEstimator):
    """Per-frame square action patches from motion segmentation.

    Localization is unsupervised, so ``fit`` only records the frame geometry
    and the track of the video it saw.
    """

    def __init__(
        self,
        n_clusters=4,
        a_min_fraction=0.25,
        open_radius=2,
        close_radius=3,
        min_component_fraction=0.0005,
        pyramid_levels=3,
        window_size=15,
        flow_iterations=3,
        random_state=0,
        n_jobs=1,
    ):
        self.n_clusters = n_clusters
        self.a_min_fraction = a_min_fraction
        self.open_radius = open_radius
        self.close_radius = close_radius
        self.min_component_fraction = min_component_fraction
        self.pyramid_levels = pyramid_levels
        self.window_size = window_size
        self.flow_iterations = flow_iterations
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _config(self):
        return PipelineConfig(
            n_clusters=self.n_clusters,
            a_min_fraction=self.a_min_fraction,
            open_radius=self.open_radius,
            close_radius=self.close_radius,
            min_component_fraction=self.min_component_fraction,
            pyramid_levels=self.pyramid_levels,
            window_size=self.window_size,
            flow_iterations=self.flow_iterations,
            seed=int(self.random_state or 0),
            workers=int(self.n_jobs or 1),
        )

    def fit(self, X, y=None):
        X = check_video(X)
        self.frame_size_ = (X.shape[2], X.shape[1])
        self.track_, flags, _ = localize_video(X, self._config())
        self.low_confidence_ = np.array(flags, dtype=bool)
        return self

    def transform(self, X):
        check_is_fitted(self, "frame_size_")
        X = check_video(X)
        track, _, _ = localize_video(X, self._config())
        return track

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X).track_.copy()


class PolyBezierSmoother(TransformerMixin, BaseEstimator):
    """Pivot-anchored piecewise Bezier smoothing of a patch track.

    ``fit`` scores temporal cohesion and picks pivots; ``transform`` pins the
    endpoints to the outermost pivots and evaluates the curve.
    """

    def __init__(self, pivot_fraction=DEFAULT_PIVOT_FRACTION, pivot_budget=None, frame_size=None):
        self.pivot_fraction = pivot_fraction
        self.pivot_budget = pivot_budget
        self.frame_size = frame_size

    def fit(self, X, y=None):
        X = check_track(X)
        budget = self.pivot_budget
        if budget is None:
            budget = default_pivot_budget(len(X), self.pivot_fraction)
        self.scores_ = cohesion_scores(X)
        self.pivots_ = select_pivots(self.scores_, budget)
        self.n_frames_ = len(X)
        return self

    def transform(self, X):
        check_is_fitted(self, "pivots_")
        X = check_track(X, self.n_frames_)
        return smooth_track(correct_endpoints(X, self.pivots_), self.pivots_, self.frame_size)


class ActionCropRetargeter(TransformerMixin, BaseEstimator):
    """Square, subject-following crop of a video.

    ``fit`` localizes and smooths; ``transform`` crops any video with the same
    frame count and size along the fitted track.
    """

    def __init__(
        self,
        out_size=56,
        resample="bilinear",
        a_min_fraction=0.25,
        n_clusters=4,
        pivot_fraction=DEFAULT_PIVOT_FRACTION,
        pivot_budget=None,
        random_state=0,
        n_jobs=1,
    ):
        self.out_size = out_size
        self.resample = resample
        self.a_min_fraction = a_min_fraction
        self.n_clusters = n_clusters
        self.pivot_fraction = pivot_fraction
        self.pivot_budget = pivot_budget
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        X = check_video(X)
        localizer = ActionLocalizer(
            n_clusters=self.n_clusters,
            a_min_fraction=self.a_min_fraction,
            random_state=self.random_state,
            n_jobs=self.n_jobs,
        ).fit(X)
        self.frame_size_ = localizer.frame_size_
        self.raw_track_ = localizer.track_
        self.low_confidence_ = localizer.low_confidence_
        smoother = PolyBezierSmoother(self.pivot_fraction, self.pivot_budget, self.frame_size_)
        self.track_ = smoother.fit_transform(self.raw_track_)
        self.pivots_ = smoother.pivots_
        return self

    def transform(self, X):
        check_is_fitted(self, "track_")
        X = check_video(X)
        if (X.shape[2], X.shape[1]) != self.frame_size_:
            raise ValueError(f"video is {X.shape[2]}x{X.shape[1]}, fitted on {self.frame_size_}")
        return retarget_video(X, self.track_, RetargetParams(self.out_size, self.resample))
