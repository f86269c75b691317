"""Unsupervised action-localization crops for square video models."""

from .estimators import ActionCropRetargeter, ActionLocalizer, PolyBezierSmoother
from .evalharness import SyntheticSpec, TrackMetrics, evaluate, generate_synthetic
from .localize import LocalizeParams, SquarePatch, localize_frame
from .opticalflow import FlowParams, dense_flow, flow_to_hsv
from .pipeline import PipelineConfig, localize_video, run_pipeline
from .retarget import RetargetParams, crop_patch, retarget_video
from .temporal import (
    PivotSet,
    bezier_eval,
    cohesion_scores,
    correct_endpoints,
    iou,
    select_pivots,
    smooth,
    smooth_track,
)
from .videoio import read_sequence, read_track_sidecar, write_sequence, write_track_sidecar

__version__ = "0.1.0"
