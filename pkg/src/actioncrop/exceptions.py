"""Exception hierarchy.

Every data-level failure derives from :class:`ActionCropError` so the CLI can
map it to a single exit code without swallowing programming errors.
"""


class ActionCropError(Exception):
    """Base class for data errors raised by the pipeline."""


class DecodeError(ActionCropError):
    pass


class IoError(ActionCropError):
    pass


class MixedDimensions(ActionCropError):
    pass


class TooFewFrames(ActionCropError):
    pass


class DimensionMismatch(ActionCropError):
    pass


class SingleClusterError(ActionCropError):
    """Fewer than two distinct feature points, so no partition exists."""


class AllMasksEmpty(ActionCropError):
    pass


class NoInteriorC3(ActionCropError):
    """Every component touches the image border (or there are none)."""


class EmptyTrack(ActionCropError):
    pass


class PatchOutOfBounds(ActionCropError):
    pass


class SubjectEscapesFrame(ActionCropError):
    pass


class LengthMismatch(ActionCropError):
    pass


class StageError(ActionCropError):
    """Wraps an error with the pipeline stage and frame index it came from."""

    def __init__(self, stage, frame, cause):
        self.stage = stage
        self.frame = frame
        self.cause = cause
        where = f"stage {stage!r}" + (f", frame {frame}" if frame is not None else "")
        super().__init__(f"{where}: {type(cause).__name__}: {cause}")
