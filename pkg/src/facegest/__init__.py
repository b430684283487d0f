"""facegest: vision-based facial gesture interaction toolkit.

Mouth-shadow segmentation and shape statistics, nostril/nose tracking,
feature-to-control mappings, keypad-plus-mouth text entry, pointing and
hold evaluation tasks, and a streaming session gateway.
"""

__version__ = "0.1.0"

from .frameio import Frame, FrameSequence, OrientedRoi, crop_oriented, luminance, read_pnm, write_pnm
from .mouthseg import (
    BlobMask,
    MouthShape,
    SegmentationParams,
    largest_component,
    principal_axes,
    shape_stats,
    threshold_shadow,
)

__all__ = [
    "__version__",
    "Frame",
    "FrameSequence",
    "OrientedRoi",
    "crop_oriented",
    "luminance",
    "read_pnm",
    "write_pnm",
    "BlobMask",
    "MouthShape",
    "SegmentationParams",
    "largest_component",
    "principal_axes",
    "shape_stats",
    "threshold_shadow",
]
