"""Bridge from pretrained CNN backbones to perceptual feature archives.

Extracts activations at the five classic LPIPS tap points of VGG16 or
AlexNet, channel-unit-normalizes them, and writes PFA1 archives that the
resequencing engine consumes directly.  Also exports per-channel
calibration weights from LPIPS-style linear-head checkpoints.
"""

from .extract import BACKBONES, ExtractError, ExtractorSpec, extract
from .pfa import write_archive
from .weights import WeightExportError, export_weights

__all__ = [
    "BACKBONES",
    "ExtractError",
    "ExtractorSpec",
    "extract",
    "write_archive",
    "WeightExportError",
    "export_weights",
]
