"""Adapters that bridge classifiers/segmenters to maniloc interchange files."""

__version__ = "0.1.0"

from .activations import ModelLoadError, ResidualEnergyActivations, TorchGradCAM
from .formats import (
    MANIFEST_HEADER,
    FormatError,
    normalize_minmax,
    read_manifest_file,
    write_heatmap_png16,
    write_labelmap_png16,
    write_manifest_file,
    write_mask_png8,
)
from .jobs import ExportError, ExportJob, export_gradcam_stack, export_labelmap, run_export, write_manifest
from .segmenters import SEGMENTER_CHOICES, BuiltinSegmenter, TorchDeepLab, anonymize_classes

__all__ = [
    "BuiltinSegmenter",
    "ExportError",
    "ExportJob",
    "FormatError",
    "MANIFEST_HEADER",
    "ModelLoadError",
    "ResidualEnergyActivations",
    "SEGMENTER_CHOICES",
    "TorchDeepLab",
    "TorchGradCAM",
    "anonymize_classes",
    "export_gradcam_stack",
    "export_labelmap",
    "normalize_minmax",
    "read_manifest_file",
    "run_export",
    "write_heatmap_png16",
    "write_labelmap_png16",
    "write_manifest_file",
    "write_manifest",
    "write_mask_png8",
]
