"""Region-map producers emitting anonymous labels (class ids discarded).

The builtin presets are weights-free classical segmenters tuned to the
granularity of the models they stand in for: `deeplab` yields few large
regions, `pspnet` a medium partition, `sam` many fine regions. The
optional TorchDeepLab adapter runs a torchvision DeepLabV3 checkpoint and
anonymizes its classes into connected regions.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np
from scipy.ndimage import label as connected_label
from skimage.segmentation import felzenszwalb, slic

from .activations import ModelLoadError

SEGMENTER_CHOICES = ("deeplab", "sam", "pspnet")


class BuiltinSegmenter:
    """Classical superpixel/graph segmentation at a preset granularity."""

    def __init__(self, preset: str):
        if preset not in SEGMENTER_CHOICES:
            raise ValueError(f"segmenter must be one of {SEGMENTER_CHOICES}, got {preset!r}")
        self.preset = preset

    @property
    def name(self) -> str:
        return f"builtin-{self.preset}"

    def describe(self) -> dict:
        return {"backend": self.name, "preset": self.preset}

    def label_map(self, rgb: np.ndarray) -> np.ndarray:
        img = rgb.astype(np.float64) / 255.0
        if self.preset == "deeplab":
            raw = felzenszwalb(img, scale=600, sigma=1.2, min_size=1500)
            labels = raw + 1
        elif self.preset == "pspnet":
            labels = slic(img, n_segments=40, compactness=12.0, start_label=1,
                          enforce_connectivity=True)
        else:  # sam: many fine regions
            labels = slic(img, n_segments=220, compactness=8.0, start_label=1,
                          enforce_connectivity=True)
        labels = np.asarray(labels, dtype=np.int32)
        if labels.max() > 65535:
            raise ValueError("segmentation produced more than 65535 regions")
        return labels


class TorchDeepLab:
    """DeepLabV3 from torchvision with a local checkpoint; anonymous regions."""

    name = "torch-deeplab"

    def __init__(self, weights: Path | str | None = None, device: str = "cpu"):
        try:
            import torch
            from torchvision.models.segmentation import deeplabv3_resnet50
        except ImportError as exc:
            raise ModelLoadError(f"torch/torchvision unavailable: {exc}") from exc
        self._torch = torch
        self.device = device
        self.weights_path = Path(weights) if weights else None
        self.weights_sha256 = None
        model = deeplabv3_resnet50(weights=None, weights_backbone=None)
        if self.weights_path is not None:
            if not self.weights_path.is_file():
                raise ModelLoadError(f"no such checkpoint: {self.weights_path}")
            self.weights_sha256 = hashlib.sha256(self.weights_path.read_bytes()).hexdigest()
            try:
                state = torch.load(self.weights_path, map_location=device, weights_only=True)
                model.load_state_dict(state)
            except Exception as exc:
                raise ModelLoadError(f"cannot load checkpoint {self.weights_path}: {exc}") from exc
        self.model = model.to(device).eval()

    def describe(self) -> dict:
        return {
            "backend": self.name,
            "device": self.device,
            "weights": str(self.weights_path) if self.weights_path else None,
            "weights_sha256": self.weights_sha256,
        }

    def label_map(self, rgb: np.ndarray) -> np.ndarray:
        torch = self._torch
        x = torch.from_numpy(rgb.astype(np.float32) / 255.0).permute(2, 0, 1)[None]
        mean = torch.tensor([0.485, 0.456, 0.406]).view(1, 3, 1, 1)
        std = torch.tensor([0.229, 0.224, 0.225]).view(1, 3, 1, 1)
        x = ((x - mean) / std).to(self.device)
        with torch.no_grad():
            classes = self.model(x)["out"].argmax(dim=1)[0].cpu().numpy()
        return anonymize_classes(classes)


def anonymize_classes(classes: np.ndarray) -> np.ndarray:
    """Split a semantic class map into anonymous connected regions.

    Class 0 stays background; every connected component of every other
    class becomes its own region with a fresh label >= 1.
    """
    out = np.zeros(classes.shape, dtype=np.int32)
    next_label = 1
    for cls in np.unique(classes):
        if cls == 0:
            continue
        comps, n = connected_label(classes == cls)
        for i in range(1, n + 1):
            out[comps == i] = next_label
            next_label += 1
    if next_label - 1 > 65535:
        raise ValueError("segmentation produced more than 65535 regions")
    return out


def make_segmenter(preset: str, *, backend: str = "builtin",
                   weights: Path | str | None = None, device: str = "cpu"):
    if backend == "builtin":
        return BuiltinSegmenter(preset)
    if backend == "torch":
        if preset != "deeplab":
            raise ModelLoadError(f"no torch adapter for {preset!r} (only deeplab)")
        return TorchDeepLab(weights=weights, device=device)
    raise ValueError(f"unknown segmenter backend {backend!r}")
