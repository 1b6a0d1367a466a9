"""Multi-scale activation-map producers.

Two families:

- ResidualEnergyActivations: weights-free, deterministic. Uses the energy
  of the signed JPEG recompression residual pooled at scale-dependent
  windows, so splices pasted from material with a different compression
  history light up; deeper scales are coarser.
- TorchGradCAM: Grad-CAM over the stage outputs of a torchvision ResNet
  classifier loaded from a local checkpoint. Optional; requires torch.
"""

from __future__ import annotations

import hashlib
import io
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.ndimage import uniform_filter, zoom


class ModelLoadError(RuntimeError):
    pass


class ResidualEnergyActivations:
    """JPEG-residual-energy saliency at classifier-like scales."""

    name = "residual-energy"

    def __init__(self, jpeg_quality: int = 90):
        if not (1 <= jpeg_quality <= 100):
            raise ValueError(f"JPEG quality must be in 1..100, got {jpeg_quality}")
        self.jpeg_quality = jpeg_quality

    def describe(self) -> dict:
        return {"backend": self.name, "jpeg_quality": self.jpeg_quality}

    def _residual_energy(self, rgb: np.ndarray) -> np.ndarray:
        buf = io.BytesIO()
        Image.fromarray(rgb).save(buf, format="JPEG", quality=self.jpeg_quality)
        buf.seek(0)
        recompressed = np.asarray(Image.open(buf).convert("RGB"))
        residual = recompressed.astype(np.float64) - rgb.astype(np.float64)
        return np.abs(residual).mean(axis=2) / 255.0

    def activation_stack(self, rgb: np.ndarray, scales: tuple[int, ...]) -> dict[int, np.ndarray]:
        """One [0, 1] map per scale; larger scale ids pool over wider windows."""
        energy = self._residual_energy(rgb)
        out: dict[int, np.ndarray] = {}
        for scale in scales:
            window = 2 ** (scale + 1)  # scales 2,3,4 -> 8/16/32 px pooling
            pooled = uniform_filter(energy, size=window, mode="nearest")
            out[scale] = pooled
        return out


class TorchGradCAM:
    """Grad-CAM on ResNet stage outputs (layer2/3/4 for scales 2/3/4)."""

    name = "torch-gradcam"

    def __init__(self, arch: str = "resnet18", weights: Path | str | None = None, device: str = "cpu"):
        try:
            import torch
            import torchvision.models as tvm
        except ImportError as exc:
            raise ModelLoadError(f"torch/torchvision unavailable: {exc}") from exc
        if not hasattr(tvm, arch):
            raise ModelLoadError(f"unknown torchvision architecture {arch!r}")
        self._torch = torch
        self.arch = arch
        self.device = device
        self.weights_path = Path(weights) if weights else None
        self.weights_sha256 = None
        model = getattr(tvm, arch)(weights=None)
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
            "arch": self.arch,
            "device": self.device,
            "weights": str(self.weights_path) if self.weights_path else None,
            "weights_sha256": self.weights_sha256,
        }

    def activation_stack(self, rgb: np.ndarray, scales: tuple[int, ...]) -> dict[int, np.ndarray]:
        torch = self._torch
        layers = {2: "layer2", 3: "layer3", 4: "layer4"}
        unknown = [s for s in scales if s not in layers]
        if unknown:
            raise ValueError(f"Grad-CAM scales must be within {sorted(layers)}, got {unknown}")

        x = torch.from_numpy(rgb.astype(np.float32) / 255.0).permute(2, 0, 1)[None]
        mean = torch.tensor([0.485, 0.456, 0.406]).view(1, 3, 1, 1)
        std = torch.tensor([0.229, 0.224, 0.225]).view(1, 3, 1, 1)
        x = ((x - mean) / std).to(self.device)

        captured: dict[int, "torch.Tensor"] = {}
        handles = []
        for scale in scales:
            layer = getattr(self.model, layers[scale])

            def hook(module, inputs, output, scale=scale):
                output.retain_grad()
                captured[scale] = output

            handles.append(layer.register_forward_hook(hook))
        try:
            x.requires_grad_(False)
            logits = self.model(x)
            score = logits.max()
            self.model.zero_grad(set_to_none=True)
            score.backward()
        finally:
            for h in handles:
                h.remove()

        h_out, w_out = rgb.shape[:2]
        out: dict[int, np.ndarray] = {}
        for scale in scales:
            feats = captured[scale]
            grads = feats.grad
            weights = grads.mean(dim=(2, 3), keepdim=True)
            cam = torch.relu((weights * feats).sum(dim=1))[0].detach().cpu().numpy()
            zoomed = zoom(cam, (h_out / cam.shape[0], w_out / cam.shape[1]), order=1)
            out[scale] = np.clip(zoomed[:h_out, :w_out], 0.0, None)
        return out


def make_activation_backend(kind: str, *, quality: int = 90, arch: str = "resnet18",
                            weights: Path | str | None = None, device: str = "cpu"):
    if kind == "residual-energy":
        return ResidualEnergyActivations(jpeg_quality=quality)
    if kind == "torch-gradcam":
        return TorchGradCAM(arch=arch, weights=weights, device=device)
    raise ValueError(f"unknown activation backend {kind!r}")
