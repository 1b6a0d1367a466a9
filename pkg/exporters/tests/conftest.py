import io

import numpy as np
import pytest
from PIL import Image

from maniloc_exporters import write_mask_png8


def textured(seed: int, h: int = 192, w: int = 192) -> np.ndarray:
    """Deterministic textured RGB content."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    base = np.stack(
        [
            128 + 70 * np.sin(xx / 19) * np.cos(yy / 13),
            128 + 70 * np.cos(xx / 11 + 2),
            128 + 70 * np.sin((xx + yy) / 23),
        ],
        axis=2,
    )
    base += rng.normal(0, 12, size=(h, w, 3))
    return np.clip(base, 0, 255).astype(np.uint8)


def jpeg_decode(rgb: np.ndarray, quality: int) -> np.ndarray:
    buf = io.BytesIO()
    Image.fromarray(rgb).save(buf, format="JPEG", quality=quality)
    buf.seek(0)
    return np.asarray(Image.open(buf).convert("RGB")).astype(np.uint8)


def spliced_sample(seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Host with q70 JPEG history + never-compressed donor patch, and its mask."""
    host = jpeg_decode(textured(seed), 70)
    donor = textured(seed + 100)
    rng = np.random.default_rng(seed + 500)
    hh, ww = int(rng.integers(48, 72)), int(rng.integers(48, 80))
    y0 = int(rng.integers(16, host.shape[0] - hh - 16))
    x0 = int(rng.integers(16, host.shape[1] - ww - 16))
    composite = host.copy()
    composite[y0 : y0 + hh, x0 : x0 + ww] = donor[y0 : y0 + hh, x0 : x0 + ww]
    gt = np.zeros(host.shape[:2], dtype=bool)
    gt[y0 : y0 + hh, x0 : x0 + ww] = True
    return composite, gt


@pytest.fixture(scope="session")
def sample_dataset(tmp_path_factory):
    """Five spliced sample images plus ground-truth masks on disk."""
    root = tmp_path_factory.mktemp("samples")
    img_dir = root / "images"
    gt_dir = root / "gt"
    img_dir.mkdir()
    gt_dir.mkdir()
    masks = {}
    for seed in range(5):
        image_id = f"sample{seed}"
        rgb, gt = spliced_sample(seed)
        Image.fromarray(rgb).save(img_dir / f"{image_id}.png")
        write_mask_png8(gt, gt_dir / f"{image_id}.gt.png")
        masks[image_id] = gt
    return {"images": img_dir, "gt": gt_dir, "masks": masks}
