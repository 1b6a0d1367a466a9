"""CLI: export activation stacks, label maps and a manifest for maniloc."""

from __future__ import annotations

import argparse
import sys

from .activations import ModelLoadError
from .jobs import ExportError, ExportJob, run_export
from .segmenters import SEGMENTER_CHOICES


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maniloc-export",
        description="Run classifier/segmenter adapters and emit maniloc interchange files",
    )
    parser.add_argument("--images", required=True, help="directory of source images")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--scales", default="2,3,4", help="comma-separated scale ids")
    parser.add_argument("--segmenter", choices=SEGMENTER_CHOICES, default="deeplab")
    parser.add_argument(
        "--segmenter-backend", choices=("builtin", "torch"), default="builtin",
        help="'torch' runs a DeepLabV3 checkpoint given via --weights",
    )
    parser.add_argument(
        "--activation", choices=("residual-energy", "torch-gradcam"), default="residual-energy"
    )
    parser.add_argument("--gt", default=None, help="directory of ground-truth masks (optional)")
    parser.add_argument("--weights", default=None, help="local checkpoint for torch backends")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--quality", type=int, default=90, help="residual-energy JPEG quality")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scales = tuple(int(s) for s in args.scales.split(",") if s.strip())
        job = ExportJob(
            image_dir=args.images,
            out_dir=args.out,
            scales=scales,
            segmenter=args.segmenter,
            segmenter_backend=args.segmenter_backend,
            activation_backend=args.activation,
            gt_dir=args.gt,
            weights=args.weights,
            device=args.device,
            jpeg_quality=args.quality,
        )
        manifest = run_export(job)
    except (ExportError, ModelLoadError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"manifest: {manifest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
