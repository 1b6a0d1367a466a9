"""Command-line interface.

Subcommands: fuse, score, refine, eval, run, overlay, ela, synth. Every
subcommand accepts --config <json-file>; explicit flags override config
values. Exit codes: 0 success, 1 config/manifest error, 2 partial batch
failure, 3 total failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bayes import LikelihoodParams, refine_bayes
from .ela import codec_info, residual_to_heatmap_preview, signed_ela
from .fusion import FusionConfig, fuse_arithmetic, fuse_geometric, fuse_max
from .manifest import ManifestError
from .metrics import DegenerateGroundTruth, evaluate, threshold_sweep
from .pipeline import RunConfig, render_overlay, run_batch
from .raster import (
    RasterError,
    load_heatmap,
    load_labelmap,
    load_mask,
    load_rgb,
    resize_bilinear,
    save_heatmap,
    save_rgb,
)
from .regions import extract_regions, select_best_region
from .synth import gen_suite

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2
EXIT_FAILURE = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_FAILURE):
        super().__init__(message)
        self.code = code


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise CliError(f"invalid size {text!r}, expected WIDTHxHEIGHT", EXIT_CONFIG) from exc


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise CliError(f"no such config file: {p}", EXIT_CONFIG)
    try:
        obj = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CliError(f"invalid config JSON in {p}: {exc}", EXIT_CONFIG)
    if not isinstance(obj, dict):
        raise CliError(f"config must be a JSON object: {p}", EXIT_CONFIG)
    return obj


def _build_run_config(args: argparse.Namespace) -> RunConfig:
    cfg = _load_config_file(getattr(args, "config", None))

    def pick(flag: str, key: str, default):
        val = getattr(args, flag, None)
        if val is not None:
            return val
        return cfg.get(key, default)

    target = pick("size", "target_dims", None)
    if isinstance(target, str):
        target = _parse_size(target)
    elif isinstance(target, list):
        target = (int(target[0]), int(target[1]))
    try:
        return RunConfig(
            fusion=FusionConfig(
                epsilon=float(pick("epsilon", "epsilon", 1e-6)),
                scales=tuple(cfg.get("scales", (2, 3, 4))),
            ),
            likelihood=LikelihoodParams(
                lambda_in=float(pick("lambda_in", "lambda_in", 0.9)),
                lambda_out=float(pick("lambda_out", "lambda_out", 0.1)),
            ),
            threshold=float(pick("threshold", "threshold", 0.5)),
            target_dims=target,
            workers=int(pick("workers", "workers", 1)),
            aggregation=str(pick("aggregation", "aggregation", "macro")),
        )
    except ValueError as exc:
        raise CliError(f"invalid configuration: {exc}", EXIT_CONFIG) from exc


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_fuse(args: argparse.Namespace) -> int:
    cfg = _build_run_config(args)
    maps = [load_heatmap(p) for p in args.inputs]
    if args.size is not None:
        w, h = _parse_size(args.size)
    else:
        w, h = maps[0].width, maps[0].height
    maps = [resize_bilinear(m, w, h) for m in maps]
    if args.rule == "geometric":
        fused = fuse_geometric(maps, cfg.fusion)
    elif args.rule == "arithmetic":  # labeled baseline
        fused = fuse_arithmetic(maps)
    else:
        fused = fuse_max(maps)
    save_heatmap(fused, args.output, "f32raw" if args.raw else "png16")
    return EXIT_OK


def _cmd_score(args: argparse.Namespace) -> int:
    heatmap = load_heatmap(args.heatmap)
    labelmap = load_labelmap(args.labelmap)
    if labelmap.width != heatmap.width or labelmap.height != heatmap.height:
        raise CliError("heatmap and labelmap dimensions differ; resample first", EXIT_FAILURE)
    regions = extract_regions(labelmap)
    if not regions:
        raise CliError("no candidate regions in label map", EXIT_FAILURE)
    label, _, scores = select_best_region(regions, heatmap)
    table = [
        {"label": s.label, "area": s.area, "score": s.score, "selected": s.label == label}
        for s in scores
    ]
    text = json.dumps({"selected_label": label, "scores": table}, indent=2)
    if args.json:
        Path(args.json).write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK


def _cmd_refine(args: argparse.Namespace) -> int:
    cfg = _build_run_config(args)
    heatmap = load_heatmap(args.heatmap)
    mask = load_mask(args.mask)
    refined = refine_bayes(heatmap, mask, cfg.likelihood)
    save_heatmap(refined, args.output, "f32raw" if args.raw else "png16")
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    cfg = _build_run_config(args)
    pred = load_heatmap(args.pred)
    gt = load_mask(args.gt)
    try:
        report = evaluate(pred, gt, cfg.threshold)
    except DegenerateGroundTruth as exc:
        raise CliError(str(exc), EXIT_FAILURE) from exc
    obj = {
        "auc": report.auc,
        "f1": report.f1,
        "precision": report.precision,
        "recall": report.recall,
        "threshold": report.threshold,
        "counts": {
            "tp": report.counts.tp,
            "fp": report.counts.fp,
            "tn": report.counts.tn,
            "fn": report.counts.fn,
        },
    }
    if args.sweep:
        obj["sweep"] = [
            {"tau": tau, "f1": r.f1, "precision": r.precision, "recall": r.recall}
            for tau, r in threshold_sweep(pred, gt, args.sweep)
        ]
    print(json.dumps(obj, indent=2))
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _build_run_config(args)
    summary = run_batch(
        args.manifest,
        cfg,
        args.out,
        allowlist=args.allowlist,
        debug=args.debug,
    )
    print(
        f"processed {summary.succeeded}/{summary.total} images "
        f"({summary.failed} failed, {summary.fallbacks} fallbacks); "
        f"reports in {args.out}"
    )
    for image_id, msg in summary.failures:
        print(f"  FAILED {image_id}: {msg}", file=sys.stderr)
    if summary.total == 0 or summary.succeeded == summary.total:
        return EXIT_OK
    if summary.succeeded == 0:
        return EXIT_FAILURE
    return EXIT_PARTIAL


def _cmd_overlay(args: argparse.Namespace) -> int:
    src = load_rgb(args.image)
    heatmap = load_heatmap(args.heatmap)
    heatmap = resize_bilinear(heatmap, src.width, src.height)
    save_rgb(render_overlay(src, heatmap, args.alpha), args.output)
    return EXIT_OK


def _cmd_ela(args: argparse.Namespace) -> int:
    img = load_rgb(args.image)
    residual = signed_ela(img, args.quality)
    save_heatmap(residual_to_heatmap_preview(residual), args.output, "png16")
    if args.verbose:
        import numpy as np

        print(f"codec: {codec_info()}")
        print(f"mean |residual|: {float(np.abs(residual.values).mean()):.6f}")
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    w, h = _parse_size(args.size)
    manifest = gen_suite(
        args.out,
        cases=args.cases,
        base_seed=args.seed,
        width=w,
        height=h,
        distractors=args.distractors,
        blur_radius=args.blur,
        noise_sigma=args.noise,
    )
    print(f"wrote {args.cases} cases; manifest: {manifest}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--epsilon", type=float, default=None, help="fusion value floor")
    p.add_argument("--lambda-in", dest="lambda_in", type=float, default=None)
    p.add_argument("--lambda-out", dest="lambda_out", type=float, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=0, help="rng seed where applicable")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maniloc",
        description="Weakly-supervised manipulation localization pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fuse", help="fuse activation maps (geometric mean)")
    _add_common(p)
    p.add_argument("inputs", nargs="+", help="heatmap files (png16 or f32raw)")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--rule", choices=("geometric", "arithmetic", "max"), default="geometric",
                   help="'arithmetic' and 'max' are diagnostic baselines")
    p.add_argument("--size", default=None, help="common WxH (default: first map's dims)")
    p.add_argument("--raw", action="store_true", help="write f32raw instead of png16")
    p.set_defaults(func=_cmd_fuse)

    p = sub.add_parser("score", help="score label-map regions against a heatmap")
    _add_common(p)
    p.add_argument("--heatmap", required=True)
    p.add_argument("--labelmap", required=True)
    p.add_argument("--json", help="also write the score table to this file")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("refine", help="Bayes-refine a heatmap against a mask")
    _add_common(p)
    p.add_argument("--heatmap", required=True)
    p.add_argument("--mask", required=True, help="8-bit 0/255 mask PNG")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--raw", action="store_true")
    p.set_defaults(func=_cmd_refine)

    p = sub.add_parser("eval", help="pixel-wise AUC / F1 against ground truth")
    _add_common(p)
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--sweep", type=int, default=0, help="also report a threshold sweep")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("run", help="run the full pipeline over a manifest")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--size", default=None, help="force working dims WxH")
    p.add_argument("--aggregation", choices=("macro", "micro"), default=None)
    p.add_argument("--allowlist", help="file listing image ids to include")
    p.add_argument("--debug", action="store_true", help="dump per-stage intermediates")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("overlay", help="render a heatmap over its source image")
    _add_common(p)
    p.add_argument("--image", required=True)
    p.add_argument("--heatmap", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.set_defaults(func=_cmd_overlay)

    p = sub.add_parser("ela", help="signed error-level preview of an image")
    _add_common(p)
    p.add_argument("--image", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--quality", type=int, default=90)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=_cmd_ela)

    p = sub.add_parser("synth", help="generate synthetic verification cases")
    _add_common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--cases", type=int, default=10)
    p.add_argument("--size", default="128x128")
    p.add_argument("--distractors", type=int, default=3)
    p.add_argument("--blur", type=int, default=4)
    p.add_argument("--noise", type=float, default=0.18)
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ManifestError as exc:
        print(f"manifest error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RasterError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
