"""Line-delimited dataset manifests binding image ids to raster files.

Format: a version header line, then one JSON object per line. Relative
paths are resolved against the manifest's directory at run time, which
keeps generated datasets relocatable and manifests diff-friendly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

MANIFEST_HEADER = "#maniloc-manifest v1"

_REQUIRED_KEYS = {"image_id", "activation_paths", "labelmap_path"}
_OPTIONAL_KEYS = {"gt_path", "source_image_path"}


class ManifestError(ValueError):
    """Malformed manifest file or record."""


@dataclass(frozen=True)
class ManifestRecord:
    """One dataset entry; paths are stored as written in the manifest."""

    image_id: str
    activation_paths: tuple[str, ...]
    labelmap_path: str
    gt_path: str | None = None
    source_image_path: str | None = None

    def __post_init__(self) -> None:
        if not self.image_id:
            raise ManifestError("image_id must be a non-empty string")
        if len(self.activation_paths) < 1:
            raise ManifestError(
                f"record {self.image_id!r}: activation_paths must list at least one file"
            )

    def all_paths(self) -> list[str]:
        paths = list(self.activation_paths) + [self.labelmap_path]
        if self.gt_path:
            paths.append(self.gt_path)
        if self.source_image_path:
            paths.append(self.source_image_path)
        return paths


def resolve_path(base: Path, p: str) -> Path:
    q = Path(p)
    return q if q.is_absolute() else base / q


def _parse_record(line: str, lineno: int) -> ManifestRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"line {lineno}: invalid JSON record: {exc}") from exc
    if not isinstance(obj, dict):
        raise ManifestError(f"line {lineno}: record must be a JSON object")
    keys = set(obj)
    missing = _REQUIRED_KEYS - keys
    if missing:
        raise ManifestError(f"line {lineno}: record missing field(s): {', '.join(sorted(missing))}")
    unknown = keys - _REQUIRED_KEYS - _OPTIONAL_KEYS
    if unknown:
        raise ManifestError(f"line {lineno}: unknown field(s): {', '.join(sorted(unknown))}")
    image_id = obj["image_id"]
    acts = obj["activation_paths"]
    if not isinstance(image_id, str):
        raise ManifestError(f"line {lineno}: image_id must be a string")
    if not isinstance(acts, list) or not all(isinstance(a, str) for a in acts):
        raise ManifestError(f"line {lineno}: activation_paths must be a list of strings")
    for opt in ("labelmap_path", "gt_path", "source_image_path"):
        if opt in obj and obj[opt] is not None and not isinstance(obj[opt], str):
            raise ManifestError(f"line {lineno}: {opt} must be a string")
    try:
        return ManifestRecord(
            image_id=image_id,
            activation_paths=tuple(acts),
            labelmap_path=obj["labelmap_path"],
            gt_path=obj.get("gt_path"),
            source_image_path=obj.get("source_image_path"),
        )
    except ManifestError as exc:
        raise ManifestError(f"line {lineno}: {exc}") from exc


def parse_manifest(path: Path | str, *, check_files: bool = True) -> list[ManifestRecord]:
    """Parse and validate a manifest; duplicate image ids are rejected.

    With check_files=True (default), every referenced path must resolve to
    an existing file; errors name the offending image_id. Content validity
    of the referenced rasters is checked later, when they are loaded.
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"no such manifest: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != MANIFEST_HEADER:
        raise ManifestError(f"{path}: missing or unsupported header (expected {MANIFEST_HEADER!r})")

    records: list[ManifestRecord] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        rec = _parse_record(stripped, lineno)
        if rec.image_id in seen:
            raise ManifestError(f"duplicate image_id {rec.image_id!r} (line {lineno})")
        seen.add(rec.image_id)
        records.append(rec)

    if check_files:
        base = path.parent
        for rec in records:
            for p in rec.all_paths():
                if not resolve_path(base, p).is_file():
                    raise ManifestError(f"image {rec.image_id!r}: unreadable referenced file: {p}")
    return records


def write_manifest(records: Iterable[ManifestRecord], path: Path | str) -> None:
    """Serialize records in the line-delimited format (round-trips parse)."""
    path = Path(path)
    out = [MANIFEST_HEADER]
    for rec in records:
        obj: dict = {
            "image_id": rec.image_id,
            "activation_paths": list(rec.activation_paths),
            "labelmap_path": rec.labelmap_path,
        }
        if rec.gt_path is not None:
            obj["gt_path"] = rec.gt_path
        if rec.source_image_path is not None:
            obj["source_image_path"] = rec.source_image_path
        out.append(json.dumps(obj, separators=(", ", ": ")))
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
