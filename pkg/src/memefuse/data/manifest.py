"""Dataset manifests: class map plus a list of bundle files per split."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..exceptions import ConfigError, FormatError
from .bundles import EmbeddingBundle, load_bundle

MANIFEST_VERSION = 1
SPLITS = ("train", "val", "test")

EKMAN_LABELS = ("fear", "anger", "joy", "sadness", "surprise", "disgust")
NEUTRAL_LABEL = "neutral"


def default_label_map(num_classes: int = 6) -> dict[str, int]:
    """fear=0 .. disgust=5, optionally extended with neutral=6."""
    if num_classes == len(EKMAN_LABELS):
        names = EKMAN_LABELS
    elif num_classes == len(EKMAN_LABELS) + 1:
        names = EKMAN_LABELS + (NEUTRAL_LABEL,)
    else:
        names = tuple(f"class{i}" for i in range(num_classes))
    return {name: i for i, name in enumerate(names)}


@dataclass
class ManifestEntry:
    id: str
    path: str
    split: str


@dataclass
class DatasetManifest:
    d: int
    num_classes: int
    label_map: dict[str, int]
    entries: list[ManifestEntry]
    root: Path = field(default_factory=Path)

    def validate(self) -> None:
        if self.d < 1 or self.num_classes < 1:
            raise ConfigError(f"invalid manifest dims d={self.d}, C={self.num_classes}")
        indices = sorted(self.label_map.values())
        if indices != list(range(self.num_classes)):
            raise ConfigError(
                f"label_map must name indices 0..{self.num_classes - 1} exactly once, got {indices}"
            )
        for entry in self.entries:
            if entry.split not in SPLITS:
                raise ConfigError(f"entry {entry.id}: unknown split {entry.split!r}")

    def split_entries(self, split: str) -> list[ManifestEntry]:
        if split not in SPLITS:
            raise ConfigError(f"unknown split {split!r}")
        return [e for e in self.entries if e.split == split]

    def class_name(self, index: int) -> str:
        for name, i in self.label_map.items():
            if i == index:
                return name
        raise ConfigError(f"no class at index {index}")

    def load_split(self, split: str) -> list[EmbeddingBundle]:
        """Load and re-validate every bundle of a split, in manifest order."""
        bundles = []
        for entry in self.split_entries(split):
            bundle = load_bundle(self.root / entry.path, bundle_id=entry.id)
            if bundle.d != self.d:
                raise FormatError(
                    f"bundle {entry.id} has d={bundle.d}, manifest declares d={self.d}"
                )
            bundle.validate(num_classes=self.num_classes)
            bundles.append(bundle)
        return bundles


def save_manifest(manifest: DatasetManifest, path) -> None:
    manifest.validate()
    doc = {
        "version": MANIFEST_VERSION,
        "d": manifest.d,
        "num_classes": manifest.num_classes,
        "label_map": manifest.label_map,
        "entries": [{"id": e.id, "path": e.path, "split": e.split} for e in manifest.entries],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    try:
        manifest = DatasetManifest(
            d=int(doc["d"]),
            num_classes=int(doc["num_classes"]),
            label_map={str(k): int(v) for k, v in doc["label_map"].items()},
            entries=[ManifestEntry(str(e["id"]), str(e["path"]), str(e["split"])) for e in doc["entries"]],
            root=path.parent,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed manifest ({exc})") from exc
    if doc.get("version") != MANIFEST_VERSION:
        raise FormatError(f"{path}: unsupported manifest version {doc.get('version')}")
    manifest.validate()
    missing = [e.path for e in manifest.entries if not (manifest.root / e.path).exists()]
    if missing:
        raise FormatError(f"{path}: {len(missing)} referenced bundle files missing, first: {missing[0]}")
    return manifest
