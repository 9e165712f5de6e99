"""Canonical image records, dataset manifests, class vocabulary, and seeded RNG streams.

Images live on disk as 8-bit PNG and in memory as float arrays in [0, 1]
(divide by 255 on load). Manifests are line-delimited TSV files that list
one image record per line. RNG streams are derived by hashing
``(seed, stream_key)`` so that independent pipeline steps never share a
random sequence.
"""

from __future__ import annotations

import hashlib
import os
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

DATA_ROOT_ENV = "SHAPEBIAS_DATA_ROOT"

_SPLITS = ("train", "val")


class ManifestError(ValueError):
    """Raised for missing, malformed, or inconsistent manifest files."""


# ---------------------------------------------------------------------------
# RNG streams


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible random stream.

    Identical ``(seed, stream_key)`` pairs always produce identical draw
    sequences; distinct keys give independent streams. Child streams are
    derived with :meth:`child`, which extends the key path.
    """

    seed: int
    stream_key: str = "root"

    def child(self, key: str) -> "RngStream":
        if not key:
            raise ValueError("stream key must be nonempty")
        return RngStream(seed=self.seed, stream_key=f"{self.stream_key}/{key}")

    def _digest(self) -> bytes:
        payload = f"{self.seed}\x1f{self.stream_key}".encode()
        return hashlib.blake2b(payload, digest_size=16).digest()

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(int.from_bytes(self._digest(), "little")))

    def torch_seed(self) -> int:
        """A 63-bit seed for torch generators derived from this stream."""
        return int.from_bytes(self._digest()[:8], "little") >> 1


def split_stream(parent: RngStream, key: str) -> RngStream:
    """Derive a child stream deterministic in ``(parent.seed, key)``."""
    return parent.child(key)


# ---------------------------------------------------------------------------
# Class vocabulary


@dataclass(frozen=True)
class ClassVocabulary:
    names: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("class names must be unique")

    @property
    def count(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown class name: {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.names


def load_vocabulary(path: str | Path) -> ClassVocabulary:
    """Read one class name per line, ignoring blanks and ``#`` comments."""
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"vocabulary file not found: {path}")
    names = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            names.append(line)
    return ClassVocabulary(tuple(names))


def imagenet20_vocabulary() -> ClassVocabulary:
    """The 20-class subset vocabulary shipped with the package."""
    return load_vocabulary(Path(__file__).parent / "assets" / "imagenet20_classes.txt")


# ---------------------------------------------------------------------------
# Images


@dataclass
class Image:
    """An RGB image with pixels in [0, 1], plus identity and label."""

    pixels: np.ndarray
    id: str
    class_id: int

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float32)
        validate_pixels(self.pixels)
        if self.class_id < 0:
            raise ValueError("class_id must be >= 0")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def validate_pixels(pixels: np.ndarray) -> None:
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ValueError(f"expected HxWx3 pixels, got shape {pixels.shape}")
    if pixels.shape[0] < 8 or pixels.shape[1] < 8:
        raise ValueError(f"image too small: {pixels.shape[:2]}")
    if not np.isfinite(pixels).all():
        raise ValueError("pixels contain non-finite values")
    if pixels.min() < 0.0 or pixels.max() > 1.0:
        raise ValueError("pixel values must lie in [0, 1]")


def to_uint8(pixels: np.ndarray) -> np.ndarray:
    """Quantize [0, 1] reals to 8-bit with round-half-away clipping."""
    return (np.clip(pixels, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def from_uint8(raw: np.ndarray) -> np.ndarray:
    return raw.astype(np.float32) / 255.0


def load_pixels(path: str | Path) -> np.ndarray:
    """Load a PNG/JPEG as float RGB in [0, 1]."""
    with PILImage.open(path) as im:
        arr = np.asarray(im.convert("RGB"))
    return from_uint8(arr)


def save_pixels(path: str | Path, pixels: np.ndarray) -> None:
    """Write [0, 1] float RGB pixels as an 8-bit PNG (deterministic bytes)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    PILImage.fromarray(to_uint8(pixels)).save(path, format="PNG")


def save_gray_u8(path: str | Path, values: np.ndarray) -> None:
    """Write a single-channel uint8 array as PNG."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    PILImage.fromarray(np.asarray(values, dtype=np.uint8), mode="L").save(path, format="PNG")


def load_gray_u8(path: str | Path) -> np.ndarray:
    with PILImage.open(path) as im:
        return np.asarray(im.convert("L"))


# ---------------------------------------------------------------------------
# Manifests


@dataclass(frozen=True)
class ManifestRecord:
    path: str
    class_id: int
    split: str


@dataclass(frozen=True)
class DatasetManifest:
    """A per-variant listing of image records with provenance."""

    records: tuple[ManifestRecord, ...]
    variant_tag: str
    seed: int
    source_manifest_id: str | None = None

    def __post_init__(self):
        seen: dict[str, set[str]] = {s: set() for s in _SPLITS}
        for rec in self.records:
            if rec.split not in _SPLITS:
                raise ManifestError(f"unknown split {rec.split!r} for {rec.path}")
            if rec.path in seen[rec.split]:
                raise ManifestError(f"duplicate path in {rec.split} split: {rec.path}")
            seen[rec.split].add(rec.path)

    @property
    def manifest_id(self) -> str:
        return self.variant_tag

    def split(self, name: str) -> tuple[ManifestRecord, ...]:
        if name not in _SPLITS:
            raise ValueError(f"unknown split {name!r}")
        return tuple(r for r in self.records if r.split == name)

    def validate_classes(self, vocab: ClassVocabulary) -> None:
        for rec in self.records:
            if not 0 <= rec.class_id < vocab.count:
                raise ManifestError(
                    f"class id {rec.class_id} for {rec.path} outside vocabulary of {vocab.count}"
                )


_HEADER_RE = re.compile(r"^#variant=(?P<tag>\S+) seed=(?P<seed>-?\d+)(?: source=(?P<source>\S+))?$")


def load_manifest(path: str | Path, vocab: ClassVocabulary | None = None) -> DatasetManifest:
    """Parse a TSV manifest; raises :class:`ManifestError` with line numbers."""
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest not found: {path}")
    lines = path.read_text().splitlines()
    if not lines:
        raise ManifestError(f"{path}: empty manifest file")
    header = _HEADER_RE.match(lines[0])
    if header is None:
        raise ManifestError(f"{path}:1: malformed header line: {lines[0]!r}")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ManifestError(f"{path}:{lineno}: expected 3 tab-separated fields, got {len(parts)}")
        rec_path, class_field, split = parts
        try:
            class_id = int(class_field)
        except ValueError:
            raise ManifestError(f"{path}:{lineno}: class id is not an integer: {class_field!r}") from None
        if class_id < 0:
            raise ManifestError(f"{path}:{lineno}: negative class id")
        if split not in _SPLITS:
            raise ManifestError(f"{path}:{lineno}: unknown split {split!r}")
        records.append(ManifestRecord(path=rec_path, class_id=class_id, split=split))
    manifest = DatasetManifest(
        records=tuple(records),
        variant_tag=header.group("tag"),
        seed=int(header.group("seed")),
        source_manifest_id=header.group("source"),
    )
    if vocab is not None:
        manifest.validate_classes(vocab)
    return manifest


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = f"#variant={manifest.variant_tag} seed={manifest.seed}"
    if manifest.source_manifest_id is not None:
        header += f" source={manifest.source_manifest_id}"
    lines = [header]
    lines += [f"{r.path}\t{r.class_id}\t{r.split}" for r in manifest.records]
    path.write_text("\n".join(lines) + "\n")


def data_root(default: str | Path | None = None) -> Path:
    """Dataset location: ``SHAPEBIAS_DATA_ROOT`` env var, else ``default``."""
    env = os.environ.get(DATA_ROOT_ENV)
    if env:
        return Path(env)
    if default is None:
        raise ValueError(f"no data root: set {DATA_ROOT_ENV} or pass a path")
    return Path(default)


def resolve_record_path(manifest_path: str | Path, record: ManifestRecord) -> Path:
    """Record paths are stored relative to the manifest's directory."""
    p = Path(record.path)
    return p if p.is_absolute() else Path(manifest_path).parent / p


def with_variant(manifest: DatasetManifest, tag: str, seed: int | None = None) -> DatasetManifest:
    return replace(
        manifest,
        variant_tag=tag,
        seed=manifest.seed if seed is None else seed,
        source_manifest_id=manifest.manifest_id,
    )
