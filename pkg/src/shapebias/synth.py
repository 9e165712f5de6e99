"""Synthetic shape/texture dataset renderer.

Every class is identified redundantly by two cues: a silhouette (one of ten
shapes) and a texture signature (class-keyed hue plus weakly class-oriented
stripes).  Background statistics are uncorrelated with the class.  Because the
two cues are separable, downstream pipelines can isolate either one: edge
extraction keeps only the silhouette, style transfer destroys the color
signature, and cue-conflict images pair the silhouette of one class with the
texture of another.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .core import (
    ClassVocabulary,
    DatasetManifest,
    ManifestRecord,
    RngStream,
    save_manifest,
    save_pixels,
)

SHAPE_NAMES = (
    "circle",
    "square",
    "triangle",
    "star",
    "plus",
    "ring",
    "diamond",
    "crescent",
    "tee",
    "ell",
)


def shape_vocabulary() -> ClassVocabulary:
    return ClassVocabulary(SHAPE_NAMES)


@dataclass(frozen=True)
class SynthConfig:
    """Rendering knobs for the synthetic corpus."""

    image_size: int = 32
    train_per_class: int = 200
    val_per_class: int = 50
    supersample: int = 4
    stripe_amplitude: float = 0.10
    stripe_frequency: float = 3.5
    color_jitter: float = 0.03
    noise_sigma: float = 0.015

    def __post_init__(self) -> None:
        if self.image_size < 8:
            raise ValueError("image_size must be at least 8")
        if self.supersample < 1:
            raise ValueError("supersample must be positive")


def _hsv_to_rgb(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    h6 = (h % 1.0) * 6.0
    i = np.floor(h6).astype(np.int64) % 6
    f = h6 - np.floor(h6)
    p = v * (1.0 - s)
    q = v * (1.0 - f * s)
    t = v * (1.0 - (1.0 - f) * s)
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)


def _shape_membership(name: str, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Boolean mask of the canonical unit-scale silhouette at points (u, v)."""
    if name == "circle":
        return u * u + v * v <= 1.0
    if name == "square":
        return np.maximum(np.abs(u), np.abs(v)) <= 0.82
    if name == "triangle":
        verts = [
            (np.cos(a), np.sin(a))
            for a in (np.pi / 2, np.pi / 2 + 2 * np.pi / 3, np.pi / 2 + 4 * np.pi / 3)
        ]
        inside = np.ones_like(u, dtype=bool)
        for k in range(3):
            x0, y0 = verts[k]
            x1, y1 = verts[(k + 1) % 3]
            inside &= (u - x0) * (y1 - y0) - (v - y0) * (x1 - x0) <= 0
        return inside
    if name == "star":
        rho = np.hypot(u, v)
        phi = np.arctan2(v, u)
        return rho <= 0.55 + 0.45 * np.cos(5.0 * phi)
    if name == "plus":
        return ((np.abs(u) <= 0.33) & (np.abs(v) <= 1.0)) | (
            (np.abs(v) <= 0.33) & (np.abs(u) <= 1.0)
        )
    if name == "ring":
        rho = np.hypot(u, v)
        return (rho <= 1.0) & (rho >= 0.55)
    if name == "diamond":
        return np.abs(u) + np.abs(v) / 0.6 <= 1.0
    if name == "crescent":
        return (np.hypot(u, v) <= 1.0) & (np.hypot(u - 0.45, v) >= 0.78)
    if name == "tee":
        bar = (np.abs(v - 0.7) <= 0.28) & (np.abs(u) <= 0.95)
        stem = (np.abs(u) <= 0.28) & (v <= 0.7) & (v >= -1.0)
        return bar | stem
    if name == "ell":
        upright = (np.abs(u + 0.62) <= 0.3) & (np.abs(v) <= 0.95)
        foot = (np.abs(v + 0.62) <= 0.3) & (np.abs(u) <= 0.95)
        return upright | foot
    raise ValueError(f"unknown shape {name!r}")


def render_sample(
    shape_class: int,
    texture_class: int | None,
    stream: RngStream,
    config: SynthConfig,
) -> np.ndarray:
    """Render one image; ``texture_class=None`` paints a neutral gray texture."""
    gen = stream.generator()
    n_classes = len(SHAPE_NAMES)
    if not 0 <= shape_class < n_classes:
        raise ValueError(f"shape_class out of range: {shape_class}")

    size = config.image_size
    ss = config.supersample
    big = size * ss
    coords = (np.arange(big) + 0.5) / big * 2.0 - 1.0
    x, y = np.meshgrid(coords, coords)

    cx, cy = gen.uniform(-0.15, 0.15, size=2)
    radius = gen.uniform(0.52, 0.72)
    angle = gen.uniform(-0.45, 0.45)

    ca, sa = np.cos(-angle), np.sin(-angle)
    u = (ca * (x - cx) - sa * (y - cy)) / radius
    v = (sa * (x - cx) + ca * (y - cy)) / radius
    mask = _shape_membership(SHAPE_NAMES[shape_class], u, v)

    if texture_class is None:
        hue = gen.uniform(0.0, 1.0)
        sat = gen.uniform(0.04, 0.10)
        stripe_dir = gen.uniform(0.0, np.pi)
    else:
        if not 0 <= texture_class < n_classes:
            raise ValueError(f"texture_class out of range: {texture_class}")
        hue = (texture_class / n_classes + gen.uniform(-config.color_jitter, config.color_jitter)) % 1.0
        sat = 0.55 + gen.uniform(-0.08, 0.08)
        stripe_dir = texture_class * np.pi / n_classes + gen.uniform(-0.06, 0.06)
    val = 0.72 + gen.uniform(-0.08, 0.08)
    phase = gen.uniform(0.0, 2.0 * np.pi)

    carrier = np.sin(
        2.0 * np.pi * config.stripe_frequency * (x * np.cos(stripe_dir) + y * np.sin(stripe_dir))
        + phase
    )
    v_pix = np.clip(val * (1.0 + config.stripe_amplitude * carrier), 0.0, 1.0)
    fg = _hsv_to_rgb(np.full_like(v_pix, hue), np.full_like(v_pix, sat), v_pix)

    bg_hue = gen.uniform(0.0, 1.0)
    bg_sat = gen.uniform(0.0, 0.10)
    bg_val = gen.uniform(0.30, 0.80)
    bg = _hsv_to_rgb(np.array(bg_hue), np.array(bg_sat), np.array(bg_val)).reshape(1, 1, 3)

    canvas = bg + mask[..., None] * (fg - bg)
    small = canvas.reshape(size, ss, size, ss, 3).mean(axis=(1, 3))
    small = small + gen.normal(0.0, config.noise_sigma, size=small.shape)
    return np.clip(small, 0.0, 1.0).astype(np.float32)


def _record_relpath(split: str, class_id: int, index: int) -> str:
    return f"images/{split}/{class_id:02d}/{index:04d}.png"


def build_synthetic_dataset(
    root: str | Path,
    stream: RngStream,
    config: SynthConfig | None = None,
) -> DatasetManifest:
    """Render the full corpus under ``root`` and write its manifest.

    Layout: ``images/<split>/<class>/<index>.png`` plus ``manifest.tsv`` and
    ``classes.txt`` at the top level.  Rendering is a pure function of the
    stream, so rebuilding with the same seed reproduces every byte.
    """
    config = config or SynthConfig()
    root = Path(root)
    records = []
    for split, per_class in (("train", config.train_per_class), ("val", config.val_per_class)):
        for class_id in range(len(SHAPE_NAMES)):
            for index in range(per_class):
                child = stream.child(f"{split}/{class_id}/{index}")
                pixels = render_sample(class_id, class_id, child, config)
                relpath = _record_relpath(split, class_id, index)
                save_pixels(root / relpath, pixels)
                records.append(ManifestRecord(relpath, class_id, split))
    manifest = DatasetManifest(records=tuple(records), variant_tag="IN", seed=stream.seed)
    save_manifest(manifest, root / "manifest.tsv")
    (root / "classes.txt").write_text("".join(f"{n}\n" for n in SHAPE_NAMES))
    return manifest


def build_cue_conflict_fixture(
    root: str | Path,
    stream: RngStream,
    config: SynthConfig | None = None,
    n_images: int = 120,
    unlabeled_fraction: float = 0.2,
) -> Path:
    """Render shape/texture mismatched probes and their fixture table.

    Each row pairs the silhouette of one class with the texture of a different
    class; a fraction carries a neutral texture and the ``-`` placeholder in
    the texture column.  Returns the fixture path.
    """
    config = config or SynthConfig()
    root = Path(root)
    n_classes = len(SHAPE_NAMES)
    n_unlabeled = int(round(n_images * unlabeled_fraction))
    lines = []
    for i in range(n_images):
        child = stream.child(f"cue/{i}")
        pick = child.child("classes").generator()
        shape_class = int(pick.integers(0, n_classes))
        if i < n_unlabeled:
            texture_class: int | None = None
        else:
            texture_class = int(pick.integers(0, n_classes - 1))
            if texture_class >= shape_class:
                texture_class += 1
        pixels = render_sample(shape_class, texture_class, child.child("render"), config)
        relpath = f"cue/{i:04d}.png"
        save_pixels(root / relpath, pixels)
        texture_name = "-" if texture_class is None else SHAPE_NAMES[texture_class]
        lines.append(f"{relpath}\t{SHAPE_NAMES[shape_class]}\t{texture_name}\n")
    fixture_path = root / "cue_conflict.tsv"
    fixture_path.write_text("".join(lines))
    return fixture_path


def desk_config(**overrides) -> SynthConfig:
    return replace(SynthConfig(), **overrides)
