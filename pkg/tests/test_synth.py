"""Tests for the synthetic renderer."""

from __future__ import annotations

import numpy as np
import pytest

from shapebias.core import RngStream, load_manifest
from shapebias.synth import (
    SHAPE_NAMES,
    SynthConfig,
    _shape_membership,
    build_cue_conflict_fixture,
    build_synthetic_dataset,
    render_sample,
    shape_vocabulary,
)

SMALL = SynthConfig(image_size=16, train_per_class=2, val_per_class=1, supersample=2)


def test_render_is_deterministic():
    a = render_sample(3, 3, RngStream(5, "x"), SMALL)
    b = render_sample(3, 3, RngStream(5, "x"), SMALL)
    assert np.array_equal(a, b)


def test_render_varies_with_stream():
    a = render_sample(3, 3, RngStream(5, "x"), SMALL)
    b = render_sample(3, 3, RngStream(5, "y"), SMALL)
    assert not np.array_equal(a, b)


def test_render_output_contract():
    out = render_sample(0, 1, RngStream(0, "r"), SMALL)
    assert out.shape == (16, 16, 3)
    assert out.dtype == np.float32
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_render_rejects_bad_class():
    with pytest.raises(ValueError):
        render_sample(10, 0, RngStream(0, "r"), SMALL)
    with pytest.raises(ValueError):
        render_sample(0, 10, RngStream(0, "r"), SMALL)


def test_shapes_are_pairwise_distinct():
    coords = (np.arange(64) + 0.5) / 64 * 2.0 - 1.0
    x, y = np.meshgrid(coords, coords)
    masks = {name: _shape_membership(name, x, y) for name in SHAPE_NAMES}
    names = list(masks)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            overlap = np.logical_xor(masks[a], masks[b]).mean()
            assert overlap > 0.02, f"{a} vs {b} nearly identical"


def test_class_hue_signature_present():
    cfg = SynthConfig(image_size=32, supersample=2)
    reds = render_sample(0, 0, RngStream(1, "a"), cfg)
    cyans = render_sample(0, 5, RngStream(1, "a"), cfg)
    assert not np.allclose(reds, cyans)


def test_dataset_build_layout_and_manifest(tmp_path):
    manifest = build_synthetic_dataset(tmp_path, RngStream(9, "data"), SMALL)
    assert len(manifest.split("train")) == 10 * SMALL.train_per_class
    assert len(manifest.split("val")) == 10 * SMALL.val_per_class
    loaded = load_manifest(tmp_path / "manifest.tsv", vocab=shape_vocabulary())
    assert loaded == manifest
    for record in manifest.records:
        assert (tmp_path / record.path).exists()


def test_dataset_build_reproducible_bytes(tmp_path):
    a_root, b_root = tmp_path / "a", tmp_path / "b"
    build_synthetic_dataset(a_root, RngStream(9, "data"), SMALL)
    build_synthetic_dataset(b_root, RngStream(9, "data"), SMALL)
    a_files = sorted(p.relative_to(a_root) for p in a_root.rglob("*") if p.is_file())
    b_files = sorted(p.relative_to(b_root) for p in b_root.rglob("*") if p.is_file())
    assert a_files == b_files
    for rel in a_files:
        assert (a_root / rel).read_bytes() == (b_root / rel).read_bytes(), rel


def test_cue_fixture_schema(tmp_path):
    path = build_cue_conflict_fixture(tmp_path, RngStream(2, "cue"), SMALL, n_images=20)
    rows = [line.split("\t") for line in path.read_text().splitlines()]
    assert len(rows) == 20
    n_neutral = 0
    for rel, shape_name, texture_name in rows:
        assert (tmp_path / rel).exists()
        assert shape_name in SHAPE_NAMES
        if texture_name == "-":
            n_neutral += 1
        else:
            assert texture_name in SHAPE_NAMES
            assert texture_name != shape_name
    assert n_neutral == 4
