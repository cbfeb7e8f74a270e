"""End-to-end conformance against the resequencing engine.

Extraction runs with seeded random-init backbones: the sandbox has no
pretrained checkpoints, and the pipeline contract under test (container
format, normalization, determinism, weight plumbing) is independent of
feature quality.  AlexNet is used throughout since it instantiates
fastest; tap channel counts there are 64, 192, 384, 256, 256.
"""

import json

import numpy as np
import pytest
import torch
from PIL import Image

from featbridge import (
    ExtractError,
    ExtractorSpec,
    WeightExportError,
    export_weights,
    extract,
    write_archive,
)
from reseq.frameset import load_archive
from reseq.metrics import CalibrationWeights, compute_distance_matrix

SPEC = ExtractorSpec(backbone="alexnet")
ALEXNET_CHANNELS = (64, 192, 384, 256, 256)


def _write_png(path, rgb):
    Image.fromarray(np.asarray(rgb, dtype=np.uint8)).save(path)


def _gradient(shade, size=64):
    base = np.linspace(0, 255, size, dtype=np.uint8)
    img = np.stack([base] * size, axis=0)
    return np.stack([img, np.full_like(img, shade), img[::-1]], axis=-1)


@pytest.fixture(scope="module")
def image_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("imgs")
    _write_png(d / "black.png", np.zeros((64, 64, 3)))
    _write_png(d / "white.png", np.full((64, 64, 3), 255))
    _write_png(d / "grad_a.png", _gradient(40))
    _write_png(d / "grad_b.png", _gradient(200))
    # twin is byte-identical to grad_a under a different id
    _write_png(d / "twin.png", _gradient(40))
    return d


@pytest.fixture(scope="module")
def archive_path(image_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("arch") / "frames.pfa"
    order = ["black.png", "white.png", "grad_a.png", "grad_b.png", "twin.png"]
    extract([image_dir / n for n in order], out, SPEC, pretrained=False, seed=0)
    return out


@pytest.fixture(scope="module")
def archive(archive_path):
    return load_archive(archive_path)


def test_archive_loads_in_engine(archive):
    assert archive.frame_ids == ("black", "white", "grad_a", "grad_b", "twin")
    assert archive.normalized
    assert tuple(s.name for s in archive.layers) == (
        "relu1", "relu2", "relu3", "relu4", "relu5",
    )
    assert tuple(s.c for s in archive.layers) == ALEXNET_CHANNELS


def test_identical_images_zero_distance(archive):
    w = CalibrationWeights.uniform(archive)
    m = compute_distance_matrix(archive, "lpips", w)
    i, j = archive.frame_ids.index("grad_a"), archive.frame_ids.index("twin")
    assert m.values[i, j] == pytest.approx(0.0, abs=1e-6)


def test_distinct_images_positive_distance(archive):
    m = compute_distance_matrix(archive, "lpips")
    i, j = archive.frame_ids.index("black"), archive.frame_ids.index("white")
    assert m.values[i, j] > 1e-4


def test_channel_vectors_unit_norm(archive):
    for f in range(len(archive)):
        for l in range(len(archive.layers)):
            norms = np.linalg.norm(archive.tensor(f, l), axis=0)
            live = norms[norms > 0]
            assert np.all(np.abs(live - 1.0) < 1e-4)


def test_extraction_deterministic(image_dir, archive_path, tmp_path):
    order = ["black.png", "white.png", "grad_a.png", "grad_b.png", "twin.png"]
    paths = [image_dir / n for n in order]
    again = tmp_path / "again.pfa"
    extract(paths, again, SPEC, pretrained=False, seed=0)
    assert again.read_bytes() == archive_path.read_bytes()

    other_seed = tmp_path / "seed1.pfa"
    extract(paths, other_seed, SPEC, pretrained=False, seed=1)
    assert other_seed.read_bytes() != archive_path.read_bytes()


def test_native_size_mismatch_names_resize(image_dir, tmp_path):
    other = tmp_path / "wide.png"
    _write_png(other, np.zeros((96, 96, 3)))
    with pytest.raises(ExtractError, match="resize"):
        extract([image_dir / "black.png", other], tmp_path / "x.pfa",
                SPEC, pretrained=False)

    # an explicit resize reconciles the pair
    fixed = ExtractorSpec(backbone="alexnet", resize=(64, 64))
    out = tmp_path / "fixed.pfa"
    extract([image_dir / "black.png", other], out, fixed, pretrained=False)
    assert load_archive(out).frame_ids == ("black", "wide")


def test_undersized_input_reported(tmp_path):
    tiny = tmp_path / "tiny.png"
    _write_png(tiny, np.zeros((16, 16, 3)))
    with pytest.raises(ExtractError, match="tiny"):
        extract([tiny], tmp_path / "x.pfa", SPEC, pretrained=False)


def test_undecodable_image_fail_fast(image_dir, tmp_path):
    bad = tmp_path / "broken.png"
    bad.write_bytes(b"not a png at all")
    with pytest.raises(ExtractError, match="broken"):
        extract([image_dir / "black.png", bad], tmp_path / "x.pfa",
                SPEC, pretrained=False)


def test_undecodable_image_skip_with_warning(image_dir, tmp_path):
    bad = tmp_path / "broken.png"
    bad.write_bytes(b"not a png at all")
    out = tmp_path / "kept.pfa"
    with pytest.warns(UserWarning, match="broken"):
        extract([image_dir / "black.png", bad, image_dir / "white.png"],
                out, SPEC, pretrained=False, skip_bad=True)
    assert load_archive(out).frame_ids == ("black", "white")


def test_all_images_bad_raises(tmp_path):
    bad = tmp_path / "broken.png"
    bad.write_bytes(b"junk")
    with pytest.warns(UserWarning):
        with pytest.raises(ExtractError, match="every input"):
            extract([bad], tmp_path / "x.pfa", SPEC,
                    pretrained=False, skip_bad=True)


def test_unknown_backbone_rejected():
    with pytest.raises(ExtractError, match="resnet"):
        ExtractorSpec(backbone="resnet")


def _lin_checkpoint(channels, seed=0):
    rng = np.random.default_rng(seed)
    state = {}
    for i, c in enumerate(channels):
        v = rng.uniform(-0.2, 1.0, size=(1, c, 1, 1))
        state[f"lin{i}.model.1.weight"] = torch.tensor(v)
    return state


def test_weight_export_matches_archive(archive, tmp_path):
    ckpt = tmp_path / "heads.pt"
    torch.save(_lin_checkpoint(ALEXNET_CHANNELS), ckpt)
    out = tmp_path / "w.json"
    names = [s.name for s in archive.layers]
    export_weights(ckpt, names, out, channel_counts=ALEXNET_CHANNELS)

    raw = json.loads(out.read_text())
    assert set(raw) == set(names)
    for name, c in zip(names, ALEXNET_CHANNELS):
        assert len(raw[name]) == c
        assert min(raw[name]) >= 0.0

    w = CalibrationWeights.from_json(out)
    vecs = w.aligned(archive)
    assert [v.shape[0] for v in vecs] == list(ALEXNET_CHANNELS)


def test_exported_weights_change_distances(archive, tmp_path):
    ckpt = tmp_path / "heads.pt"
    torch.save(_lin_checkpoint(ALEXNET_CHANNELS, seed=3), ckpt)
    out = tmp_path / "w.json"
    names = [s.name for s in archive.layers]
    export_weights(ckpt, names, out)

    calibrated = compute_distance_matrix(
        archive, "lpips", CalibrationWeights.from_json(out))
    uniform = compute_distance_matrix(archive, "lpips")
    assert not np.allclose(calibrated.values, uniform.values)


def test_weight_export_plain_mapping(tmp_path):
    state = {"relu1": np.array([0.5, -0.25, 2.0]), "relu2": [1.0, 0.0]}
    out = tmp_path / "w.json"
    exported = export_weights(state, ["relu1", "relu2"], out,
                              channel_counts=[3, 2])
    assert exported["relu1"].tolist() == [0.5, 0.0, 2.0]
    assert exported["relu2"].tolist() == [1.0, 0.0]


def test_weight_shape_mismatch_lists_shapes(tmp_path):
    state = {"lin0.model.1.weight": torch.zeros(1, 64, 1, 1)}
    with pytest.raises(WeightExportError) as exc:
        export_weights(state, ["relu1"], tmp_path / "w.json",
                       channel_counts=[192])
    msg = str(exc.value)
    assert "(1, 64, 1, 1)" in msg and "192" in msg


def test_weight_missing_layer_error(tmp_path):
    with pytest.raises(WeightExportError, match="relu2"):
        export_weights({"relu1": [1.0]}, ["relu1", "relu2"],
                       tmp_path / "w.json")


def test_weight_count_mismatch(tmp_path):
    with pytest.raises(WeightExportError, match="channel counts"):
        export_weights({"relu1": [1.0]}, ["relu1"], tmp_path / "w.json",
                       channel_counts=[1, 2])


def test_write_archive_validation(tmp_path):
    t = np.zeros((2, 3, 3), dtype=np.float32)
    with pytest.raises(ValueError, match="duplicate"):
        write_archive(tmp_path / "x.pfa", ["a", "a"], ["l0"],
                      {"a": [t]}, normalized=False)
    with pytest.raises(ValueError, match="expected"):
        write_archive(tmp_path / "x.pfa", ["a", "b"], ["l0"],
                      {"a": [t], "b": [np.zeros((2, 4, 3), dtype=np.float32)]},
                      normalized=False)


def test_cli_round_trip(image_dir, tmp_path):
    from featbridge.cli import main

    out = tmp_path / "cli.pfa"
    rc = main([
        "extract", str(image_dir / "black.png"), str(image_dir / "white.png"),
        "--out", str(out), "--backbone", "alexnet", "--random-init",
    ])
    assert rc == 0
    assert load_archive(out).frame_ids == ("black", "white")

    ckpt = tmp_path / "heads.pt"
    torch.save(_lin_checkpoint(ALEXNET_CHANNELS), ckpt)
    wout = tmp_path / "w.json"
    rc = main(["weights", str(ckpt), "--out", str(wout),
               "--backbone", "alexnet",
               "--channels", ",".join(map(str, ALEXNET_CHANNELS))])
    assert rc == 0
    assert set(json.loads(wout.read_text())) == {
        "relu1", "relu2", "relu3", "relu4", "relu5",
    }

    rc = main(["weights", str(ckpt), "--out", str(wout),
               "--backbone", "alexnet", "--channels", "1,1,1,1,1"])
    assert rc == 2
