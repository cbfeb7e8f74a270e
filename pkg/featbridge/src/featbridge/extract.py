"""Activation extraction from VGG16 / AlexNet at the LPIPS tap points.

The five taps are the post-ReLU outputs of the five convolutional
stages, hooked by index into the torchvision ``features`` sequential.
Activations are channel-unit-normalized per spatial site before writing,
so archives load as ``normalized=true`` and feed the perceptual metric
without further processing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError

from .pfa import write_archive

# ImageNet statistics; torchvision backbones were trained under this
# preprocessing, so the taps see in-distribution inputs.
_MEAN = np.array([0.485, 0.456, 0.406], dtype=np.float32)
_STD = np.array([0.229, 0.224, 0.225], dtype=np.float32)

# backbone -> (torchvision ctor name, feature indices of the five
# post-nonlinearity stage outputs, canonical layer names)
BACKBONES = {
    "vgg": (
        "vgg16",
        (3, 8, 15, 22, 29),
        ("relu1_2", "relu2_2", "relu3_3", "relu4_3", "relu5_3"),
    ),
    "alexnet": (
        "alexnet",
        (1, 4, 7, 9, 11),
        ("relu1", "relu2", "relu3", "relu4", "relu5"),
    ),
}


class ExtractError(Exception):
    pass


@dataclass(frozen=True)
class ExtractorSpec:
    """Which backbone to tap and how to present the input images.

    resize is (w, h) or None; None keeps each image at native size,
    which requires all inputs to share dimensions.
    """

    backbone: str = "vgg"
    resize: tuple[int, int] | None = None

    def __post_init__(self):
        if self.backbone not in BACKBONES:
            raise ExtractError(
                f"unknown backbone {self.backbone!r}; "
                f"choose from {sorted(BACKBONES)}"
            )
        if self.resize is not None:
            w, h = self.resize
            if w < 1 or h < 1:
                raise ExtractError(f"resize must be positive, got {self.resize}")

    @property
    def layer_names(self):
        return BACKBONES[self.backbone][2]


def _build_model(spec, pretrained, seed):
    import torchvision.models as tvm

    ctor_name, _, _ = BACKBONES[spec.backbone]
    ctor = getattr(tvm, ctor_name)
    if pretrained:
        try:
            model = ctor(weights="DEFAULT")
        except Exception as exc:
            raise ExtractError(
                f"could not obtain pretrained {ctor_name} weights "
                f"(download blocked or cache missing): {exc}"
            ) from exc
    else:
        # deterministic random init; useful offline and for tests,
        # where only the pipeline contract matters, not feature quality
        torch.manual_seed(seed)
        model = ctor(weights=None)
    model.eval()
    return model


def _load_image(path, resize):
    img = Image.open(path).convert("RGB")
    if resize is not None:
        img = img.resize(resize, Image.BILINEAR)
    arr = np.asarray(img, dtype=np.float32) / 255.0
    arr = (arr - _MEAN) / _STD
    # HWC -> CHW
    return torch.from_numpy(np.ascontiguousarray(arr.transpose(2, 0, 1)))


def _unit_normalize(t):
    """Scale each spatial site's channel vector to unit L2 norm.

    Zero vectors stay zero rather than dividing by zero.
    """
    norms = np.linalg.norm(t, axis=0, keepdims=True)
    safe = np.where(norms > 0.0, norms, 1.0)
    return (t / safe).astype(np.float32)


def extract(image_paths, out_path, spec=None, *, pretrained=True, seed=0,
            skip_bad=False):
    """Run images through the backbone and write a normalized archive.

    Frame ids are the image file stems, in the order given.  Undecodable
    images either abort the run or are skipped with a warning, per
    skip_bad.  Returns the list of frame ids written.
    """
    if spec is None:
        spec = ExtractorSpec()
    paths = [Path(p) for p in image_paths]
    if not paths:
        raise ExtractError("no input images")

    model = _build_model(spec, pretrained, seed)
    _, indices, names = BACKBONES[spec.backbone]

    captured = {}
    hooks = []
    for idx, name in zip(indices, names):
        def make_hook(layer_name):
            def hook(_module, _inp, out):
                captured[layer_name] = out.detach()[0].numpy()
            return hook
        hooks.append(model.features[idx].register_forward_hook(make_hook(name)))

    frame_ids = []
    features = {}
    ref_shapes = None
    try:
        with torch.no_grad():
            for path in paths:
                try:
                    x = _load_image(path, spec.resize)
                except (UnidentifiedImageError, OSError) as exc:
                    if skip_bad:
                        warnings.warn(f"skipping undecodable image {path}: {exc}")
                        continue
                    raise ExtractError(f"cannot decode image {path}: {exc}") from exc
                captured.clear()
                try:
                    model.features(x.unsqueeze(0))
                except RuntimeError as exc:
                    # typically an input too small for the pooling stack
                    raise ExtractError(
                        f"backbone rejected image {path} at size "
                        f"{tuple(x.shape[1:])}; resize larger: {exc}"
                    ) from exc
                row = [_unit_normalize(captured[name]) for name in names]
                shapes = tuple(t.shape for t in row)
                if ref_shapes is None:
                    ref_shapes = shapes
                elif shapes != ref_shapes:
                    raise ExtractError(
                        f"image {path} produced layer shapes {shapes} but "
                        f"earlier frames gave {ref_shapes}; pass a fixed "
                        f"resize so all frames agree"
                    )
                fid = path.stem
                if fid in features:
                    raise ExtractError(f"duplicate frame id {fid!r} from {path}")
                frame_ids.append(fid)
                features[fid] = row
    finally:
        for h in hooks:
            h.remove()

    if not frame_ids:
        raise ExtractError("every input image failed to decode")
    write_archive(out_path, frame_ids, names, features, normalized=True)
    return frame_ids
